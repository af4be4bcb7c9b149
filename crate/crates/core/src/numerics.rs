//! Dense linear algebra, activations, the seeded generator and the
//! finite-difference gradient checker.
//!
//! Everything is `f64`. Transcendentals go through `libm` so results do not
//! depend on the platform's math library.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(alloc::format!(
                "expected {rows}x{cols} = {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::DataFormat(alloc::format!(
                "non-finite value at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(alloc::format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    /// Entries drawn independently from U[lo, hi).
    pub fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut Rng) -> Self {
        let data = (0..rows * cols).map(|_| rng.uniform(lo, hi)).collect();
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `out += self * x`.
    pub fn mul_vec_acc(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.cols || out.len() != self.rows {
            return Err(Error::Dimension(alloc::format!(
                "cannot multiply {}x{} by vector of length {} into length {}",
                self.rows,
                self.cols,
                x.len(),
                out.len()
            )));
        }
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o += dot(row, x);
        }
        Ok(())
    }

    /// `out += selfᵀ * v`.
    pub fn tr_mul_vec_acc(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.rows || out.len() != self.cols {
            return Err(Error::Dimension(alloc::format!(
                "cannot multiply transpose of {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.row(i), out);
            }
        }
        Ok(())
    }

    /// Rank-one update `self += scale * u vᵀ`. Zero entries of `u` are skipped.
    pub fn add_outer(&mut self, scale: f64, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (i, &ui) in u.iter().enumerate() {
            let s = scale * ui;
            if s != 0.0 {
                axpy(s, v, self.row_mut(i));
            }
        }
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Dimension("softmax of an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::DataFormat("softmax input must be finite".into()));
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|&x| libm::exp(x - max)).collect();
    let total: f64 = out.iter().sum();
    for o in &mut out {
        *o /= total;
    }
    Ok(out)
}

/// Seeded pseudo-random generator.
///
/// The stream is xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
/// Floats take the top 53 bits of a draw; bounded integers use rejection
/// sampling, so a given seed yields the same stream on every platform.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { inner: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    /// Independent stream for `(seed, stream)`. Used to give every fold,
    /// epoch and corrupted row its own generator.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Rng::new(derive_seed(seed, stream))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, bound)`. `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "Rng::below called with zero bound");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    pub fn below_usize(&mut self, bound: usize) -> usize {
        self.below(bound as u64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below_usize(i + 1);
            items.swap(i, j);
        }
    }
}

/// Mixes a base seed and a stream id into a child seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// A collection of named parameter tensors, viewed as flat slices.
pub trait ParamTensors {
    fn tensors(&self) -> Vec<(&'static str, &[f64])>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])>;
}

impl ParamTensors for Vec<f64> {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![("theta", self.as_slice())]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![("theta", self.as_mut_slice())]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_tensor: &'static str,
    pub worst_index: usize,
    pub coordinates_checked: usize,
}

/// Default number of coordinates sampled per tensor.
pub const GRAD_CHECK_SAMPLES: usize = 200;

/// Compares `analytic` against central differences of `loss` on a seeded
/// subset of coordinates (at most `per_tensor` per tensor).
///
/// The error of one coordinate is `|fd - an| / max(1e-8, |fd| + |an|)`; the
/// report carries the maximum.
pub fn finite_diff_check<P, F>(
    mut loss: F,
    params: &P,
    analytic: &P,
    eps: f64,
    per_tensor: usize,
    seed: u64,
) -> Result<GradCheckReport>
where
    P: ParamTensors + Clone,
    F: FnMut(&P) -> f64,
{
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::Config(alloc::format!("eps must lie in (0, 1e-2], got {eps}")));
    }
    let base_a = loss(params);
    let base_b = loss(params);
    if base_a.to_bits() != base_b.to_bits() {
        return Err(Error::Check(alloc::format!(
            "loss is not deterministic: {base_a} vs {base_b}"
        )));
    }

    let grads = analytic.tensors();
    let shapes: Vec<(&'static str, usize)> = params.tensors().iter().map(|(n, t)| (*n, t.len())).collect();
    if grads.len() != shapes.len() || grads.iter().zip(&shapes).any(|(g, s)| g.1.len() != s.1) {
        return Err(Error::Dimension("gradient layout does not match parameters".into()));
    }

    let mut rng = Rng::new(seed);
    let mut work = params.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_tensor: "",
        worst_index: 0,
        coordinates_checked: 0,
    };

    for (t, &(name, len)) in shapes.iter().enumerate() {
        let mut coords: Vec<usize> = (0..len).collect();
        if len > per_tensor {
            // partial Fisher-Yates: the first `per_tensor` slots are a uniform sample
            for i in 0..per_tensor {
                let j = i + rng.below_usize(len - i);
                coords.swap(i, j);
            }
            coords.truncate(per_tensor);
        }
        for &c in &coords {
            let orig = work.tensors()[t].1[c];
            work.tensors_mut()[t].1[c] = orig + eps;
            let plus = loss(&work);
            work.tensors_mut()[t].1[c] = orig - eps;
            let minus = loss(&work);
            work.tensors_mut()[t].1[c] = orig;

            let fd = (plus - minus) / (2.0 * eps);
            let an = grads[t].1[c];
            let rel = libm::fabs(fd - an) / f64::max(1e-8, libm::fabs(fd) + libm::fabs(an));
            report.coordinates_checked += 1;
            if rel > report.max_rel_error || report.worst_tensor.is_empty() {
                report.max_rel_error = rel;
                report.worst_tensor = name;
                report.worst_index = c;
            }
        }
    }
    Ok(report)
}
