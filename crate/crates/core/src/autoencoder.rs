//! Additional denoising autoencoder: encodes an association row together
//! with a similarity row into a latent factor and reconstructs both.
//!
//! The drug side reads `R[i, :]` and `DrugSim[i, :]`; the disease side reads
//! `R[:, j]` and `DiseaseSim[j, :]`. Encoder and decoders use the logistic
//! activation, so latents and reconstructions live in (0, 1).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::numerics::{axpy, sigmoid, Matrix, ParamTensors, Rng};

/// Half-width of the uniform range used to initialize weights.
pub const INIT_SCALE: f64 = 0.05;

/// Default masking probability for input corruption.
pub const DEFAULT_NOISE_LEVEL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderParams {
    /// `W1`, latent x association-row length.
    pub encode_assoc: Matrix,
    /// `V1`, latent x similarity-row length.
    pub encode_sim: Matrix,
    pub encode_bias: Vec<f64>,
    /// `W2`, association-row length x latent.
    pub decode_assoc: Matrix,
    pub decode_assoc_bias: Vec<f64>,
    /// `V2`, similarity-row length x latent.
    pub decode_sim: Matrix,
    pub decode_sim_bias: Vec<f64>,
}

impl AutoencoderParams {
    pub fn zeros(assoc_len: usize, sim_len: usize, latent_dim: usize) -> Self {
        AutoencoderParams {
            encode_assoc: Matrix::zeros(latent_dim, assoc_len),
            encode_sim: Matrix::zeros(latent_dim, sim_len),
            encode_bias: vec![0.0; latent_dim],
            decode_assoc: Matrix::zeros(assoc_len, latent_dim),
            decode_assoc_bias: vec![0.0; assoc_len],
            decode_sim: Matrix::zeros(sim_len, latent_dim),
            decode_sim_bias: vec![0.0; sim_len],
        }
    }

    /// Weights uniform on [-0.05, 0.05), biases zero.
    pub fn init(assoc_len: usize, sim_len: usize, latent_dim: usize, rng: &mut Rng) -> Self {
        let s = INIT_SCALE;
        AutoencoderParams {
            encode_assoc: Matrix::uniform(latent_dim, assoc_len, -s, s, rng),
            encode_sim: Matrix::uniform(latent_dim, sim_len, -s, s, rng),
            encode_bias: vec![0.0; latent_dim],
            decode_assoc: Matrix::uniform(assoc_len, latent_dim, -s, s, rng),
            decode_assoc_bias: vec![0.0; assoc_len],
            decode_sim: Matrix::uniform(sim_len, latent_dim, -s, s, rng),
            decode_sim_bias: vec![0.0; sim_len],
        }
    }

    pub fn latent_dim(&self) -> usize {
        self.encode_bias.len()
    }

    pub fn assoc_len(&self) -> usize {
        self.decode_assoc_bias.len()
    }

    pub fn sim_len(&self) -> usize {
        self.decode_sim_bias.len()
    }

    /// `‖W1‖² + ‖V1‖² + ‖W2‖² + ‖V2‖²`; biases are not regularized.
    pub fn weight_norm_sq(&self) -> f64 {
        self.encode_assoc.norm_sq() + self.encode_sim.norm_sq() + self.decode_assoc.norm_sq() + self.decode_sim.norm_sq()
    }

    /// `grad += 2 * scale * W` for every weight matrix.
    pub fn add_weight_decay(&self, grad: &mut AutoencoderParams, scale: f64) {
        let pairs = [
            (&self.encode_assoc, &mut grad.encode_assoc),
            (&self.encode_sim, &mut grad.encode_sim),
            (&self.decode_assoc, &mut grad.decode_assoc),
            (&self.decode_sim, &mut grad.decode_sim),
        ];
        for (w, g) in pairs {
            axpy(2.0 * scale, w.as_slice(), g.as_mut_slice());
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

impl ParamTensors for AutoencoderParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("encode_assoc", self.encode_assoc.as_slice()),
            ("encode_sim", self.encode_sim.as_slice()),
            ("encode_bias", &self.encode_bias),
            ("decode_assoc", self.decode_assoc.as_slice()),
            ("decode_assoc_bias", &self.decode_assoc_bias),
            ("decode_sim", self.decode_sim.as_slice()),
            ("decode_sim_bias", &self.decode_sim_bias),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("encode_assoc", self.encode_assoc.as_mut_slice()),
            ("encode_sim", self.encode_sim.as_mut_slice()),
            ("encode_bias", &mut self.encode_bias),
            ("decode_assoc", self.decode_assoc.as_mut_slice()),
            ("decode_assoc_bias", &mut self.decode_assoc_bias),
            ("decode_sim", self.decode_sim.as_mut_slice()),
            ("decode_sim_bias", &mut self.decode_sim_bias),
        ]
    }
}

/// Latent factor of one drug or disease.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFactor(Vec<f64>);

impl LatentFactor {
    pub fn new(values: Vec<f64>) -> Self {
        LatentFactor(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LatentFactor {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub assoc: Vec<f64>,
    pub sim: Vec<f64>,
}

/// Masking noise: each entry is zeroed independently with probability
/// `noise_level`.
pub fn corrupt(row: &[f64], noise_level: f64, rng: &mut Rng) -> Vec<f64> {
    if noise_level <= 0.0 {
        return row.to_vec();
    }
    row.iter().map(|&v| if rng.next_f64() < noise_level { 0.0 } else { v }).collect()
}

pub fn encode(assoc_row: &[f64], sim_row: &[f64], params: &AutoencoderParams) -> Result<LatentFactor> {
    if assoc_row.len() != params.encode_assoc.cols() || sim_row.len() != params.encode_sim.cols() {
        return Err(Error::Dimension(format!(
            "encoder expects rows of length ({}, {}), got ({}, {})",
            params.encode_assoc.cols(),
            params.encode_sim.cols(),
            assoc_row.len(),
            sim_row.len()
        )));
    }
    let mut pre = params.encode_bias.clone();
    // association rows are sparse 0/1
    for (j, &x) in assoc_row.iter().enumerate() {
        if x != 0.0 {
            for (k, p) in pre.iter_mut().enumerate() {
                *p += params.encode_assoc.get(k, j) * x;
            }
        }
    }
    params.encode_sim.mul_vec_acc(sim_row, &mut pre)?;
    Ok(LatentFactor(pre.into_iter().map(sigmoid).collect()))
}

pub fn decode(latent: &[f64], params: &AutoencoderParams) -> Result<Reconstruction> {
    if latent.len() != params.latent_dim() {
        return Err(Error::Dimension(format!(
            "decoder expects a latent of length {}, got {}",
            params.latent_dim(),
            latent.len()
        )));
    }
    let mut assoc = params.decode_assoc_bias.clone();
    params.decode_assoc.mul_vec_acc(latent, &mut assoc)?;
    let mut sim = params.decode_sim_bias.clone();
    params.decode_sim.mul_vec_acc(latent, &mut sim)?;
    assoc.iter_mut().for_each(|v| *v = sigmoid(*v));
    sim.iter_mut().for_each(|v| *v = sigmoid(*v));
    Ok(Reconstruction { assoc, sim })
}

/// `alpha * ‖s - ŝ‖² + (1 - alpha) * ‖sim - ŝim‖²` against the clean inputs.
pub fn reconstruction_error(assoc_row: &[f64], sim_row: &[f64], recon: &Reconstruction, alpha: f64) -> f64 {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    alpha * sq(assoc_row, &recon.assoc) + (1.0 - alpha) * sq(sim_row, &recon.sim)
}

/// Single-row autoencoder objective including the weight penalty.
pub fn ae_loss(
    assoc_row: &[f64],
    sim_row: &[f64],
    recon: &Reconstruction,
    params: &AutoencoderParams,
    alpha: f64,
    lambda: f64,
) -> f64 {
    reconstruction_error(assoc_row, sim_row, recon, alpha) + lambda * params.weight_norm_sq()
}

/// Accumulates the gradient of `scale * reconstruction_error` into the
/// decoder tensors of `grad` and into `d_latent`.
pub(crate) fn backprop_decoder(
    latent: &[f64],
    recon: &Reconstruction,
    assoc_row: &[f64],
    sim_row: &[f64],
    alpha: f64,
    scale: f64,
    params: &AutoencoderParams,
    grad: &mut AutoencoderParams,
    d_latent: &mut [f64],
) {
    let delta = |out: &[f64], target: &[f64], w: f64| -> Vec<f64> {
        out.iter().zip(target).map(|(&o, &t)| scale * w * 2.0 * (o - t) * o * (1.0 - o)).collect()
    };
    let d_assoc = delta(&recon.assoc, assoc_row, alpha);
    grad.decode_assoc.add_outer(1.0, &d_assoc, latent);
    axpy(1.0, &d_assoc, &mut grad.decode_assoc_bias);
    // shapes are fixed by construction
    params.decode_assoc.tr_mul_vec_acc(&d_assoc, d_latent).expect("decoder shape");

    let d_sim = delta(&recon.sim, sim_row, 1.0 - alpha);
    grad.decode_sim.add_outer(1.0, &d_sim, latent);
    axpy(1.0, &d_sim, &mut grad.decode_sim_bias);
    params.decode_sim.tr_mul_vec_acc(&d_sim, d_latent).expect("decoder shape");
}

/// Pushes `d_latent` through the encoder nonlinearity into the encoder
/// tensors of `grad`. `assoc_in` / `sim_in` are the (possibly corrupted)
/// inputs the latent was computed from.
pub(crate) fn backprop_encoder(
    latent: &[f64],
    d_latent: &[f64],
    assoc_in: &[f64],
    sim_in: &[f64],
    grad: &mut AutoencoderParams,
) {
    let d_pre: Vec<f64> = latent.iter().zip(d_latent).map(|(&a, &g)| g * a * (1.0 - a)).collect();
    if d_pre.iter().all(|&v| v == 0.0) {
        return;
    }
    for (j, &x) in assoc_in.iter().enumerate() {
        if x != 0.0 {
            for (k, &dp) in d_pre.iter().enumerate() {
                let cols = grad.encode_assoc.cols();
                grad.encode_assoc.as_mut_slice()[k * cols + j] += dp * x;
            }
        }
    }
    grad.encode_sim.add_outer(1.0, &d_pre, sim_in);
    axpy(1.0, &d_pre, &mut grad.encode_bias);
}

/// Loss and gradient of [`ae_loss`] for one row, where the latent is
/// encoded from the corrupted inputs and compared with the clean ones.
pub fn ae_loss_and_grad(
    clean_assoc: &[f64],
    clean_sim: &[f64],
    noisy_assoc: &[f64],
    noisy_sim: &[f64],
    params: &AutoencoderParams,
    alpha: f64,
    lambda: f64,
) -> Result<(f64, AutoencoderParams)> {
    let latent = encode(noisy_assoc, noisy_sim, params)?;
    let recon = decode(&latent, params)?;
    let loss = ae_loss(clean_assoc, clean_sim, &recon, params, alpha, lambda);
    let mut grad = AutoencoderParams::zeros(params.assoc_len(), params.sim_len(), params.latent_dim());
    let mut d_latent = vec![0.0; params.latent_dim()];
    backprop_decoder(&latent, &recon, clean_assoc, clean_sim, alpha, 1.0, params, &mut grad, &mut d_latent);
    backprop_encoder(&latent, &d_latent, noisy_assoc, noisy_sim, &mut grad);
    params.add_weight_decay(&mut grad, lambda);
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_check;

    #[test]
    fn corrupt_extremes() {
        let row = vec![1.0, 0.5, 0.0, 0.25];
        let mut rng = Rng::new(1);
        assert_eq!(corrupt(&row, 0.0, &mut rng), row);
        assert_eq!(corrupt(&row, 1.0, &mut rng), vec![0.0; 4]);
    }

    #[test]
    fn corrupt_rate_concentrates() {
        // 1000 Bernoulli(0.8) draws: sd of the mean is 0.0126, 3 sd is ~0.038
        let row = vec![1.0; 1000];
        for seed in 0..50 {
            let out = corrupt(&row, 0.2, &mut Rng::new(seed));
            let mean = out.iter().sum::<f64>() / 1000.0;
            assert!((0.76..=0.84).contains(&mean), "seed {seed}: {mean}");
        }
    }

    #[test]
    fn encode_zero_params_gives_half() {
        let p = AutoencoderParams::zeros(3, 4, 2);
        let z = encode(&[0.0; 3], &[0.0; 4], &p).unwrap();
        assert_eq!(&*z, &[0.5, 0.5]);
    }

    #[test]
    fn encode_single_unit() {
        let mut p = AutoencoderParams::zeros(2, 2, 1);
        p.encode_assoc.set(0, 0, 1.0);
        let z = encode(&[1.0, 0.0], &[0.0, 0.0], &p).unwrap();
        assert!((z[0] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!(matches!(encode(&[1.0], &[0.0, 0.0], &p), Err(Error::Dimension(_))));
    }

    #[test]
    fn decode_shapes_and_values() {
        // drug side of a 4-drug x 3-disease toy: assoc rows have 3 entries, sim rows 4
        let p = AutoencoderParams::zeros(3, 4, 2);
        let r = decode(&[0.3, 0.9], &p).unwrap();
        assert_eq!(r.assoc, vec![0.5; 3]);
        assert_eq!(r.sim, vec![0.5; 4]);

        let mut p = AutoencoderParams::zeros(1, 1, 1);
        p.decode_assoc.set(0, 0, 2.0);
        p.decode_assoc_bias[0] = -2.0;
        let r = decode(&[1.0], &p).unwrap();
        assert_eq!(r.assoc, vec![0.5]);
        assert!(decode(&[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn loss_values() {
        let p = AutoencoderParams::zeros(2, 1, 1);
        let perfect = Reconstruction { assoc: vec![1.0, 0.0], sim: vec![1.0] };
        assert_eq!(ae_loss(&[1.0, 0.0], &[1.0], &perfect, &p, 0.3, 0.0), 0.0);

        let half = Reconstruction { assoc: vec![0.5, 0.5], sim: vec![1.0] };
        assert!((ae_loss(&[1.0, 0.0], &[1.0], &half, &p, 0.5, 0.0) - 0.25).abs() < 1e-15);

        let a = Reconstruction { assoc: vec![0.5, 0.5], sim: vec![0.1] };
        let b = Reconstruction { assoc: vec![0.5, 0.5], sim: vec![0.9] };
        assert_eq!(ae_loss(&[1.0, 0.0], &[1.0], &a, &p, 1.0, 0.0), ae_loss(&[1.0, 0.0], &[1.0], &b, &p, 1.0, 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::new(17);
        let mut p = AutoencoderParams::init(5, 4, 3, &mut rng);
        for (_, t) in p.tensors_mut() {
            for v in t.iter_mut() {
                *v += rng.uniform(-0.5, 0.5);
            }
        }
        let clean_a = [1.0, 0.0, 0.0, 1.0, 0.0];
        let clean_s = [1.0, 0.2, 0.7, 0.4];
        let noisy_a = corrupt(&clean_a, 0.3, &mut Rng::new(4));
        let noisy_s = corrupt(&clean_s, 0.3, &mut Rng::new(5));
        let (alpha, lambda) = (0.3, 0.01);
        let (_, grad) = ae_loss_and_grad(&clean_a, &clean_s, &noisy_a, &noisy_s, &p, alpha, lambda).unwrap();
        let report = finite_diff_check(
            |q: &AutoencoderParams| ae_loss_and_grad(&clean_a, &clean_s, &noisy_a, &noisy_s, q, alpha, lambda).unwrap().0,
            &p,
            &grad,
            1e-5,
            200,
            9,
        )
        .unwrap();
        assert!(report.max_rel_error <= 1e-4, "{report:?}");
    }
}
