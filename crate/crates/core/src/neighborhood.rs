//! Neighborhood contribution: preference scores between the target drug and
//! the drugs already linked to the disease, softmax attention over them, and
//! the attention-weighted read of the external memory table.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::autoencoder::INIT_SCALE;
use crate::error::{Error, Result};
use crate::numerics::{axpy, dot, softmax, Matrix, Rng};

/// One memory row per drug, used when that drug acts as a neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryTable {
    pub rows: Matrix,
}

impl MemoryTable {
    pub fn zeros(n_drugs: usize, dim: usize) -> Self {
        MemoryTable { rows: Matrix::zeros(n_drugs, dim) }
    }

    /// Entries uniform on [-0.05, 0.05).
    pub fn init(n_drugs: usize, dim: usize, rng: &mut Rng) -> Self {
        MemoryTable { rows: Matrix::uniform(n_drugs, dim, -INIT_SCALE, INIT_SCALE, rng) }
    }

    pub fn from_matrix(rows: Matrix) -> Self {
        MemoryTable { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    pub fn n_drugs(&self) -> usize {
        self.rows.rows()
    }

    pub fn row(&self, drug: usize) -> &[f64] {
        self.rows.row(drug)
    }
}

/// Intermediate values of one attention read, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRecord {
    pub neighbors: Vec<usize>,
    pub preferences: Vec<f64>,
    pub weights: Vec<f64>,
    pub output: Vec<f64>,
}

/// Inner product of the target latent with each neighbor latent.
pub fn preference_scores(target: &[f64], neighbors: &[&[f64]]) -> Result<Vec<f64>> {
    neighbors
        .iter()
        .map(|n| {
            if n.len() != target.len() {
                Err(Error::Dimension(format!(
                    "neighbor latent has length {}, target has {}",
                    n.len(),
                    target.len()
                )))
            } else {
                Ok(dot(target, n))
            }
        })
        .collect()
}

/// Softmax over the neighbor axis; empty in, empty out.
pub fn attention_weights(preferences: &[f64]) -> Vec<f64> {
    if preferences.is_empty() {
        return Vec::new();
    }
    softmax(preferences).expect("preference scores are finite")
}

/// `Σ_n q_n c_n`. An empty neighborhood reads as the zero vector.
pub fn neighborhood_representation(weights: &[f64], memory: &MemoryTable, neighbor_idx: &[usize]) -> Result<Vec<f64>> {
    if weights.len() != neighbor_idx.len() {
        return Err(Error::Dimension(format!(
            "{} attention weights for {} neighbors",
            weights.len(),
            neighbor_idx.len()
        )));
    }
    let mut out = vec![0.0; memory.dim()];
    for (&q, &n) in weights.iter().zip(neighbor_idx) {
        if n >= memory.n_drugs() {
            return Err(Error::Index(format!(
                "memory row {n} out of range for {} drugs",
                memory.n_drugs()
            )));
        }
        axpy(q, memory.row(n), &mut out);
    }
    Ok(out)
}

/// Full forward pass of the neighborhood module.
pub fn attend(
    target: &[f64],
    neighbor_latents: &[&[f64]],
    neighbor_idx: &[usize],
    memory: &MemoryTable,
) -> Result<AttentionRecord> {
    if neighbor_latents.len() != neighbor_idx.len() {
        return Err(Error::Dimension("neighbor latents and indices differ in length".into()));
    }
    let preferences = preference_scores(target, neighbor_latents)?;
    let weights = attention_weights(&preferences);
    let output = neighborhood_representation(&weights, memory, neighbor_idx)?;
    Ok(AttentionRecord { neighbors: neighbor_idx.to_vec(), preferences, weights, output })
}

/// Gradients of a scalar with respect to the inputs of [`attend`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionGrads {
    pub target: Vec<f64>,
    /// Aligned with `AttentionRecord::neighbors`.
    pub neighbors: Vec<Vec<f64>>,
    /// Gradient of each neighbor's memory row, aligned likewise.
    pub memory_rows: Vec<Vec<f64>>,
}

/// Backpropagates `d_output` (gradient w.r.t. the representation) through
/// the memory read, the softmax and the inner products.
pub fn attention_backward(
    record: &AttentionRecord,
    target: &[f64],
    neighbor_latents: &[&[f64]],
    memory: &MemoryTable,
    d_output: &[f64],
) -> AttentionGrads {
    let k = record.neighbors.len();
    let mut grads = AttentionGrads {
        target: vec![0.0; target.len()],
        neighbors: Vec::with_capacity(k),
        memory_rows: Vec::with_capacity(k),
    };
    if k == 0 {
        return grads;
    }
    let d_weights: Vec<f64> = record.neighbors.iter().map(|&n| dot(d_output, memory.row(n))).collect();
    let mean = dot(&record.weights, &d_weights);
    for (idx, &q) in record.weights.iter().enumerate() {
        grads.memory_rows.push(d_output.iter().map(|g| g * q).collect());
        let d_pref = q * (d_weights[idx] - mean);
        axpy(d_pref, neighbor_latents[idx], &mut grads.target);
        grads.neighbors.push(target.iter().map(|t| t * d_pref).collect());
    }
    grads
}
