use alloc::format;

use crate::autoencoder::DEFAULT_NOISE_LEVEL;
use crate::error::{Error, Result};

/// Search interval for the memory dimension.
pub const MEMORY_DIM_GRID: [usize; 5] = [16, 32, 64, 128, 256];
/// Search interval for eta, alpha and beta.
pub const BALANCE_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Search interval for lambda and delta.
pub const REGULARIZATION_GRID: [f64; 3] = [0.1, 0.01, 0.001];

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Latent factor size `d`.
    pub latent_dim: usize,
    /// External memory row size `l`.
    pub memory_dim: usize,
    /// Weight of the latent-factor term against the neighborhood term.
    pub eta: f64,
    /// Association vs. similarity reconstruction balance, drug side.
    pub alpha: f64,
    /// Association vs. similarity reconstruction balance, disease side.
    pub beta: f64,
    /// Weight decay, drug autoencoder.
    pub lambda: f64,
    /// Weight decay, disease autoencoder.
    pub delta: f64,
    /// Weight of the drug autoencoder loss in the joint objective.
    pub phi: f64,
    /// Weight of the disease autoencoder loss in the joint objective.
    pub psi: f64,
    pub learning_rate: f64,
    /// Multiplicative decay applied every `lr_decay_every` epochs.
    pub lr_decay: f64,
    pub lr_decay_every: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Negatives drawn per training positive each epoch.
    pub neg_ratio: usize,
    /// Masking probability of the denoising corruption.
    pub noise_level: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            latent_dim: 32,
            memory_dim: 64,
            eta: 0.7,
            alpha: 0.5,
            beta: 0.5,
            lambda: 0.01,
            delta: 0.01,
            phi: 0.5,
            psi: 0.5,
            learning_rate: 0.01,
            lr_decay: 0.5,
            lr_decay_every: 50,
            epochs: 100,
            batch_size: 128,
            neg_ratio: 5,
            noise_level: DEFAULT_NOISE_LEVEL,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = [("eta", self.eta), ("alpha", self.alpha), ("beta", self.beta), ("noise_level", self.noise_level)];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        let nonneg = [("lambda", self.lambda), ("delta", self.delta), ("phi", self.phi), ("psi", self.psi)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::Config(format!("lr decay must lie in (0, 1], got {}", self.lr_decay)));
        }
        let positive = [
            ("latent_dim", self.latent_dim),
            ("memory_dim", self.memory_dim),
            ("batch_size", self.batch_size),
            ("neg_ratio", self.neg_ratio),
            ("lr_decay_every", self.lr_decay_every),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let mut lr = self.learning_rate;
        for _ in 0..epoch / self.lr_decay_every {
            lr *= self.lr_decay;
        }
        lr
    }
}
