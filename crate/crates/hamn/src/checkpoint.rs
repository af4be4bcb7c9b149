//! JSON checkpoint documents.

use std::fs;
use std::path::Path;

use hamn_core::dataset::{make_fold_plan, Dataset, TrainingSet};
use hamn_core::model::{ModelParams, TrainConfig};
use hamn_core::numerics::{ParamTensors, Rng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Serializable mirror of `TrainConfig`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub latent_dim: usize,
    pub memory_dim: usize,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub phi: f64,
    pub psi: f64,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub lr_decay_every: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub neg_ratio: usize,
    pub noise_level: f64,
    pub seed: u64,
}

impl From<&TrainConfig> for ConfigEcho {
    fn from(c: &TrainConfig) -> Self {
        ConfigEcho {
            latent_dim: c.latent_dim,
            memory_dim: c.memory_dim,
            eta: c.eta,
            alpha: c.alpha,
            beta: c.beta,
            lambda: c.lambda,
            delta: c.delta,
            phi: c.phi,
            psi: c.psi,
            learning_rate: c.learning_rate,
            lr_decay: c.lr_decay,
            lr_decay_every: c.lr_decay_every,
            epochs: c.epochs,
            batch_size: c.batch_size,
            neg_ratio: c.neg_ratio,
            noise_level: c.noise_level,
            seed: c.seed,
        }
    }
}

impl From<&ConfigEcho> for TrainConfig {
    fn from(c: &ConfigEcho) -> Self {
        TrainConfig {
            latent_dim: c.latent_dim,
            memory_dim: c.memory_dim,
            eta: c.eta,
            alpha: c.alpha,
            beta: c.beta,
            lambda: c.lambda,
            delta: c.delta,
            phi: c.phi,
            psi: c.psi,
            learning_rate: c.learning_rate,
            lr_decay: c.lr_decay,
            lr_decay_every: c.lr_decay_every,
            epochs: c.epochs,
            batch_size: c.batch_size,
            neg_ratio: c.neg_ratio,
            noise_level: c.noise_level,
            seed: c.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub drugs: usize,
    pub diseases: usize,
    pub positives: usize,
}

impl Fingerprint {
    pub fn of(dataset: &Dataset) -> Self {
        Fingerprint {
            drugs: dataset.n_drugs(),
            diseases: dataset.n_diseases(),
            positives: dataset.assoc.positives().len(),
        }
    }
}

/// Fold of a seeded k-fold plan whose positives were kept out of training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holdout {
    pub folds: usize,
    pub fold: usize,
    pub plan_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub dims: Dims,
    pub config: ConfigEcho,
    pub fingerprint: Fingerprint,
    pub holdout: Option<Holdout>,
    pub tensors: Vec<Tensor>,
}

impl Checkpoint {
    pub fn new(params: &ModelParams, config: &TrainConfig, dataset: &Dataset, holdout: Option<Holdout>) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION,
            dims: Dims { m: params.n_drugs(), n: params.n_diseases(), d: params.latent_dim(), l: params.memory_dim() },
            config: config.into(),
            fingerprint: Fingerprint::of(dataset),
            holdout,
            tensors: params
                .tensors()
                .into_iter()
                .map(|(name, values)| Tensor { name: name.to_string(), values: values.to_vec() })
                .collect(),
        }
    }

    pub fn config(&self) -> TrainConfig {
        (&self.config).into()
    }

    /// Rebuilds the parameters, checking every tensor's name and length.
    pub fn params(&self) -> Result<ModelParams> {
        let Dims { m, n, d, l } = self.dims;
        let shape = TrainConfig { latent_dim: d, memory_dim: l, eta: self.config.eta, ..TrainConfig::default() };
        let mut params = ModelParams::init(m, n, &shape, &mut Rng::new(0));
        let mut slots = params.tensors_mut();
        if slots.len() != self.tensors.len() {
            return Err(Error::Checkpoint(format!("expected {} tensors, found {}", slots.len(), self.tensors.len())));
        }
        for ((name, slot), stored) in slots.iter_mut().zip(&self.tensors) {
            if *name != stored.name {
                return Err(Error::Checkpoint(format!("expected tensor {name}, found {}", stored.name)));
            }
            if slot.len() != stored.values.len() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has {} values, expected {} for dims {:?}",
                    stored.values.len(),
                    slot.len(),
                    self.dims
                )));
            }
            slot.copy_from_slice(&stored.values);
        }
        params.validate()?;
        Ok(params)
    }

    /// Rejects a dataset other than the one the checkpoint was trained on.
    pub fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        let found = Fingerprint::of(dataset);
        if found != self.fingerprint {
            return Err(Error::Checkpoint(format!(
                "dataset fingerprint mismatch: checkpoint has {:?}, dataset has {found:?}",
                self.fingerprint
            )));
        }
        if (self.dims.m, self.dims.n) != (found.drugs, found.diseases) {
            return Err(Error::Checkpoint(format!("dims {:?} do not match the dataset", self.dims)));
        }
        Ok(())
    }

    /// Training positives the model saw.
    pub fn training_set(&self, dataset: &Dataset) -> Result<TrainingSet> {
        match self.holdout {
            None => Ok(TrainingSet::full(&dataset.assoc)?),
            Some(h) => {
                let plan = make_fold_plan(&dataset.assoc, h.folds, h.plan_seed)?;
                Ok(TrainingSet::new(&dataset.assoc, &plan.train_pairs(h.fold))?)
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format_version {}", ckpt.format_version)));
        }
        Ok(ckpt)
    }
}
