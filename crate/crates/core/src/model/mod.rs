//! Fusion of the latent-factor and neighborhood signals, the joint
//! objective, and SGD training.

mod config;
mod objective;
mod train;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use config::{TrainConfig, BALANCE_GRID, MEMORY_DIM_GRID, REGULARIZATION_GRID};
pub use objective::{bce, compute_gradients, loss_parts, prediction_loss, total_loss, Example, LossParts, Noise};
pub use train::{train, TrainedModel};

use crate::autoencoder::{encode, AutoencoderParams, INIT_SCALE};
use crate::dataset::{neighbor_set, Dataset, Pair, TrainingSet};
use crate::error::{Error, Result};
use crate::neighborhood::{attend, MemoryTable};
use crate::numerics::{dot, sigmoid, ParamTensors, Rng};

/// Weights of the output layer. `eta` is a fixed hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionParams {
    /// Weights on `drug ⊙ disease`, length = latent dim.
    pub h: Vec<f64>,
    /// Weights on the neighborhood representation, length = memory dim.
    pub w: Vec<f64>,
    pub b: f64,
    pub eta: f64,
}

/// All learnable tensors of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub drug_ae: AutoencoderParams,
    pub disease_ae: AutoencoderParams,
    pub memory: MemoryTable,
    pub fusion: FusionParams,
}

/// Gradients share the parameter layout; `fusion.eta` is unused.
pub type Gradients = ModelParams;

impl ModelParams {
    /// Seeded initialization: weights uniform on [-0.05, 0.05), biases zero.
    pub fn init(n_drugs: usize, n_diseases: usize, config: &TrainConfig, rng: &mut Rng) -> Self {
        let d = config.latent_dim;
        let l = config.memory_dim;
        let drug_ae = AutoencoderParams::init(n_diseases, n_drugs, d, rng);
        let disease_ae = AutoencoderParams::init(n_drugs, n_diseases, d, rng);
        let memory = MemoryTable::init(n_drugs, l, rng);
        let h = (0..d).map(|_| rng.uniform(-INIT_SCALE, INIT_SCALE)).collect();
        let w = (0..l).map(|_| rng.uniform(-INIT_SCALE, INIT_SCALE)).collect();
        ModelParams { drug_ae, disease_ae, memory, fusion: FusionParams { h, w, b: 0.0, eta: config.eta } }
    }

    pub fn zeros_like(&self) -> Self {
        let d = self.latent_dim();
        ModelParams {
            drug_ae: AutoencoderParams::zeros(self.n_diseases(), self.n_drugs(), d),
            disease_ae: AutoencoderParams::zeros(self.n_drugs(), self.n_diseases(), d),
            memory: MemoryTable::zeros(self.n_drugs(), self.memory_dim()),
            fusion: FusionParams { h: vec![0.0; d], w: vec![0.0; self.memory_dim()], b: 0.0, eta: self.fusion.eta },
        }
    }

    pub fn n_drugs(&self) -> usize {
        self.memory.n_drugs()
    }

    pub fn n_diseases(&self) -> usize {
        self.drug_ae.assoc_len()
    }

    pub fn latent_dim(&self) -> usize {
        self.drug_ae.latent_dim()
    }

    pub fn memory_dim(&self) -> usize {
        self.memory.dim()
    }

    /// Checks that every component agrees on (drugs, diseases, d, l).
    pub fn validate(&self) -> Result<()> {
        let (m, n, d, l) = (self.n_drugs(), self.n_diseases(), self.latent_dim(), self.memory_dim());
        let ok = self.drug_ae.sim_len() == m
            && self.disease_ae.assoc_len() == m
            && self.disease_ae.sim_len() == n
            && self.disease_ae.latent_dim() == d
            && self.drug_ae.encode_assoc.rows() == d
            && self.drug_ae.encode_assoc.cols() == n
            && self.drug_ae.encode_sim.cols() == m
            && self.drug_ae.decode_assoc.rows() == n
            && self.drug_ae.decode_assoc.cols() == d
            && self.drug_ae.decode_sim.rows() == m
            && self.drug_ae.decode_sim.cols() == d
            && self.disease_ae.encode_assoc.rows() == d
            && self.disease_ae.encode_assoc.cols() == m
            && self.disease_ae.encode_sim.cols() == n
            && self.disease_ae.decode_assoc.rows() == m
            && self.disease_ae.decode_assoc.cols() == d
            && self.disease_ae.decode_sim.rows() == n
            && self.disease_ae.decode_sim.cols() == d
            && self.fusion.h.len() == d
            && self.fusion.w.len() == l;
        if !ok {
            return Err(Error::Dimension(format!("inconsistent parameter shapes for m={m}, n={n}, d={d}, l={l}")));
        }
        if !self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite())) {
            return Err(Error::DataFormat("parameters contain non-finite values".into()));
        }
        Ok(())
    }

    /// `self -= step * grad`.
    pub fn apply_step(&mut self, grad: &Gradients, step: f64) {
        for ((_, p), (_, g)) in self.tensors_mut().into_iter().zip(grad.tensors()) {
            for (pv, gv) in p.iter_mut().zip(g) {
                *pv -= step * gv;
            }
        }
    }
}

impl ParamTensors for ModelParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = Vec::with_capacity(18);
        for ((_, t), name) in self.drug_ae.tensors().into_iter().zip(DRUG_AE_NAMES) {
            out.push((name, t));
        }
        for ((_, t), name) in self.disease_ae.tensors().into_iter().zip(DISEASE_AE_NAMES) {
            out.push((name, t));
        }
        out.push(("memory", self.memory.rows.as_slice()));
        out.push(("fusion.h", &self.fusion.h));
        out.push(("fusion.w", &self.fusion.w));
        out.push(("fusion.b", core::slice::from_ref(&self.fusion.b)));
        out
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut out = Vec::with_capacity(18);
        for ((_, t), name) in self.drug_ae.tensors_mut().into_iter().zip(DRUG_AE_NAMES) {
            out.push((name, t));
        }
        for ((_, t), name) in self.disease_ae.tensors_mut().into_iter().zip(DISEASE_AE_NAMES) {
            out.push((name, t));
        }
        out.push(("memory", self.memory.rows.as_mut_slice()));
        out.push(("fusion.h", &mut self.fusion.h));
        out.push(("fusion.w", &mut self.fusion.w));
        out.push(("fusion.b", core::slice::from_mut(&mut self.fusion.b)));
        out
    }
}

const DRUG_AE_NAMES: [&str; 7] = [
    "drug_ae.encode_assoc",
    "drug_ae.encode_sim",
    "drug_ae.encode_bias",
    "drug_ae.decode_assoc",
    "drug_ae.decode_assoc_bias",
    "drug_ae.decode_sim",
    "drug_ae.decode_sim_bias",
];

const DISEASE_AE_NAMES: [&str; 7] = [
    "disease_ae.encode_assoc",
    "disease_ae.encode_sim",
    "disease_ae.encode_bias",
    "disease_ae.decode_assoc",
    "disease_ae.decode_assoc_bias",
    "disease_ae.decode_sim",
    "disease_ae.decode_sim_bias",
];

/// What the model sees of the data: similarity matrices from the dataset,
/// association rows and neighbors from the training split.
#[derive(Debug, Clone, Copy)]
pub struct ModelData<'a> {
    pub dataset: &'a Dataset,
    pub train: &'a TrainingSet,
}

impl<'a> ModelData<'a> {
    pub fn new(dataset: &'a Dataset, train: &'a TrainingSet) -> Self {
        ModelData { dataset, train }
    }

    pub(crate) fn check_pair(&self, pair: Pair) -> Result<()> {
        if pair.drug >= self.dataset.n_drugs() || pair.disease >= self.dataset.n_diseases() {
            return Err(Error::Index(format!(
                "pair ({}, {}) out of range for {}x{} data",
                pair.drug,
                pair.disease,
                self.dataset.n_drugs(),
                self.dataset.n_diseases()
            )));
        }
        Ok(())
    }

    pub(crate) fn drug_latent(&self, params: &ModelParams, drug: usize) -> Result<Vec<f64>> {
        Ok(encode(self.train.drug_row(drug), self.dataset.drug_sim.row(drug), &params.drug_ae)?.into_inner())
    }

    pub(crate) fn disease_latent(&self, params: &ModelParams, disease: usize) -> Result<Vec<f64>> {
        Ok(encode(self.train.disease_row(disease), self.dataset.disease_sim.row(disease), &params.disease_ae)?.into_inner())
    }
}

/// Pre-activation of the output unit.
pub(crate) fn fusion_logit(fusion: &FusionParams, drug: &[f64], disease: &[f64], neighborhood: &[f64]) -> f64 {
    let latent_term: f64 = fusion.h.iter().zip(drug).zip(disease).map(|((h, a), e)| h * a * e).sum();
    fusion.eta * latent_term + (1.0 - fusion.eta) * dot(&fusion.w, neighborhood) + fusion.b
}

/// Score of one pair from clean (uncorrupted) inputs. The target drug is
/// left out of its own neighborhood.
pub fn predict(pair: Pair, params: &ModelParams, data: &ModelData<'_>) -> Result<f64> {
    data.check_pair(pair)?;
    let drug = data.drug_latent(params, pair.drug)?;
    let disease = data.disease_latent(params, pair.disease)?;
    let idx = neighbor_set(&data.train.neighbors, pair.disease, pair.drug);
    let latents = idx.iter().map(|&n| data.drug_latent(params, n)).collect::<Result<Vec<_>>>()?;
    let views: Vec<&[f64]> = latents.iter().map(|v| v.as_slice()).collect();
    let record = attend(&drug, &views, &idx, &params.memory)?;
    Ok(sigmoid(fusion_logit(&params.fusion, &drug, &disease, &record.output)))
}

/// Bulk scorer: caches clean latents of every drug and disease once.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    params: &'a ModelParams,
    data: ModelData<'a>,
    drug_latents: Vec<Vec<f64>>,
    disease_latents: Vec<Vec<f64>>,
}

impl<'a> Scorer<'a> {
    pub fn new(params: &'a ModelParams, data: ModelData<'a>) -> Result<Self> {
        params.validate()?;
        if params.n_drugs() != data.dataset.n_drugs() || params.n_diseases() != data.dataset.n_diseases() {
            return Err(Error::Dimension("model and dataset dimensions differ".into()));
        }
        let drug_latents = (0..data.dataset.n_drugs()).map(|i| data.drug_latent(params, i)).collect::<Result<_>>()?;
        let disease_latents =
            (0..data.dataset.n_diseases()).map(|j| data.disease_latent(params, j)).collect::<Result<_>>()?;
        Ok(Scorer { params, data, drug_latents, disease_latents })
    }

    pub fn score(&self, pair: Pair) -> Result<f64> {
        self.data.check_pair(pair)?;
        let target = &self.drug_latents[pair.drug];
        let idx = neighbor_set(&self.data.train.neighbors, pair.disease, pair.drug);
        let views: Vec<&[f64]> = idx.iter().map(|&n| self.drug_latents[n].as_slice()).collect();
        let record = attend(target, &views, &idx, &self.params.memory)?;
        Ok(sigmoid(fusion_logit(&self.params.fusion, target, &self.disease_latents[pair.disease], &record.output)))
    }

    /// Scores every (drug, disease) cell, row-major.
    pub fn score_all(&self) -> Result<crate::numerics::Matrix> {
        let (m, n) = (self.data.dataset.n_drugs(), self.data.dataset.n_diseases());
        let mut out = crate::numerics::Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                out.set(i, j, self.score(Pair::new(i, j))?);
            }
        }
        Ok(out)
    }
}
