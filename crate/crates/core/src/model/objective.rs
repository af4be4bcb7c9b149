//! Joint objective over a minibatch and its analytic gradient.
//!
//! Per step every drug that appears (as target or as neighbor) and every
//! disease in the batch is encoded once; the latent is shared by the fusion
//! term, the attention read and the reconstruction loss, so its gradient is
//! accumulated from all three before flowing into the encoder.

use alloc::vec;
use alloc::vec::Vec;

use super::{fusion_logit, Gradients, ModelData, ModelParams, TrainConfig};
use crate::autoencoder::{backprop_decoder, backprop_encoder, corrupt, decode, encode, reconstruction_error, AutoencoderParams};
use crate::dataset::{neighbor_set, Pair};
use crate::error::Result;
use crate::neighborhood::{attend, attention_backward};
use crate::numerics::{axpy, sigmoid, Rng};

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` inside the log loss.
pub const CLIP: f64 = 1e-12;

/// A labelled pair of the epoch's training set (`R+ ∪ R-`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example {
    pub pair: Pair,
    pub label: bool,
}

impl Example {
    pub const fn new(drug: usize, disease: usize, label: bool) -> Self {
        Example { pair: Pair::new(drug, disease), label }
    }
}

/// Input corruption used for one evaluation of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Clean,
    /// Masking with probability `level`; the masks are a pure function of
    /// `seed` and the row, so a fixed seed freezes them.
    Mask { level: f64, seed: u64 },
}

/// The terms of the joint loss, unweighted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    /// Cross-entropy over the batch.
    pub prediction: f64,
    /// Drug autoencoder loss: reconstruction over batch drugs plus `lambda` penalty.
    pub drug: f64,
    /// Disease autoencoder loss: reconstruction over batch diseases plus `delta` penalty.
    pub disease: f64,
    /// `prediction + phi * drug + psi * disease`.
    pub total: f64,
}

/// Binary cross-entropy of one prediction, with clipping.
pub fn bce(label: bool, score: f64) -> f64 {
    let s = score.clamp(CLIP, 1.0 - CLIP);
    if label {
        -libm::log(s)
    } else {
        -libm::log(1.0 - s)
    }
}

/// Cached inputs, latents and latent gradients for one side.
struct SideCache {
    slot: Vec<usize>,
    ids: Vec<usize>,
    assoc_in: Vec<Vec<f64>>,
    sim_in: Vec<Vec<f64>>,
    latents: Vec<Vec<f64>>,
    d_latents: Vec<Vec<f64>>,
}

impl SideCache {
    fn new(count: usize) -> Self {
        SideCache {
            slot: vec![usize::MAX; count],
            ids: Vec::new(),
            assoc_in: Vec::new(),
            sim_in: Vec::new(),
            latents: Vec::new(),
            d_latents: Vec::new(),
        }
    }

    fn ensure(
        &mut self,
        id: usize,
        assoc_row: &[f64],
        sim_row: &[f64],
        ae: &AutoencoderParams,
        noise: Noise,
        stream: u64,
    ) -> Result<usize> {
        if self.slot[id] != usize::MAX {
            return Ok(self.slot[id]);
        }
        let (a, s) = match noise {
            Noise::Clean => (assoc_row.to_vec(), sim_row.to_vec()),
            Noise::Mask { level, seed } => (
                corrupt(assoc_row, level, &mut Rng::derive(seed, 4 * id as u64 + stream)),
                corrupt(sim_row, level, &mut Rng::derive(seed, 4 * id as u64 + stream + 1)),
            ),
        };
        let latent = encode(&a, &s, ae)?.into_inner();
        let k = self.ids.len();
        self.slot[id] = k;
        self.ids.push(id);
        self.d_latents.push(vec![0.0; latent.len()]);
        self.latents.push(latent);
        self.assoc_in.push(a);
        self.sim_in.push(s);
        Ok(k)
    }
}

fn evaluate(
    batch: &[Example],
    params: &ModelParams,
    data: &ModelData<'_>,
    config: &TrainConfig,
    noise: Noise,
    mut grads: Option<&mut Gradients>,
) -> Result<LossParts> {
    let ds = data.dataset;
    let train = data.train;
    let mut drugs = SideCache::new(ds.n_drugs());
    let mut diseases = SideCache::new(ds.n_diseases());
    let eta = params.fusion.eta;

    // forward: encode everything the batch touches
    let mut plans = Vec::with_capacity(batch.len());
    for ex in batch {
        data.check_pair(ex.pair)?;
        let Pair { drug: i, disease: j } = ex.pair;
        let ti = drugs.ensure(i, train.drug_row(i), ds.drug_sim.row(i), &params.drug_ae, noise, 0)?;
        let tj = diseases.ensure(j, train.disease_row(j), ds.disease_sim.row(j), &params.disease_ae, noise, 2)?;
        let neighbors = neighbor_set(&train.neighbors, j, i);
        let mut slots = Vec::with_capacity(neighbors.len());
        for &n in &neighbors {
            slots.push(drugs.ensure(n, train.drug_row(n), ds.drug_sim.row(n), &params.drug_ae, noise, 0)?);
        }
        plans.push((ti, tj, neighbors, slots));
    }

    let mut parts = LossParts::default();
    for (ex, (ti, tj, neighbors, slots)) in batch.iter().zip(&plans) {
        let target = &drugs.latents[*ti];
        let disease = &diseases.latents[*tj];
        let views: Vec<&[f64]> = slots.iter().map(|&s| drugs.latents[s].as_slice()).collect();
        let record = attend(target, &views, neighbors, &params.memory)?;
        let score = sigmoid(fusion_logit(&params.fusion, target, disease, &record.output));
        parts.prediction += bce(ex.label, score);

        let Some(g) = grads.as_deref_mut() else { continue };
        let label = if ex.label { 1.0 } else { 0.0 };
        // d(bce)/d(logit); zero where the clip is active
        let dz = if (CLIP..=1.0 - CLIP).contains(&score) { score - label } else { 0.0 };
        if dz == 0.0 {
            continue;
        }
        let fusion = &params.fusion;
        let mut d_target = vec![0.0; target.len()];
        let mut d_disease = vec![0.0; disease.len()];
        for k in 0..target.len() {
            g.fusion.h[k] += dz * eta * target[k] * disease[k];
            d_target[k] += dz * eta * fusion.h[k] * disease[k];
            d_disease[k] += dz * eta * fusion.h[k] * target[k];
        }
        axpy(dz * (1.0 - eta), &record.output, &mut g.fusion.w);
        g.fusion.b += dz;

        if eta < 1.0 && !neighbors.is_empty() {
            let d_output: Vec<f64> = fusion.w.iter().map(|w| dz * (1.0 - eta) * w).collect();
            let ag = attention_backward(&record, target, &views, &params.memory, &d_output);
            axpy(1.0, &ag.target, &mut d_target);
            for (idx, (&n, &s)) in neighbors.iter().zip(slots).enumerate() {
                axpy(1.0, &ag.neighbors[idx], &mut drugs.d_latents[s]);
                axpy(1.0, &ag.memory_rows[idx], g.memory.rows.row_mut(n));
            }
        }
        axpy(1.0, &d_target, &mut drugs.d_latents[*ti]);
        axpy(1.0, &d_disease, &mut diseases.d_latents[*tj]);
    }

    // reconstruction over the rows the batch targets
    let mut batch_drugs: Vec<usize> = batch.iter().map(|e| e.pair.drug).collect();
    batch_drugs.sort_unstable();
    batch_drugs.dedup();
    let mut batch_diseases: Vec<usize> = batch.iter().map(|e| e.pair.disease).collect();
    batch_diseases.sort_unstable();
    batch_diseases.dedup();

    for &i in &batch_drugs {
        let s = drugs.slot[i];
        let recon = decode(&drugs.latents[s], &params.drug_ae)?;
        let (clean_a, clean_s) = (train.drug_row(i), ds.drug_sim.row(i));
        parts.drug += reconstruction_error(clean_a, clean_s, &recon, config.alpha);
        if let Some(g) = grads.as_deref_mut() {
            let latent = &drugs.latents[s];
            backprop_decoder(latent, &recon, clean_a, clean_s, config.alpha, config.phi, &params.drug_ae, &mut g.drug_ae, &mut drugs.d_latents[s]);
        }
    }
    for &j in &batch_diseases {
        let s = diseases.slot[j];
        let recon = decode(&diseases.latents[s], &params.disease_ae)?;
        let (clean_a, clean_s) = (train.disease_row(j), ds.disease_sim.row(j));
        parts.disease += reconstruction_error(clean_a, clean_s, &recon, config.beta);
        if let Some(g) = grads.as_deref_mut() {
            let latent = &diseases.latents[s];
            backprop_decoder(latent, &recon, clean_a, clean_s, config.beta, config.psi, &params.disease_ae, &mut g.disease_ae, &mut diseases.d_latents[s]);
        }
    }
    parts.drug += config.lambda * params.drug_ae.weight_norm_sq();
    parts.disease += config.delta * params.disease_ae.weight_norm_sq();
    parts.total = parts.prediction + config.phi * parts.drug + config.psi * parts.disease;

    if let Some(g) = grads {
        params.drug_ae.add_weight_decay(&mut g.drug_ae, config.phi * config.lambda);
        params.disease_ae.add_weight_decay(&mut g.disease_ae, config.psi * config.delta);
        for k in 0..drugs.ids.len() {
            backprop_encoder(&drugs.latents[k], &drugs.d_latents[k], &drugs.assoc_in[k], &drugs.sim_in[k], &mut g.drug_ae);
        }
        for k in 0..diseases.ids.len() {
            backprop_encoder(&diseases.latents[k], &diseases.d_latents[k], &diseases.assoc_in[k], &diseases.sim_in[k], &mut g.disease_ae);
        }
    }
    Ok(parts)
}

/// Cross-entropy of the batch.
pub fn prediction_loss(batch: &[Example], params: &ModelParams, data: &ModelData<'_>, noise: Noise) -> Result<f64> {
    // the autoencoder terms do not enter the prediction loss
    let config = TrainConfig { phi: 0.0, psi: 0.0, lambda: 0.0, delta: 0.0, ..TrainConfig::default() };
    Ok(evaluate(batch, params, data, &config, noise, None)?.prediction)
}

/// Every term of the joint objective.
pub fn loss_parts(batch: &[Example], params: &ModelParams, data: &ModelData<'_>, config: &TrainConfig, noise: Noise) -> Result<LossParts> {
    evaluate(batch, params, data, config, noise, None)
}

/// `L_r + phi * L_d + psi * L_p` over the batch.
pub fn total_loss(batch: &[Example], params: &ModelParams, data: &ModelData<'_>, config: &TrainConfig, noise: Noise) -> Result<f64> {
    Ok(loss_parts(batch, params, data, config, noise)?.total)
}

/// Loss terms and the analytic gradient of `total` w.r.t. every tensor.
pub fn compute_gradients(
    batch: &[Example],
    params: &ModelParams,
    data: &ModelData<'_>,
    config: &TrainConfig,
    noise: Noise,
) -> Result<(LossParts, Gradients)> {
    let mut grads = params.zeros_like();
    let parts = evaluate(batch, params, data, config, noise, Some(&mut grads))?;
    Ok((parts, grads))
}
