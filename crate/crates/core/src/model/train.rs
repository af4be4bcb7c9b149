use alloc::format;
use alloc::vec::Vec;

use super::{compute_gradients, Example, ModelData, ModelParams, Noise, TrainConfig};
use crate::dataset::sample_negatives;
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, Rng};

// stream ids for seed derivation
const STREAM_INIT: u64 = 0;
const STREAM_NEGATIVES: u64 = 1 << 32;
const STREAM_ORDER: u64 = 2 << 32;

/// Result of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub config: TrainConfig,
    /// Mean per-example objective of each epoch.
    pub loss_trace: Vec<f64>,
}

/// Minibatch SGD on the joint objective.
///
/// Each epoch draws fresh negatives (`neg_ratio` per training positive),
/// shuffles `R+ ∪ R-`, and takes one step per minibatch with new corruption
/// masks. The step is the batch-mean gradient scaled by the decayed learning
/// rate. Fully determined by `config.seed`.
pub fn train(data: &ModelData<'_>, config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    let ds = data.dataset;
    let mut params = ModelParams::init(ds.n_drugs(), ds.n_diseases(), config, &mut Rng::derive(config.seed, STREAM_INIT));
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let positives = &data.train.pairs;
    if positives.is_empty() && config.epochs > 0 {
        return Err(Error::Config("no training positives".into()));
    }

    for epoch in 0..config.epochs {
        let negatives = sample_negatives(
            &ds.assoc,
            positives,
            config.neg_ratio,
            derive_seed(config.seed, STREAM_NEGATIVES + epoch as u64),
        )?;
        let mut examples: Vec<Example> = positives
            .iter()
            .map(|p| Example { pair: *p, label: true })
            .chain(negatives.iter().map(|p| Example { pair: *p, label: false }))
            .collect();
        let mut rng = Rng::derive(config.seed, STREAM_ORDER + epoch as u64);
        rng.shuffle(&mut examples);

        let lr = config.learning_rate_at(epoch);
        let mut epoch_loss = 0.0;
        for batch in examples.chunks(config.batch_size) {
            let noise = if config.noise_level > 0.0 {
                Noise::Mask { level: config.noise_level, seed: rng.next_u64() }
            } else {
                Noise::Clean
            };
            let (parts, grads) = compute_gradients(batch, &params, data, config, noise)?;
            if !parts.total.is_finite() {
                return Err(Error::Training { epoch, fold: None, message: format!("loss became {}", parts.total) });
            }
            params.apply_step(&grads, lr / batch.len() as f64);
            epoch_loss += parts.total;
        }
        let mean = epoch_loss / examples.len() as f64;
        if !mean.is_finite() || params.validate().is_err() {
            return Err(Error::Training { epoch, fold: None, message: "parameters diverged".into() });
        }
        log::debug!("epoch {epoch}: lr {lr:.6} loss {mean:.6}");
        loss_trace.push(mean);
    }

    Ok(TrainedModel { params, config: config.clone(), loss_trace })
}
