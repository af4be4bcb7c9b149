mod common;

use hamn_core::autoencoder::encode;
use hamn_core::dataset::{Pair, TrainingSet};
use hamn_core::model::{
    bce, loss_parts, predict, prediction_loss, total_loss, train, Example, ModelData, ModelParams, Noise, Scorer,
    TrainConfig,
};
use hamn_core::numerics::{sigmoid, Matrix, ParamTensors, Rng};
use hamn_core::Error;

fn small_config() -> TrainConfig {
    TrainConfig { latent_dim: 2, memory_dim: 3, ..TrainConfig::default() }
}

#[test]
fn fused_score_by_hand() {
    // one drug, one disease, d = l = 1: pin the latents through the encoder
    // biases and the neighborhood through a second drug's memory row
    let ds = common::dataset(
        &[vec![1.0], vec![1.0]],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0]],
    );
    let train = TrainingSet::new(&ds.assoc, &[Pair::new(1, 0)]).unwrap();
    let data = ModelData::new(&ds, &train);
    let config = TrainConfig { latent_dim: 1, memory_dim: 1, eta: 0.5, ..TrainConfig::default() };
    let mut p = ModelParams::init(2, 1, &config, &mut Rng::new(0));
    p.drug_ae = hamn_core::autoencoder::AutoencoderParams::zeros(1, 2, 1);
    p.disease_ae = hamn_core::autoencoder::AutoencoderParams::zeros(2, 1, 1);
    p.drug_ae.encode_bias[0] = 0.0; // drug latent = sigmoid(0) = 0.5
    p.disease_ae.encode_bias[0] = (0.4f64 / 0.6).ln(); // disease latent = 0.4
    p.memory.rows = Matrix::from_rows(&[vec![7.0], vec![2.0]]).unwrap();
    p.fusion.h = vec![1.0];
    p.fusion.w = vec![0.25];
    p.fusion.b = 0.0;
    let drug = encode(train.drug_row(0), ds.drug_sim.row(0), &p.drug_ae).unwrap();
    assert_eq!(drug[0], 0.5);
    // neighbors of disease 0 excluding drug 0: only drug 1 -> o = c_1 = [2]
    let r = predict(Pair::new(0, 0), &p, &data).unwrap();
    let expect = sigmoid(0.5 * 0.5 * 0.4 + 0.5 * 0.25 * 2.0);
    assert!((r - expect).abs() < 1e-12);
    assert!((r - 0.5866).abs() < 1e-4, "{r}");
}

#[test]
fn eta_extremes() {
    let ds = common::toy();
    let train = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train);
    let mut rng = Rng::new(9);

    let c1 = TrainConfig { eta: 1.0, ..small_config() };
    let p = ModelParams::init(4, 3, &c1, &mut rng);
    let mut q = p.clone();
    for v in q.memory.rows.as_mut_slice() {
        *v += rng.uniform(-3.0, 3.0);
    }
    let c0 = TrainConfig { eta: 0.0, ..small_config() };
    let mut p0 = ModelParams::init(4, 3, &c0, &mut rng);
    p0.fusion.w = vec![0.7, -0.2, 0.4];
    let mut q0 = p0.clone();
    for v in &mut q0.fusion.h {
        *v += rng.uniform(-3.0, 3.0);
    }
    for i in 0..4 {
        for j in 0..3 {
            let pair = Pair::new(i, j);
            assert_eq!(predict(pair, &p, &data).unwrap(), predict(pair, &q, &data).unwrap());
            assert_eq!(predict(pair, &p0, &data).unwrap(), predict(pair, &q0, &data).unwrap());
        }
    }
}

#[test]
fn empty_neighborhood_with_eta_zero_is_sigmoid_of_bias() {
    // disease 2 has no training positives other than drug 1 itself
    let ds = common::toy();
    let train = TrainingSet::new(&ds.assoc, &[Pair::new(0, 0), Pair::new(1, 2)]).unwrap();
    let data = ModelData::new(&ds, &train);
    let config = TrainConfig { eta: 0.0, ..small_config() };
    let mut p = ModelParams::init(4, 3, &config, &mut Rng::new(2));
    p.fusion.b = 0.3;
    let r = predict(Pair::new(1, 2), &p, &data).unwrap();
    assert_eq!(r, sigmoid(0.3));
    assert!(matches!(predict(Pair::new(4, 0), &p, &data), Err(Error::Index(_))));
}

#[test]
fn scorer_agrees_with_predict() {
    let ds = common::toy();
    let train = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train);
    let mut p = ModelParams::init(4, 3, &small_config(), &mut Rng::new(4));
    for (_, t) in p.tensors_mut() {
        t.iter_mut().for_each(|v| *v *= 20.0);
    }
    let scorer = Scorer::new(&p, data).unwrap();
    let all = scorer.score_all().unwrap();
    for i in 0..4 {
        for j in 0..3 {
            let s = predict(Pair::new(i, j), &p, &data).unwrap();
            assert_eq!(all.get(i, j), s);
            assert!(s > 0.0 && s < 1.0);
        }
    }
}

#[test]
fn loss_examples() {
    assert!(bce(true, 1.0 - 1e-12) < 1e-11);
    assert!((bce(true, 0.5) - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(bce(false, 1.0).is_finite());

    let ds = common::toy();
    let train = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train);
    let config = TrainConfig { phi: 0.7, psi: 0.3, lambda: 0.1, delta: 0.05, alpha: 0.4, beta: 0.6, ..small_config() };
    let mut rng = Rng::new(6);
    let mut p = ModelParams::init(4, 3, &config, &mut rng);
    for (_, t) in p.tensors_mut() {
        t.iter_mut().for_each(|v| *v += rng.uniform(-0.5, 0.5));
    }
    let batch = vec![Example::new(0, 0, true), Example::new(3, 2, false), Example::new(2, 1, true)];
    let noise = Noise::Mask { level: 0.2, seed: 5 };

    // composing the three terms by hand
    let lr = prediction_loss(&batch, &p, &data, noise).unwrap();
    let parts = loss_parts(&batch, &p, &data, &config, noise).unwrap();
    assert_eq!(lr, parts.prediction);
    let total = total_loss(&batch, &p, &data, &config, noise).unwrap();
    assert!((total - (lr + 0.7 * parts.drug + 0.3 * parts.disease)).abs() < 1e-12);
    assert!(parts.drug > 0.0 && parts.disease > 0.0);

    let zero = TrainConfig { phi: 0.0, psi: 0.0, ..config.clone() };
    assert_eq!(total_loss(&batch, &p, &data, &zero, noise).unwrap(), lr);

    let mut reversed = batch.clone();
    reversed.reverse();
    let a = prediction_loss(&batch, &p, &data, Noise::Clean).unwrap();
    let b = prediction_loss(&reversed, &p, &data, Noise::Clean).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn training_is_deterministic_and_descends() {
    let ds = common::toy();
    let train_set = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train_set);
    let config = TrainConfig { epochs: 500, neg_ratio: 1, batch_size: 4, learning_rate: 0.1, ..small_config() };
    let a = train(&data, &config).unwrap();
    let b = train(&data, &config).unwrap();
    assert_eq!(a.loss_trace.len(), 500);
    let bits = |t: &[f64]| t.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.loss_trace), bits(&b.loss_trace));
    assert!(a.loss_trace[499] < a.loss_trace[0], "{:?}", (a.loss_trace[0], a.loss_trace[499]));
}

#[test]
fn zero_epochs_returns_initialization() {
    let ds = common::toy();
    let train_set = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train_set);
    let config = TrainConfig { epochs: 0, ..small_config() };
    let t = train(&data, &config).unwrap();
    assert!(t.loss_trace.is_empty());
    let init = ModelParams::init(4, 3, &config, &mut Rng::derive(config.seed, 0));
    assert_eq!(t.params, init);
}

#[test]
fn divergence_is_reported_with_epoch() {
    let ds = common::toy();
    let train_set = TrainingSet::full(&ds.assoc).unwrap();
    let data = ModelData::new(&ds, &train_set);
    let config = TrainConfig { epochs: 50, neg_ratio: 1, learning_rate: 1e300, ..small_config() };
    match train(&data, &config) {
        Err(Error::Training { epoch, .. }) => assert!(epoch < 50),
        other => panic!("expected a training error, got {other:?}"),
    }
}
