//! k-fold cross-validation and the new-drug hold-out.
//!
//! In both protocols the test set is the held-out positives (label 1) plus
//! the unknown cells (label 0): every cell with no known association for
//! cross-validation, and the unknown cells of the held-out drugs for the
//! new-drug protocol. Hit ratio ranks each held-out positive against the
//! unknown diseases of its drug.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::metrics::{auc, aupr, hit_ratio, rank_of, ScoredPair};
use crate::dataset::{make_fold_plan, make_new_drug_split, Dataset, Pair, TrainingSet};
use crate::error::{Error, Result};
use crate::model::{train, ModelData, Scorer, TrainConfig};
use crate::numerics::{derive_seed, Matrix};

/// Cutoffs reported for hit ratio.
pub const HR_CUTOFFS: [usize; 3] = [1, 5, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    CrossValidation { k: usize },
    NewDrug,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::CrossValidation { .. } => "cv",
            Scenario::NewDrug => "new-drug",
        }
    }
}

/// Train/test partition of the known associations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSplit {
    pub train_pairs: Vec<Pair>,
    pub test_positives: Vec<Pair>,
    /// When set, negatives and rankings are restricted to these drugs.
    pub test_drugs: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FoldMetrics {
    pub fold: usize,
    pub auc: f64,
    pub aupr: f64,
    pub hr1: f64,
    pub hr5: f64,
    pub hr10: f64,
    pub test_positives: usize,
    pub test_negatives: usize,
}

/// Per-fold and mean metrics of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub config: TrainConfig,
    pub folds: Vec<FoldMetrics>,
    /// Training wall time per fold, when the caller measured it.
    pub train_seconds: Vec<Option<f64>>,
    /// Held-out drugs (new-drug protocol only).
    pub test_drugs: usize,
}

impl MetricsReport {
    pub fn new(scenario: Scenario, seed: u64, config: TrainConfig, folds: Vec<FoldMetrics>, test_drugs: usize) -> Self {
        let train_seconds = alloc::vec![None; folds.len()];
        MetricsReport { scenario, seed, config, folds, train_seconds, test_drugs }
    }

    /// Unweighted mean over folds.
    pub fn mean(&self) -> FoldMetrics {
        let k = self.folds.len().max(1) as f64;
        let mut m = FoldMetrics::default();
        for f in &self.folds {
            m.auc += f.auc / k;
            m.aupr += f.aupr / k;
            m.hr1 += f.hr1 / k;
            m.hr5 += f.hr5 / k;
            m.hr10 += f.hr10 / k;
            m.test_positives += f.test_positives;
            m.test_negatives += f.test_negatives;
        }
        m
    }

    pub fn summary(&self) -> String {
        let m = self.mean();
        format!(
            "{} over {} fold(s): AUC {:.4}  AUPR {:.4}  HR@1 {:.4}  HR@5 {:.4}  HR@10 {:.4}",
            self.scenario.label(),
            self.folds.len(),
            m.auc,
            m.aupr,
            m.hr1,
            m.hr5,
            m.hr10
        )
    }
}

/// Training seed used for fold `fold` of a run seeded with `seed`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, 0xF01D_0000 + fold as u64)
}

/// One split per fold of a seeded `k`-fold plan over the positives.
pub fn cv_splits(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<EvalSplit>> {
    let plan = make_fold_plan(&dataset.assoc, k, seed)?;
    Ok((0..k)
        .map(|f| EvalSplit { train_pairs: plan.train_pairs(f), test_positives: plan.test_pairs(f), test_drugs: None })
        .collect())
}

/// Drugs with a single known association are held out with that association.
pub fn new_drug_eval_split(dataset: &Dataset) -> Result<EvalSplit> {
    let split = make_new_drug_split(&dataset.assoc);
    if split.test_drugs.is_empty() {
        return Err(Error::Config("new-drug split is empty: no drug has exactly one association".into()));
    }
    Ok(EvalSplit { train_pairs: split.train_pairs, test_positives: split.test_pairs, test_drugs: Some(split.test_drugs) })
}

fn check_no_leakage(train: &TrainingSet, split: &EvalSplit) -> Result<()> {
    if let Some(p) = split.test_positives.iter().find(|p| train.leaks(**p)) {
        return Err(Error::Config(format!(
            "held-out pair ({}, {}) is visible to training",
            p.drug, p.disease
        )));
    }
    if let Some(drugs) = &split.test_drugs {
        if let Some(&i) = drugs.iter().find(|&&i| train.drug_row(i).iter().any(|&v| v != 0.0)) {
            return Err(Error::Config(format!("held-out drug {i} has training associations")));
        }
    }
    Ok(())
}

/// Metrics of a full score matrix on a split.
pub fn evaluate_scores(dataset: &Dataset, split: &EvalSplit, scores: &Matrix, fold: usize) -> Result<FoldMetrics> {
    let assoc = &dataset.assoc;
    let drugs: Vec<usize> = match &split.test_drugs {
        Some(d) => d.clone(),
        None => (0..assoc.n_drugs()).collect(),
    };
    let mut scored: Vec<ScoredPair> = split
        .test_positives
        .iter()
        .map(|p| ScoredPair { pair: *p, score: scores.get(p.drug, p.disease), label: true })
        .collect();
    let n_pos = scored.len();
    for &i in &drugs {
        for j in 0..assoc.n_diseases() {
            if !assoc.is_positive(i, j) {
                scored.push(ScoredPair::new(i, j, scores.get(i, j), false));
            }
        }
    }
    let n_neg = scored.len() - n_pos;

    let ranks: Vec<usize> = split
        .test_positives
        .iter()
        .map(|p| {
            let row = scores.row(p.drug);
            let candidates = (0..assoc.n_diseases()).filter(|&j| !assoc.is_positive(p.drug, j)).map(|j| (j, row[j]));
            rank_of(p.disease, row[p.disease], candidates)
        })
        .collect();

    Ok(FoldMetrics {
        fold,
        auc: auc(&scored)?,
        aupr: aupr(&scored)?,
        hr1: hit_ratio(&ranks, HR_CUTOFFS[0])?,
        hr5: hit_ratio(&ranks, HR_CUTOFFS[1])?,
        hr10: hit_ratio(&ranks, HR_CUTOFFS[2])?,
        test_positives: n_pos,
        test_negatives: n_neg,
    })
}

/// Trains on `split.train_pairs` and scores the held-out cells. The
/// training seed is derived from `config.seed` and `fold`.
pub fn evaluate_split(dataset: &Dataset, split: &EvalSplit, config: &TrainConfig, fold: usize) -> Result<FoldMetrics> {
    let train_set = TrainingSet::new(&dataset.assoc, &split.train_pairs)?;
    check_no_leakage(&train_set, split)?;
    let data = ModelData::new(dataset, &train_set);
    let fold_config = TrainConfig { seed: fold_seed(config.seed, fold), ..config.clone() };
    let model = train(&data, &fold_config).map_err(|e| e.in_fold(fold))?;
    let scores = Scorer::new(&model.params, data)?.score_all()?;
    evaluate_scores(dataset, split, &scores, fold)
}

/// Sequential k-fold cross-validation over the known associations.
pub fn cross_validate(dataset: &Dataset, config: &TrainConfig, k: usize, seed: u64) -> Result<MetricsReport> {
    config.validate()?;
    let config = TrainConfig { seed, ..config.clone() };
    let folds = cv_splits(dataset, k, seed)?
        .iter()
        .enumerate()
        .map(|(f, split)| evaluate_split(dataset, split, &config, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport::new(Scenario::CrossValidation { k }, seed, config, folds, 0))
}

/// Cold-start protocol: single-association drugs are held out entirely.
pub fn evaluate_new_drug(dataset: &Dataset, config: &TrainConfig, seed: u64) -> Result<MetricsReport> {
    config.validate()?;
    let config = TrainConfig { seed, ..config.clone() };
    let split = new_drug_eval_split(dataset)?;
    let n_test = split.test_drugs.as_ref().map_or(0, |d| d.len());
    let fold = evaluate_split(dataset, &split, &config, 0)?;
    Ok(MetricsReport::new(Scenario::NewDrug, seed, config, alloc::vec![fold], n_test))
}

/// Similarity-only neighbor baseline: the score of `(i, j)` is the largest
/// drug similarity between `i` and a training drug of `j` other than `i`.
pub fn similarity_baseline_scores(dataset: &Dataset, train: &TrainingSet) -> Matrix {
    let (m, n) = (dataset.n_drugs(), dataset.n_diseases());
    let mut out = Matrix::zeros(m, n);
    for j in 0..n {
        let neighbors = train.neighbors.neighbors(j);
        for i in 0..m {
            let best = neighbors
                .iter()
                .filter(|&&k| k != i)
                .map(|&k| dataset.drug_sim.get(i, k))
                .fold(0.0, f64::max);
            out.set(i, j, best);
        }
    }
    out
}
