//! Parallel evaluation runs. Folds and grid points are independent tasks;
//! results are merged in task order so output does not depend on
//! scheduling.

use std::time::Instant;

use hamn_core::dataset::{Dataset, Pair};
use hamn_core::eval::{cv_splits, evaluate_split, new_drug_eval_split, EvalSplit, FoldMetrics, MetricsReport, Scenario};
use hamn_core::model::{TrainConfig, BALANCE_GRID, MEMORY_DIM_GRID, REGULARIZATION_GRID};
use hamn_core::numerics::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.1;

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

pub fn available_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run_split(
    dataset: &Dataset,
    split: &EvalSplit,
    config: &TrainConfig,
    fold: usize,
    timing: bool,
) -> Result<(FoldMetrics, Option<f64>)> {
    let start = Instant::now();
    let metrics = evaluate_split(dataset, split, config, fold)?;
    log::info!("fold {fold}: AUC {:.4} AUPR {:.4} HR@10 {:.4}", metrics.auc, metrics.aupr, metrics.hr10);
    Ok((metrics, timing.then(|| start.elapsed().as_secs_f64())))
}

/// k-fold cross-validation with up to `jobs` folds in flight.
pub fn cross_validate(
    dataset: &Dataset,
    config: &TrainConfig,
    k: usize,
    seed: u64,
    jobs: usize,
    timing: bool,
) -> Result<MetricsReport> {
    config.validate()?;
    let config = TrainConfig { seed, ..config.clone() };
    let splits = cv_splits(dataset, k, seed)?;
    let results: Vec<(FoldMetrics, Option<f64>)> = pool(jobs)?.install(|| {
        splits
            .par_iter()
            .enumerate()
            .map(|(f, split)| run_split(dataset, split, &config, f, timing))
            .collect::<Result<Vec<_>>>()
    })?;
    let (folds, secs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut report = MetricsReport::new(Scenario::CrossValidation { k }, seed, config, folds, 0);
    report.train_seconds = secs;
    Ok(report)
}

pub fn new_drug(dataset: &Dataset, config: &TrainConfig, seed: u64, timing: bool) -> Result<MetricsReport> {
    config.validate()?;
    let config = TrainConfig { seed, ..config.clone() };
    let split = new_drug_eval_split(dataset)?;
    let n_test = split.test_drugs.as_ref().map_or(0, Vec::len);
    let (fold, secs) = run_split(dataset, &split, &config, 0, timing)?;
    let mut report = MetricsReport::new(Scenario::NewDrug, seed, config, vec![fold], n_test);
    report.train_seconds = vec![secs];
    Ok(report)
}

/// Value lists per searched hyperparameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub memory_dims: Vec<usize>,
    pub etas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            memory_dims: MEMORY_DIM_GRID.to_vec(),
            etas: BALANCE_GRID.to_vec(),
            alphas: BALANCE_GRID.to_vec(),
            betas: BALANCE_GRID.to_vec(),
            lambdas: REGULARIZATION_GRID.to_vec(),
            deltas: REGULARIZATION_GRID.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub memory_dim: usize,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl GridPoint {
    pub fn apply(&self, base: &TrainConfig) -> TrainConfig {
        TrainConfig {
            memory_dim: self.memory_dim,
            eta: self.eta,
            alpha: self.alpha,
            beta: self.beta,
            lambda: self.lambda,
            delta: self.delta,
            ..base.clone()
        }
    }
}

impl GridSpec {
    pub fn size(&self) -> usize {
        self.memory_dims.len()
            * self.etas.len()
            * self.alphas.len()
            * self.betas.len()
            * self.lambdas.len()
            * self.deltas.len()
    }

    /// Cartesian product, last list varying fastest.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.size());
        for &memory_dim in &self.memory_dims {
            for &eta in &self.etas {
                for &alpha in &self.alphas {
                    for &beta in &self.betas {
                        for &lambda in &self.lambdas {
                            for &delta in &self.deltas {
                                out.push(GridPoint { memory_dim, eta, alpha, beta, lambda, delta });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Holds out `fraction` of the known associations (at least one) as the
/// validation positives; the rest are training positives.
pub fn validation_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<EvalSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(hamn_core::Error::Config(format!("validation fraction must lie in (0, 1), got {fraction}")).into());
    }
    let mut pairs: Vec<Pair> = dataset.assoc.positives().to_vec();
    let n_val = ((pairs.len() as f64 * fraction).ceil() as usize).max(1);
    if n_val >= pairs.len() {
        return Err(hamn_core::Error::Config("too few associations for a validation holdout".into()).into());
    }
    Rng::derive(seed, 0x5A11_D000).shuffle(&mut pairs);
    let mut test_positives = pairs[..n_val].to_vec();
    let mut train_pairs = pairs[n_val..].to_vec();
    test_positives.sort();
    train_pairs.sort();
    Ok(EvalSplit { train_pairs, test_positives, test_drugs: None })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeaderboardRow {
    pub index: usize,
    pub point: GridPoint,
    pub metrics: FoldMetrics,
}

/// Trains every grid point on the same validation split and ranks them by
/// validation AUC, ties broken by grid order.
pub fn grid_search(
    dataset: &Dataset,
    base: &TrainConfig,
    grid: &GridSpec,
    fraction: f64,
    seed: u64,
    jobs: usize,
) -> Result<Vec<LeaderboardRow>> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Usage("grid is empty".into()));
    }
    let base = TrainConfig { seed, ..base.clone() };
    for p in &points {
        p.apply(&base).validate()?;
    }
    let split = validation_split(dataset, fraction, seed)?;
    let mut rows: Vec<LeaderboardRow> = pool(jobs)?.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, point)| {
                let metrics = evaluate_split(dataset, &split, &point.apply(&base), 0)?;
                log::info!("grid point {index}: {point:?} -> AUC {:.4}", metrics.auc);
                Ok(LeaderboardRow { index, point: *point, metrics })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| b.metrics.auc.total_cmp(&a.metrics.auc).then(a.index.cmp(&b.index)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_5625_points() {
        let g = GridSpec::default();
        assert_eq!(g.size(), 5625);
        assert_eq!(g.points().len(), 5625);
    }

    #[test]
    fn points_follow_cartesian_order() {
        let g = GridSpec {
            memory_dims: vec![16, 64],
            etas: vec![0.5, 0.7],
            alphas: vec![0.5],
            betas: vec![0.5],
            lambdas: vec![0.01],
            deltas: vec![0.01],
        };
        let pts: Vec<(usize, f64)> = g.points().iter().map(|p| (p.memory_dim, p.eta)).collect();
        assert_eq!(pts, vec![(16, 0.5), (16, 0.7), (64, 0.5), (64, 0.7)]);
    }

    #[test]
    fn empty_list_empties_the_grid() {
        let g = GridSpec { etas: vec![], ..GridSpec::default() };
        assert_eq!(g.size(), 0);
        assert!(g.points().is_empty());
    }
}
