//! Metrics and evaluation protocols.

mod harness;
mod metrics;

pub use harness::{
    cross_validate, cv_splits, evaluate_new_drug, evaluate_scores, evaluate_split, fold_seed, new_drug_eval_split,
    similarity_baseline_scores, EvalSplit, FoldMetrics, MetricsReport, Scenario, HR_CUTOFFS,
};
pub use metrics::{auc, aupr, hit_ratio, rank_of, ScoredPair};
