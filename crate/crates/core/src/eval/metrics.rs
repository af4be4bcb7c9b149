//! Ranking metrics: ROC AUC by rank sum, average-precision AUPR and hit
//! ratio at a cutoff.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dataset::Pair;
use crate::error::{Error, Result};

/// A model score with its ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub pair: Pair,
    pub score: f64,
    pub label: bool,
}

impl ScoredPair {
    pub fn new(drug: usize, disease: usize, score: f64, label: bool) -> Self {
        ScoredPair { pair: Pair::new(drug, disease), score, label }
    }
}

fn check_finite(pairs: &[ScoredPair]) -> Result<()> {
    if pairs.iter().any(|p| !p.score.is_finite()) {
        return Err(Error::Metric("scores must be finite".into()));
    }
    Ok(())
}

/// Descending score, then drug index, then disease index.
fn ranking_order(a: &ScoredPair, b: &ScoredPair) -> Ordering {
    b.score.total_cmp(&a.score).then(a.pair.cmp(&b.pair))
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Mann-Whitney rank sum with mid-ranks for ties.
pub fn auc(pairs: &[ScoredPair]) -> Result<f64> {
    check_finite(pairs)?;
    let n_pos = pairs.iter().filter(|p| p.label).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric("AUC needs at least one positive and one negative".into()));
    }
    let mut sorted: Vec<&ScoredPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));

    // ranks are 1-based; a tie group spanning ranks lo..=hi gets (lo + hi) / 2
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start;
        while end + 1 < sorted.len() && sorted[end + 1].score == sorted[start].score {
            end += 1;
        }
        let mid_rank = (start + end + 2) as f64 / 2.0;
        let group_pos = sorted[start..=end].iter().filter(|p| p.label).count();
        pos_rank_sum += mid_rank * group_pos as f64;
        start = end + 1;
    }
    let p = n_pos as f64;
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

/// Area under the precision-recall curve as average precision,
/// `Σ (R_k - R_{k-1}) · P_k`, with one step per distinct score threshold so
/// tied scores enter the curve together.
pub fn aupr(pairs: &[ScoredPair]) -> Result<f64> {
    check_finite(pairs)?;
    let n_pos = pairs.iter().filter(|p| p.label).count();
    if n_pos == 0 {
        return Err(Error::Metric("AUPR needs at least one positive".into()));
    }
    let mut sorted: Vec<&ScoredPair> = pairs.iter().collect();
    sorted.sort_by(|a, b| ranking_order(a, b));

    let mut area = 0.0;
    let mut tp = 0usize;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start;
        while end + 1 < sorted.len() && sorted[end + 1].score == sorted[start].score {
            end += 1;
        }
        let group_pos = sorted[start..=end].iter().filter(|p| p.label).count();
        if group_pos > 0 {
            tp += group_pos;
            let precision = tp as f64 / (end + 1) as f64;
            area += group_pos as f64 / n_pos as f64 * precision;
        }
        start = end + 1;
    }
    Ok(area)
}

/// Fraction of ranks within the top `n`.
pub fn hit_ratio(ranks: &[usize], n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Config("hit ratio cutoff must be at least 1".into()));
    }
    if ranks.is_empty() {
        return Err(Error::Metric("hit ratio of an empty rank list".into()));
    }
    if ranks.contains(&0) {
        return Err(Error::Metric("ranks are 1-based".into()));
    }
    Ok(ranks.iter().filter(|&&r| r <= n).count() as f64 / ranks.len() as f64)
}

/// 1-based rank of `target` among `(disease, score)` candidates. Higher
/// scores rank first; equal scores are ordered by disease index. The
/// target itself may or may not be in `candidates`.
pub fn rank_of(target_disease: usize, target_score: f64, candidates: impl IntoIterator<Item = (usize, f64)>) -> usize {
    1 + candidates
        .into_iter()
        .filter(|&(j, s)| j != target_disease && (s > target_score || (s == target_score && j < target_disease)))
        .count()
}
