#![allow(clippy::needless_range_loop)]

mod common;

use hamn_core::dataset::{make_fold_plan, sample_negatives, NeighborIndex, Pair};
use hamn_core::eval::{auc, aupr, hit_ratio, ScoredPair};
use hamn_core::neighborhood::{attend, attention_backward, attention_weights, MemoryTable};
use hamn_core::numerics::{finite_diff_check, softmax, Matrix, ParamTensors, Rng};
use proptest::prelude::*;

fn brute_auc(pairs: &[ScoredPair]) -> f64 {
    let pos: Vec<f64> = pairs.iter().filter(|p| p.label).map(|p| p.score).collect();
    let neg: Vec<f64> = pairs.iter().filter(|p| !p.label).map(|p| p.score).collect();
    let mut wins = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn brute_aupr(pairs: &[ScoredPair]) -> f64 {
    let total_pos = pairs.iter().filter(|p| p.label).count() as f64;
    let mut thresholds: Vec<f64> = pairs.iter().map(|p| p.score).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let selected: Vec<&ScoredPair> = pairs.iter().filter(|p| p.score >= t).collect();
        let tp = selected.iter().filter(|p| p.label).count() as f64;
        let recall = tp / total_pos;
        area += (recall - prev_recall) * (tp / selected.len() as f64);
        prev_recall = recall;
    }
    area
}

/// Random scored pairs; with `coarse` the scores take only a few values so
/// ties are common.
fn random_instance(seed: u64, coarse: bool) -> Vec<ScoredPair> {
    let mut rng = Rng::new(seed);
    let len = 2 + rng.below_usize(199);
    let mut out: Vec<ScoredPair> = (0..len)
        .map(|k| {
            let score = if coarse { rng.below_usize(6) as f64 / 5.0 } else { rng.next_f64() };
            ScoredPair::new(k / 7, k % 7, score, rng.next_f64() < 0.3)
        })
        .collect();
    out[0].label = true;
    out[1].label = false;
    out
}

#[test]
fn metrics_match_brute_force_oracles() {
    for seed in 0..100 {
        for coarse in [false, true] {
            let inst = random_instance(seed, coarse);
            assert!((auc(&inst).unwrap() - brute_auc(&inst)).abs() <= 1e-12, "auc seed {seed}");
            assert!((aupr(&inst).unwrap() - brute_aupr(&inst)).abs() <= 1e-12, "aupr seed {seed}");
        }
    }
}

#[test]
fn random_scores_give_base_rate_aupr() {
    // 100 positives among 1000, 1000 seeded shuffles of random scores
    let mut total = 0.0;
    for seed in 0..1000 {
        let mut rng = Rng::new(seed);
        let inst: Vec<ScoredPair> = (0..1000).map(|k| ScoredPair::new(k, 0, rng.next_f64(), k < 100)).collect();
        total += aupr(&inst).unwrap();
    }
    let mean = total / 1000.0;
    println!("mean random aupr {mean}");
    assert!((mean - 0.1).abs() <= 0.02, "{mean}");
}

proptest! {
    #[test]
    fn softmax_properties(v in prop::collection::vec(-50.0f64..50.0, 1..20), shift in -100.0f64..100.0) {
        let s = softmax(&v).unwrap();
        prop_assert!(s.iter().all(|&x| x >= 0.0));
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let argmax = |x: &[f64]| x.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(argmax(&s), argmax(&v));
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let t = softmax(&shifted).unwrap();
        for (a, b) in s.iter().zip(&t) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn attention_output_in_convex_hull(seed in any::<u64>(), k in 1usize..8, d in 1usize..5, l in 1usize..5) {
        let mut rng = Rng::new(seed);
        let memory = MemoryTable::init(10, l, &mut rng);
        let memory = MemoryTable::from_matrix(Matrix::from_vec(10, l, memory.rows.as_slice().iter().map(|v| v * 40.0).collect()).unwrap());
        let target: Vec<f64> = (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let idx: Vec<usize> = (0..k).map(|_| rng.below_usize(10)).collect();
        let latents: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect()).collect();
        let views: Vec<&[f64]> = latents.iter().map(|v| v.as_slice()).collect();
        let rec = attend(&target, &views, &idx, &memory).unwrap();
        prop_assert!((rec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for c in 0..l {
            let lo = idx.iter().map(|&n| memory.row(n)[c]).fold(f64::INFINITY, f64::min);
            let hi = idx.iter().map(|&n| memory.row(n)[c]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(rec.output[c] >= lo - 1e-12 && rec.output[c] <= hi + 1e-12);
        }

        // permuting the neighbors permutes p and q and keeps o
        let mut perm: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut perm);
        let pidx: Vec<usize> = perm.iter().map(|&a| idx[a]).collect();
        let pviews: Vec<&[f64]> = perm.iter().map(|&a| views[a]).collect();
        let prec = attend(&target, &pviews, &pidx, &memory).unwrap();
        for (pos, &a) in perm.iter().enumerate() {
            prop_assert_eq!(prec.preferences[pos], rec.preferences[a]);
            prop_assert!((prec.weights[pos] - rec.weights[a]).abs() < 1e-15);
        }
        for c in 0..l {
            prop_assert!((prec.output[c] - rec.output[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_target_sharpens_attention(seed in any::<u64>(), k in 2usize..8, t in 1.01f64..5.0) {
        let mut rng = Rng::new(seed);
        let memory = MemoryTable::init(k, 2, &mut rng);
        let target: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let latents: Vec<Vec<f64>> = (0..k).map(|_| (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let views: Vec<&[f64]> = latents.iter().map(|v| v.as_slice()).collect();
        let idx: Vec<usize> = (0..k).collect();
        let scaled: Vec<f64> = target.iter().map(|v| v * t).collect();
        let a = attend(&target, &views, &idx, &memory).unwrap();
        let b = attend(&scaled, &views, &idx, &memory).unwrap();
        let argmax = |x: &[f64]| x.iter().enumerate().max_by(|p, q| p.1.total_cmp(q.1)).unwrap().0;
        let top = argmax(&a.preferences);
        prop_assert_eq!(argmax(&a.weights), argmax(&b.weights));
        prop_assert!(b.weights[top] >= a.weights[top] - 1e-15);
    }

    #[test]
    fn metrics_invariant_under_increasing_transform(seed in 0u64..10_000) {
        let inst = random_instance(seed, seed % 2 == 0);
        let mapped: Vec<ScoredPair> = inst.iter().map(|p| ScoredPair { score: (3.0 * p.score).exp() - 7.0, ..*p }).collect();
        prop_assert_eq!(auc(&inst).unwrap(), auc(&mapped).unwrap());
        prop_assert_eq!(aupr(&inst).unwrap(), aupr(&mapped).unwrap());
    }

    #[test]
    fn hit_ratio_monotone_in_cutoff(ranks in prop::collection::vec(1usize..40, 1..30)) {
        let mut prev = 0.0;
        for n in 1..45 {
            let h = hit_ratio(&ranks, n).unwrap();
            prop_assert!(h >= prev);
            prev = h;
        }
        prop_assert_eq!(prev, 1.0);
    }

    #[test]
    fn fold_plan_partitions_positives(seed in any::<u64>(), k in 2usize..8) {
        let ds = common::planted_blocks(12, 9, 3, 0.6, 0.1, seed);
        prop_assume!(ds.assoc.positives().len() >= k);
        let plan = make_fold_plan(&ds.assoc, k, seed).unwrap();
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<Pair> = (0..k).flat_map(|f| plan.test_pairs(f)).collect();
        all.sort();
        prop_assert_eq!(all.as_slice(), ds.assoc.positives());
        for f in 0..k {
            let train = plan.train_pairs(f);
            prop_assert_eq!(train.len() + sizes[f], all.len());
            let index = NeighborIndex::from_pairs(9, &train).unwrap();
            for p in plan.test_pairs(f) {
                prop_assert!(!index.contains(p));
                prop_assert_eq!(plan.fold_of(p), Some(f));
            }
            for j in 0..9 {
                for &n in index.neighbors(j) {
                    prop_assert!(train.contains(&Pair::new(n, j)));
                }
            }
        }
    }

    #[test]
    fn negatives_avoid_known_associations(seed in any::<u64>(), ratio in 1usize..6) {
        let ds = common::planted_blocks(12, 9, 3, 0.6, 0.1, seed);
        let negs = sample_negatives(&ds.assoc, ds.assoc.positives(), ratio, seed).unwrap();
        prop_assert_eq!(negs.len(), ratio * ds.assoc.positives().len());
        prop_assert!(negs.iter().all(|p| !ds.assoc.is_positive(p.drug, p.disease)));
    }
}

#[test]
fn attention_weights_of_empty_is_empty() {
    assert!(attention_weights(&[]).is_empty());
}

/// Inputs of the attention read flattened into tensors for the checker.
#[derive(Clone)]
struct AttentionInputs {
    target: Vec<f64>,
    neighbors: Vec<f64>,
    memory: Vec<f64>,
}

impl ParamTensors for AttentionInputs {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![("target", &self.target), ("neighbors", &self.neighbors), ("memory", &self.memory)]
    }
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![("target", &mut self.target), ("neighbors", &mut self.neighbors), ("memory", &mut self.memory)]
    }
}

#[test]
fn attention_gradients_match_finite_differences() {
    let (k, d, l, m) = (4, 3, 5, 6);
    let idx = [4usize, 1, 5, 2];
    for seed in 0..10 {
        let mut rng = Rng::new(seed);
        let x = AttentionInputs {
            target: (0..d).map(|_| rng.uniform(-1.5, 1.5)).collect(),
            neighbors: (0..k * d).map(|_| rng.uniform(-1.5, 1.5)).collect(),
            memory: (0..m * l).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        };
        let weights: Vec<f64> = (0..l).map(|_| rng.uniform(-1.0, 1.0)).collect();
        // scalar of o: tanh(w · o)
        let forward = |x: &AttentionInputs| {
            let mem = MemoryTable::from_matrix(Matrix::from_vec(m, l, x.memory.clone()).unwrap());
            let views: Vec<&[f64]> = x.neighbors.chunks(d).collect();
            let rec = attend(&x.target, &views, &idx, &mem).unwrap();
            (rec, mem)
        };
        let loss = |x: &AttentionInputs| {
            let (rec, _) = forward(x);
            rec.output.iter().zip(&weights).map(|(o, w)| o * w).sum::<f64>().tanh()
        };
        let (rec, mem) = forward(&x);
        let s: f64 = rec.output.iter().zip(&weights).map(|(o, w)| o * w).sum();
        let scale = 1.0 - s.tanh().powi(2);
        let d_out: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let views: Vec<&[f64]> = x.neighbors.chunks(d).collect();
        let g = attention_backward(&rec, &x.target, &views, &mem, &d_out);
        let mut grad = AttentionInputs { target: g.target.clone(), neighbors: g.neighbors.concat(), memory: vec![0.0; m * l] };
        for (pos, &n) in idx.iter().enumerate() {
            for c in 0..l {
                grad.memory[n * l + c] += g.memory_rows[pos][c];
            }
        }
        let report = finite_diff_check(loss, &x, &grad, 1e-5, 200, seed).unwrap();
        assert!(report.max_rel_error <= 1e-4, "seed {seed}: {report:?}");
    }
}
