#![allow(dead_code, clippy::needless_range_loop)]

use hamn_core::dataset::{AssociationMatrix, Dataset, SimilarityMatrix};
use hamn_core::numerics::Rng;

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn dataset(assoc: &[Vec<f64>], drug_sim: &[Vec<f64>], disease_sim: &[Vec<f64>]) -> Dataset {
    let (m, n) = (assoc.len(), assoc[0].len());
    Dataset::new(
        AssociationMatrix::new(ids("DR", m), ids("DI", n), assoc).unwrap(),
        SimilarityMatrix::new(ids("DR", m), drug_sim).unwrap(),
        SimilarityMatrix::new(ids("DI", n), disease_sim).unwrap(),
    )
    .unwrap()
}

/// 4 drugs x 3 diseases.
pub fn toy() -> Dataset {
    dataset(
        &[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ],
        &[
            vec![1.0, 0.6, 0.2, 0.7],
            vec![0.6, 1.0, 0.3, 0.5],
            vec![0.2, 0.3, 1.0, 0.1],
            vec![0.7, 0.5, 0.1, 1.0],
        ],
        &[vec![1.0, 0.4, 0.3], vec![0.4, 1.0, 0.8], vec![0.3, 0.8, 1.0]],
    )
}

/// Planted-block dataset: drugs and diseases split into `blocks` groups;
/// a cell inside a diagonal block is a positive with probability
/// `p_in`, elsewhere with `p_out`. Similarities are high within a group.
pub fn planted_blocks(m: usize, n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let drug_block = |i: usize| i * blocks / m;
    let disease_block = |j: usize| j * blocks / n;
    let mut assoc = vec![vec![0.0; n]; m];
    for (i, row) in assoc.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let p = if drug_block(i) == disease_block(j) { p_in } else { p_out };
            if rng.next_f64() < p {
                *v = 1.0;
            }
        }
    }
    let sim = |size: usize, block: &dyn Fn(usize) -> usize, rng: &mut Rng| {
        let mut s = vec![vec![0.0; size]; size];
        for a in 0..size {
            s[a][a] = 1.0;
            for b in a + 1..size {
                let v = if block(a) == block(b) { rng.uniform(0.6, 0.9) } else { rng.uniform(0.0, 0.3) };
                s[a][b] = v;
                s[b][a] = v;
            }
        }
        s
    };
    let ds = sim(m, &drug_block, &mut rng);
    let ps = sim(n, &disease_block, &mut rng);
    dataset(&assoc, &ds, &ps)
}
