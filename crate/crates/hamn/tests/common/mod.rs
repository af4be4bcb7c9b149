#![allow(dead_code, clippy::needless_range_loop)]

use std::path::Path;
use std::process::{Command, Output};

use hamn::hamn_core::dataset::{AssociationMatrix, Dataset, SimilarityMatrix};
use hamn::hamn_core::numerics::Rng;
use hamn::io::{write_dataset, DatasetPaths};

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

/// Diagonal-block associations with block-structured similarities.
pub fn planted(m: usize, n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let drug_block = |i: usize| i * blocks / m;
    let disease_block = |j: usize| j * blocks / n;
    let assoc: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let p = if drug_block(i) == disease_block(j) { p_in } else { p_out };
                    if rng.next_f64() < p {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut sim = |size: usize, block: &dyn Fn(usize) -> usize| {
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
    let ds = sim(m, &drug_block);
    let ps = sim(n, &disease_block);
    Dataset::new(
        AssociationMatrix::new(ids("DR", m), ids("DI", n), &assoc).unwrap(),
        SimilarityMatrix::new(ids("DR", m), &ds).unwrap(),
        SimilarityMatrix::new(ids("DI", n), &ps).unwrap(),
    )
    .unwrap()
}

pub fn write(dir: &Path, dataset: &Dataset) -> DatasetPaths {
    write_dataset(dir, dataset).unwrap()
}

pub fn data_flags(p: &DatasetPaths) -> Vec<String> {
    vec![
        "--assoc".into(),
        p.assoc.display().to_string(),
        "--drug-ids".into(),
        p.drug_ids.display().to_string(),
        "--disease-ids".into(),
        p.disease_ids.display().to_string(),
        "--drug-sim".into(),
        p.drug_sim.display().to_string(),
        "--disease-sim".into(),
        p.disease_sim.display().to_string(),
    ]
}

/// Small model settings so CLI runs finish quickly.
pub fn quick_flags() -> Vec<String> {
    ["--latent-dim", "4", "--memory-dim", "4", "--epochs", "3", "--batch-size", "16"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn hamn(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamn")).args(args).output().unwrap()
}

pub fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

/// 4 drugs x 3 diseases.
pub fn toy() -> Dataset {
    let assoc = vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]];
    let ds = vec![
        vec![1.0, 0.6, 0.2, 0.7],
        vec![0.6, 1.0, 0.3, 0.5],
        vec![0.2, 0.3, 1.0, 0.1],
        vec![0.7, 0.5, 0.1, 1.0],
    ];
    let ps = vec![vec![1.0, 0.4, 0.3], vec![0.4, 1.0, 0.8], vec![0.3, 0.8, 1.0]];
    Dataset::new(
        AssociationMatrix::new(ids("DR", 4), ids("DI", 3), &assoc).unwrap(),
        SimilarityMatrix::new(ids("DR", 4), &ds).unwrap(),
        SimilarityMatrix::new(ids("DI", 3), &ps).unwrap(),
    )
    .unwrap()
}
