//! Plain-text matrix and identifier files.
//!
//! A matrix file holds one row per line with values separated by spaces or
//! tabs; an ID file holds one identifier per line. LF and CRLF are both
//! accepted and there are no header lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hamn_core::dataset::{AssociationMatrix, Dataset, SimilarityMatrix};

use crate::error::{Error, Result};

/// Orientation of the association file on disk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum AssocLayout {
    /// One row per drug.
    #[default]
    DrugByDisease,
    /// One row per disease; transposed on load.
    DiseaseByDrug,
}

/// Paths of the five files that make up a dataset.
#[derive(Clone, Debug)]
pub struct DatasetPaths {
    pub assoc: PathBuf,
    pub drug_ids: PathBuf,
    pub disease_ids: PathBuf,
    pub drug_sim: PathBuf,
    pub disease_sim: PathBuf,
    pub layout: AssocLayout,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_matrix(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .enumerate()
            .map(|(c, tok)| {
                tok.parse::<f64>()
                    .map_err(|_| format!("line {}, column {}: cannot parse {tok:?} as a number", r + 1, c + 1))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    if let Some(width) = rows.first().map(Vec::len) {
        if let Some(r) = rows.iter().position(|row| row.len() != width) {
            return Err(format!("row {} has {} values, expected {width}", r + 1, rows[r].len()));
        }
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_matrix(&read(path)?).map_err(|message| Error::Parse { path: path.to_path_buf(), message })
}

pub fn read_ids(path: &Path) -> Result<Vec<String>> {
    Ok(read(path)?
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    (0..cols).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
}

fn tag(path: &Path) -> impl Fn(hamn_core::Error) -> Error + '_ {
    move |e| match e {
        hamn_core::Error::DataFormat(message) | hamn_core::Error::Dimension(message) => {
            Error::Parse { path: path.to_path_buf(), message }
        }
        other => Error::Core(other),
    }
}

pub fn load_association_matrix(
    matrix: &Path,
    drug_ids: &Path,
    disease_ids: &Path,
    layout: AssocLayout,
) -> Result<AssociationMatrix> {
    let mut rows = read_matrix(matrix)?;
    if layout == AssocLayout::DiseaseByDrug {
        rows = transpose(&rows);
    }
    AssociationMatrix::new(read_ids(drug_ids)?, read_ids(disease_ids)?, &rows).map_err(tag(matrix))
}

pub fn load_similarity_matrix(matrix: &Path, ids: &Path) -> Result<SimilarityMatrix> {
    SimilarityMatrix::new(read_ids(ids)?, &read_matrix(matrix)?).map_err(tag(matrix))
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let assoc = load_association_matrix(&paths.assoc, &paths.drug_ids, &paths.disease_ids, paths.layout)?;
    let drug_sim = load_similarity_matrix(&paths.drug_sim, &paths.drug_ids)?;
    let disease_sim = load_similarity_matrix(&paths.disease_sim, &paths.disease_ids)?;
    Ok(Dataset::new(assoc, drug_sim, disease_sim)?)
}

/// Canonical text form: shortest round-trip decimal, single spaces, LF.
pub fn format_matrix(rows: &[&[f64]]) -> String {
    let mut out = String::new();
    for row in rows {
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, rows: &[&[f64]]) -> Result<()> {
    fs::write(path, format_matrix(rows)).map_err(|e| Error::io(path, e))
}

pub fn write_ids(path: &Path, ids: &[String]) -> Result<()> {
    let mut text = ids.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `dataset` as five files in `dir` using the default names
/// `assoc.txt`, `drug_ids.txt`, `disease_ids.txt`, `drug_sim.txt` and
/// `disease_sim.txt`.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<DatasetPaths> {
    let paths = DatasetPaths::in_dir(dir);
    let assoc = dataset.assoc.values();
    let rows: Vec<&[f64]> = (0..assoc.rows()).map(|r| assoc.row(r)).collect();
    write_matrix(&paths.assoc, &rows)?;
    write_ids(&paths.drug_ids, dataset.assoc.drug_ids())?;
    write_ids(&paths.disease_ids, dataset.assoc.disease_ids())?;
    let sim = |s: &SimilarityMatrix| (0..s.size()).map(|r| s.row(r).to_vec()).collect::<Vec<_>>();
    let ds = sim(&dataset.drug_sim);
    write_matrix(&paths.drug_sim, &ds.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
    let ps = sim(&dataset.disease_sim);
    write_matrix(&paths.disease_sim, &ps.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
    Ok(paths)
}

impl DatasetPaths {
    pub fn in_dir(dir: &Path) -> Self {
        DatasetPaths {
            assoc: dir.join("assoc.txt"),
            drug_ids: dir.join("drug_ids.txt"),
            disease_ids: dir.join("disease_ids.txt"),
            drug_sim: dir.join("drug_sim.txt"),
            disease_sim: dir.join("disease_sim.txt"),
            layout: AssocLayout::DrugByDisease,
        }
    }
}
