//! Association and similarity matrices, fold plans, the new-drug split,
//! neighbor lookup and negative sampling.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Tolerance for the symmetry and unit-diagonal checks on similarity matrices.
pub const SIMILARITY_TOLERANCE: f64 = 1e-9;

/// A (drug, disease) cell of the association matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub drug: usize,
    pub disease: usize,
}

impl Pair {
    pub const fn new(drug: usize, disease: usize) -> Self {
        Pair { drug, disease }
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (k, id) in ids.iter().enumerate() {
        if !seen.insert(id.as_str()) {
            return Err(Error::DataFormat(format!("duplicate {what} id {id:?} on line {}", k + 1)));
        }
    }
    Ok(())
}

/// Binary drug x disease association matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    drug_ids: Vec<String>,
    disease_ids: Vec<String>,
    values: Matrix,
    positives: Vec<Pair>,
}

impl AssociationMatrix {
    pub fn new(drug_ids: Vec<String>, disease_ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != drug_ids.len() {
            return Err(Error::DataFormat(format!(
                "association matrix has {} rows but {} drug ids",
                rows.len(),
                drug_ids.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != disease_ids.len() {
                return Err(Error::DataFormat(format!(
                    "association row {} has {} columns but there are {} disease ids",
                    i + 1,
                    r.len(),
                    disease_ids.len()
                )));
            }
            if let Some(j) = r.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::DataFormat(format!(
                    "association value {} at row {}, column {} is not 0 or 1",
                    r[j],
                    i + 1,
                    j + 1
                )));
            }
        }
        check_unique(&drug_ids, "drug")?;
        check_unique(&disease_ids, "disease")?;
        let values = Matrix::from_rows(rows)?;
        let values = if rows.is_empty() { Matrix::zeros(0, disease_ids.len()) } else { values };
        let positives: Vec<Pair> = (0..values.rows())
            .flat_map(|i| (0..values.cols()).map(move |j| Pair::new(i, j)))
            .filter(|p| values.get(p.drug, p.disease) == 1.0)
            .collect();
        if positives.is_empty() {
            return Err(Error::DataFormat("association matrix has no positive entries".into()));
        }
        Ok(AssociationMatrix { drug_ids, disease_ids, values, positives })
    }

    pub fn n_drugs(&self) -> usize {
        self.values.rows()
    }

    pub fn n_diseases(&self) -> usize {
        self.values.cols()
    }

    pub fn drug_ids(&self) -> &[String] {
        &self.drug_ids
    }

    pub fn disease_ids(&self) -> &[String] {
        &self.disease_ids
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn is_positive(&self, drug: usize, disease: usize) -> bool {
        self.values.get(drug, disease) == 1.0
    }

    /// Known associations in row-major order.
    pub fn positives(&self) -> &[Pair] {
        &self.positives
    }

    pub fn row_sum(&self, drug: usize) -> usize {
        self.values.row(drug).iter().filter(|&&v| v == 1.0).count()
    }

    /// Fraction of cells that are known associations.
    pub fn density(&self) -> f64 {
        self.positives.len() as f64 / (self.n_drugs() * self.n_diseases()) as f64
    }

    pub fn drug_index(&self, id: &str) -> Option<usize> {
        self.drug_ids.iter().position(|d| d == id)
    }
}

/// Square similarity matrix with entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Matrix,
}

impl SimilarityMatrix {
    pub fn new(ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        if ids.len() != size {
            return Err(Error::DataFormat(format!(
                "similarity matrix has {size} rows but {} ids",
                ids.len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != size {
                return Err(Error::DataFormat(format!(
                    "similarity row {} has {} columns, matrix must be {size}x{size}",
                    i + 1,
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::DataFormat(format!(
                        "similarity value {v} at row {}, column {} is outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for i in 0..size {
            if libm::fabs(rows[i][i] - 1.0) > SIMILARITY_TOLERANCE {
                return Err(Error::DataFormat(format!(
                    "similarity diagonal at row {} is {}, expected 1",
                    i + 1,
                    rows[i][i]
                )));
            }
            for j in i + 1..size {
                if libm::fabs(rows[i][j] - rows[j][i]) > SIMILARITY_TOLERANCE {
                    return Err(Error::DataFormat(format!(
                        "similarity matrix is asymmetric at ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        rows[i][j],
                        rows[j][i]
                    )));
                }
            }
        }
        check_unique(&ids, "similarity")?;
        let values = if size == 0 { Matrix::zeros(0, 0) } else { Matrix::from_rows(rows)? };
        Ok(SimilarityMatrix { ids, values })
    }

    pub fn size(&self) -> usize {
        self.values.rows()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values.get(a, b)
    }

    pub fn row(&self, a: usize) -> &[f64] {
        self.values.row(a)
    }
}

/// The three matrices a model is trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub assoc: AssociationMatrix,
    pub drug_sim: SimilarityMatrix,
    pub disease_sim: SimilarityMatrix,
}

impl Dataset {
    pub fn new(assoc: AssociationMatrix, drug_sim: SimilarityMatrix, disease_sim: SimilarityMatrix) -> Result<Self> {
        if drug_sim.size() != assoc.n_drugs() {
            return Err(Error::DataFormat(format!(
                "drug similarity is {0}x{0} but there are {1} drugs",
                drug_sim.size(),
                assoc.n_drugs()
            )));
        }
        if disease_sim.size() != assoc.n_diseases() {
            return Err(Error::DataFormat(format!(
                "disease similarity is {0}x{0} but there are {1} diseases",
                disease_sim.size(),
                assoc.n_diseases()
            )));
        }
        if drug_sim.ids() != assoc.drug_ids() || disease_sim.ids() != assoc.disease_ids() {
            return Err(Error::DataFormat("similarity ids do not match association ids".into()));
        }
        Ok(Dataset { assoc, drug_sim, disease_sim })
    }

    pub fn n_drugs(&self) -> usize {
        self.assoc.n_drugs()
    }

    pub fn n_diseases(&self) -> usize {
        self.assoc.n_diseases()
    }
}

/// Assignment of every known association to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    pairs: Vec<Pair>,
    assignments: Vec<usize>,
}

/// Shuffles the positives with `seed` and deals them round-robin into `k` folds.
pub fn make_fold_plan(assoc: &AssociationMatrix, k: usize, seed: u64) -> Result<FoldPlan> {
    let positives = assoc.positives();
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    if k > positives.len() {
        return Err(Error::Config(format!(
            "fold count {k} exceeds the {} known associations",
            positives.len()
        )));
    }
    let mut order: Vec<usize> = (0..positives.len()).collect();
    Rng::new(seed).shuffle(&mut order);
    let mut assignments = vec![0; positives.len()];
    for (slot, &p) in order.iter().enumerate() {
        assignments[p] = slot % k;
    }
    Ok(FoldPlan { k, pairs: positives.to_vec(), assignments })
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, pair: Pair) -> Option<usize> {
        self.pairs.binary_search(&pair).ok().map(|i| self.assignments[i])
    }

    /// Positives held out in fold `f`, row-major order.
    pub fn test_pairs(&self, f: usize) -> Vec<Pair> {
        self.select(|a| a == f)
    }

    /// Positives available for training when fold `f` is held out.
    pub fn train_pairs(&self, f: usize) -> Vec<Pair> {
        self.select(|a| a != f)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> Vec<Pair> {
        self.pairs.iter().zip(&self.assignments).filter(|(_, &a)| keep(a)).map(|(p, _)| *p).collect()
    }
}

/// Hold-out of every drug that has exactly one known association.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewDrugSplit {
    pub test_drugs: Vec<usize>,
    pub train_pairs: Vec<Pair>,
    pub test_pairs: Vec<Pair>,
}

pub fn make_new_drug_split(assoc: &AssociationMatrix) -> NewDrugSplit {
    let test_drugs: Vec<usize> = (0..assoc.n_drugs()).filter(|&i| assoc.row_sum(i) == 1).collect();
    let (test_pairs, train_pairs): (Vec<Pair>, Vec<Pair>) =
        assoc.positives().iter().partition(|p| test_drugs.binary_search(&p.drug).is_ok());
    if test_drugs.is_empty() {
        log::warn!("new-drug split is empty: no drug has exactly one known association");
    }
    NewDrugSplit { test_drugs, train_pairs, test_pairs }
}

/// Per-disease list of drugs with a training association.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborIndex {
    by_disease: Vec<Vec<usize>>,
}

impl NeighborIndex {
    pub fn from_pairs(n_diseases: usize, train_pairs: &[Pair]) -> Result<Self> {
        let mut by_disease = vec![Vec::new(); n_diseases];
        for p in train_pairs {
            let list = by_disease.get_mut(p.disease).ok_or_else(|| {
                Error::Index(format!("disease {} out of range for {n_diseases} diseases", p.disease))
            })?;
            list.push(p.drug);
        }
        for list in &mut by_disease {
            list.sort_unstable();
            list.dedup();
        }
        Ok(NeighborIndex { by_disease })
    }

    pub fn n_diseases(&self) -> usize {
        self.by_disease.len()
    }

    /// All drugs associated with `disease` in training, ascending.
    pub fn neighbors(&self, disease: usize) -> &[usize] {
        &self.by_disease[disease]
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.by_disease.get(pair.disease).is_some_and(|l| l.binary_search(&pair.drug).is_ok())
    }
}

/// `N(disease)` without `exclude`, ascending.
pub fn neighbor_set(index: &NeighborIndex, disease: usize, exclude: usize) -> Vec<usize> {
    index.neighbors(disease).iter().copied().filter(|&n| n != exclude).collect()
}

/// Draws `ratio * train_pairs.len()` cells uniformly (with repetition) from
/// the cells with no known association in the full matrix. Fails only when
/// negatives are requested and no such cell exists.
pub fn sample_negatives(assoc: &AssociationMatrix, train_pairs: &[Pair], ratio: usize, seed: u64) -> Result<Vec<Pair>> {
    if ratio < 1 {
        return Err(Error::Config("negative ratio must be at least 1".into()));
    }
    let wanted = ratio * train_pairs.len();
    let cells = assoc.n_drugs() * assoc.n_diseases();
    let zeros = cells - assoc.positives().len();
    if zeros == 0 && wanted > 0 {
        return Err(Error::Sampling(format!("requested {wanted} negatives but every cell is a known association")));
    }
    let mut rng = Rng::new(seed);
    let n = assoc.n_diseases();
    let mut out = Vec::with_capacity(wanted);
    while out.len() < wanted {
        let c = rng.below_usize(cells);
        let p = Pair::new(c / n, c % n);
        if !assoc.is_positive(p.drug, p.disease) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Training-time view of the association data for one split: the masked
/// matrix (held-out positives zeroed), its transpose, the training
/// positives and their neighbor index.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub matrix: Matrix,
    pub matrix_t: Matrix,
    pub pairs: Vec<Pair>,
    pub neighbors: NeighborIndex,
}

impl TrainingSet {
    pub fn new(assoc: &AssociationMatrix, train_pairs: &[Pair]) -> Result<Self> {
        let mut matrix = Matrix::zeros(assoc.n_drugs(), assoc.n_diseases());
        for p in train_pairs {
            if p.drug >= assoc.n_drugs() || p.disease >= assoc.n_diseases() || !assoc.is_positive(p.drug, p.disease) {
                return Err(Error::Index(format!(
                    "training pair ({}, {}) is not a known association",
                    p.drug, p.disease
                )));
            }
            matrix.set(p.drug, p.disease, 1.0);
        }
        let mut pairs = train_pairs.to_vec();
        pairs.sort_unstable();
        pairs.dedup();
        let neighbors = NeighborIndex::from_pairs(assoc.n_diseases(), &pairs)?;
        let matrix_t = matrix.transpose();
        Ok(TrainingSet { matrix, matrix_t, pairs, neighbors })
    }

    /// Every known association is available for training.
    pub fn full(assoc: &AssociationMatrix) -> Result<Self> {
        TrainingSet::new(assoc, assoc.positives())
    }

    pub fn drug_row(&self, drug: usize) -> &[f64] {
        self.matrix.row(drug)
    }

    pub fn disease_row(&self, disease: usize) -> &[f64] {
        self.matrix_t.row(disease)
    }

    /// True when `pair` shows up in the training matrix, pair list or
    /// neighbor index.
    pub fn leaks(&self, pair: Pair) -> bool {
        self.matrix.get(pair.drug, pair.disease) != 0.0
            || self.pairs.binary_search(&pair).is_ok()
            || self.neighbors.contains(pair)
    }
}
