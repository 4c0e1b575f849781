//! Bagged CART ensembles with per-node feature subsampling.

use rayon::prelude::*;

use super::tree::train_tree_on;
use super::{majority, ClassifierSpec, Matrix, TreeModel};
use crate::error::{Error, Result};
use crate::ingestion::Label;
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    n_features: usize,
    trees: Vec<TreeModel>,
    seeds: Vec<u64>,
}

impl ForestModel {
    pub(crate) fn from_parts(n_features: usize, trees: Vec<TreeModel>, seeds: Vec<u64>) -> Result<Self> {
        if trees.is_empty() || trees.len() != seeds.len() {
            return Err(Error::Model("forest needs one seed per tree".into()));
        }
        if trees.iter().any(|t| t.n_features() != n_features) {
            return Err(Error::Model("forest trees disagree on feature count".into()));
        }
        Ok(Self {
            n_features,
            trees,
            seeds,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    /// Seed each tree's stream was started from.
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut votes = [0usize; 2];
        for t in &self.trees {
            votes[t.predict_row(row).index()] += 1;
        }
        majority(votes[0], votes[1])
    }
}

/// Knobs outside the classifier spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestOptions {
    /// Draw a bootstrap sample per tree; when false every tree sees all rows.
    pub bootstrap: bool,
}

impl Default for ForestOptions {
    fn default() -> Self {
        Self { bootstrap: true }
    }
}

/// `spec.trees` trees, each grown on `n` rows drawn with replacement and
/// considering `floor(sqrt(F))` random features per node. Tree `t` uses
/// the stream `SplitMix64::new(derive_seed(spec.seed, t))` for both its
/// bootstrap draws and its feature subsets, so the ensemble does not depend
/// on how many threads train it.
pub fn train_forest(x: &Matrix, y: &[Label], spec: &ClassifierSpec) -> Result<ForestModel> {
    train_forest_with(x, y, spec, ForestOptions::default())
}

pub fn train_forest_with(
    x: &Matrix,
    y: &[Label],
    spec: &ClassifierSpec,
    options: ForestOptions,
) -> Result<ForestModel> {
    if spec.trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let n = x.rows();
    if n == 0 || n != y.len() {
        return Err(Error::Training(format!(
            "forest needs matching non-empty input ({} rows, {} labels)",
            n,
            y.len()
        )));
    }
    let mtry = ((x.cols() as f64).sqrt().floor() as usize).max(1);
    let seeds: Vec<u64> = (0..spec.trees as u64).map(|t| derive_seed(spec.seed, t)).collect();
    let trees = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = SplitMix64::new(seed);
            let rows: Vec<usize> = if options.bootstrap {
                (0..n).map(|_| rng.below(n as u64) as usize).collect()
            } else {
                (0..n).collect()
            };
            train_tree_on(x, y, &rows, spec, Some(mtry), &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    ForestModel::from_parts(x.cols(), trees, seeds)
}
