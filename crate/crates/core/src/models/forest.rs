//! Random forest regressor: bagged CART trees with per-node feature
//! subsampling and mean-decrease-in-impurity importances.
//!
//! Tree `t` draws everything (its bootstrap resample and all per-node
//! feature subsets) from a ChaCha8 stream seeded by a stable mix of the
//! master seed and `t`, so fitting is bit-identical no matter how the trees
//! are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_over_rows, RegressionTree, TreeParams};
use super::ModelsError;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub tree: TreeParams,
    /// Resample n rows with replacement per tree. Disabling this is a test
    /// hook that makes a 1-tree forest coincide with a plain tree.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            tree: TreeParams {
                max_depth: None,
                min_samples_leaf: 2,
                mtry: 0,
            },
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<RegressionTree>,
    pub params: ForestParams,
    pub n_trees: usize,
    /// Normalized MDI vector, one weight per training feature.
    pub importances: Vec<f64>,
    pub seed: u64,
    pub n_features: usize,
}

impl RandomForestModel {
    /// Mean of the member predictions: trees summed in index order, one
    /// division at the end.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict_row(row);
        }
        sum / self.trees.len() as f64
    }
}

pub fn fit_random_forest(
    x: &Matrix,
    y: &[f64],
    n_trees: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForestModel, ModelsError> {
    if x.is_empty() {
        return Err(ModelsError::EmptyTrainingSet);
    }
    if n_trees == 0 {
        return Err(ModelsError::BadParams {
            detail: "a forest needs at least one tree".to_string(),
        });
    }
    params.tree.check(x.n_cols())?;

    let n = x.n_rows();
    let trees: Vec<RegressionTree> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng::stream(seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| stream.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_over_rows(x, y, rows, &params.tree, &mut stream)
        })
        .collect();

    let importances = mdi_from_trees(&trees, x.n_cols());
    Ok(RandomForestModel {
        n_trees,
        params: *params,
        importances,
        seed,
        n_features: x.n_cols(),
        trees,
    })
}

/// Mean decrease in impurity: per tree, each split contributes its gain to
/// its feature; per-tree vectors are normalized to sum one (splitless trees
/// contribute zeros); the forest vector is the per-tree mean, renormalized
/// to sum one when nonzero.
pub fn mdi_importance(forest: &RandomForestModel) -> Vec<f64> {
    mdi_from_trees(&forest.trees, forest.n_features)
}

pub(crate) fn mdi_from_trees(trees: &[RegressionTree], n_features: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n_features];
    let mut per_tree = vec![0.0; n_features];
    for tree in trees {
        per_tree.iter_mut().for_each(|v| *v = 0.0);
        tree.accumulate_gains(&mut per_tree);
        let total: f64 = per_tree.iter().sum();
        if total > 0.0 {
            for (a, v) in acc.iter_mut().zip(&per_tree) {
                *a += v / total;
            }
        }
    }
    for a in acc.iter_mut() {
        *a /= trees.len() as f64;
    }
    let total: f64 = acc.iter().sum();
    if total > 0.0 {
        for a in acc.iter_mut() {
            *a /= total;
        }
    }
    acc
}
