//! Least-squares gradient boosting: each round fits a CART tree to the
//! current residuals and the ensemble advances by a shrunken step.

use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_over_rows, RegressionTree, TreeParams};
use super::ModelsError;
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostedModel {
    /// Training target mean, the round-zero prediction.
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
    pub learning_rate: f64,
    pub rounds: usize,
    pub n_features: usize,
}

impl GradientBoostedModel {
    /// `base_score + learning_rate * (sum of tree predictions)`, trees
    /// summed in index order with a single multiply at the end.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict_row(row);
        }
        self.base_score + self.learning_rate * sum
    }
}

pub fn fit_gbt(
    x: &Matrix,
    y: &[f64],
    rounds: usize,
    learning_rate: f64,
    tree_params: &TreeParams,
    seed: u64,
) -> Result<GradientBoostedModel, ModelsError> {
    if x.is_empty() {
        return Err(ModelsError::EmptyTrainingSet);
    }
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(ModelsError::BadParams {
            detail: format!("learning_rate must lie in (0, 1], got {learning_rate}"),
        });
    }
    tree_params.check(x.n_cols())?;

    let n = x.n_rows();
    let mut sum = 0.0;
    for &t in y {
        sum += t;
    }
    let base_score = sum / n as f64;

    let mut current: Vec<f64> = vec![base_score; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(rounds);
    for round in 0..rounds {
        for i in 0..n {
            residuals[i] = y[i] - current[i];
        }
        let mut stream = rng::stream(seed, round as u64);
        let tree = fit_tree_over_rows(x, &residuals, (0..n).collect(), tree_params, &mut stream);
        for i in 0..n {
            current[i] += learning_rate * tree.predict_row(x.row(i));
        }
        trees.push(tree);
    }

    Ok(GradientBoostedModel {
        base_score,
        trees,
        learning_rate,
        rounds,
        n_features: x.n_cols(),
    })
}
