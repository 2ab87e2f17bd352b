//! Regression model suite: CART trees, random forest with MDI importances,
//! least-squares gradient boosting, and ordinary least squares.

mod boosting;
mod forest;
mod linear;
mod tree;

pub use boosting::{fit_gbt, GradientBoostedModel};
pub use forest::{fit_random_forest, mdi_importance, ForestParams, RandomForestModel};
pub use linear::{fit_linear, LinearModel};
pub use tree::{best_split, fit_tree, Node, RegressionTree, SplitCandidate, TreeParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelsError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid model parameters: {detail}")]
    BadParams { detail: String },
    #[error("row has {got} features but the model was trained on {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// The three model families compared per country.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    RandomForest,
    GradientBoosted,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::Linear,
        ModelKind::RandomForest,
        ModelKind::GradientBoosted,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosted => "gradient_boosted",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any fitted predictor, for dimension-checked prediction and audit dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Linear(LinearModel),
    RandomForest(RandomForestModel),
    GradientBoosted(GradientBoostedModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Linear(_) => ModelKind::Linear,
            Model::RandomForest(_) => ModelKind::RandomForest,
            Model::GradientBoosted(_) => ModelKind::GradientBoosted,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features(),
            Model::RandomForest(m) => m.n_features,
            Model::GradientBoosted(m) => m.n_features,
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64, ModelsError> {
        if row.len() != self.n_features() {
            return Err(ModelsError::DimensionMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(match self {
            Model::Linear(m) => m.predict_row(row),
            Model::RandomForest(m) => m.predict_row(row),
            Model::GradientBoosted(m) => m.predict_row(row),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let model = Model::Linear(fit_linear(&x, &[1.0, 2.0]).unwrap());
        assert!(matches!(
            model.predict(&[1.0]),
            Err(ModelsError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(model.predict(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn boosted_model_with_zero_trees_returns_base_score() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0]]);
        let model = Model::GradientBoosted(
            fit_gbt(&x, &[4.0, 6.0], 0, 0.5, &TreeParams::default(), 0).unwrap(),
        );
        assert_eq!(model.predict(&[9.0]).unwrap(), 5.0);
    }

    #[test]
    fn forest_of_constant_trees_averages_them() {
        use super::tree::Node;
        let make_tree = |v: f64| RegressionTree {
            root: Node::Leaf { value: v, count: 1 },
            n_features: 1,
        };
        let forest = RandomForestModel {
            trees: vec![make_tree(1.0), make_tree(2.0), make_tree(3.0)],
            params: ForestParams::default(),
            n_trees: 3,
            importances: vec![0.0],
            seed: 0,
            n_features: 1,
        };
        assert_eq!(forest.predict_row(&[0.0]), 2.0);
    }

    #[test]
    fn model_dump_round_trips_through_json() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = [0.0, 0.0, 5.0, 5.0];
        let model = Model::RandomForest(
            fit_random_forest(&x, &y, 3, &ForestParams::default(), 9).unwrap(),
        );
        let dump = serde_json::to_string(&model).unwrap();
        let restored: Model = serde_json::from_str(&dump).unwrap();
        assert_eq!(model, restored);
    }
}
