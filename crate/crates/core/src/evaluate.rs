//! Fit the model suite per country, score by mean absolute error, select the
//! best, and aggregate across countries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::categorize::{FamineCategory, ImportanceSpread};
use crate::ingest::CountryCode;
use crate::models::{
    fit_gbt, fit_linear, fit_random_forest, ForestParams, ModelKind, ModelsError,
    TreeParams,
};
use crate::prepare::{DroppedFeature, PreparedCountry};
use crate::rng;

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("prediction and actual vectors differ in length ({predicted} vs {actual})")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("cannot compute an error over zero values")]
    EmptyInput,
    #[error("no countries were evaluated")]
    NoEvaluations,
    #[error("model fitting failed for {country}: {source}")]
    Model {
        country: CountryCode,
        source: ModelsError,
    },
}

/// Mean of |predicted - actual|.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64, EvaluateError> {
    if predicted.len() != actual.len() {
        return Err(EvaluateError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(EvaluateError::EmptyInput);
    }
    let mut sum = 0.0;
    for (p, a) in predicted.iter().zip(actual) {
        sum += (p - a).abs();
    }
    Ok(sum / predicted.len() as f64)
}

/// Hyperparameters for the per-country model suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub forest_trees: usize,
    /// Candidate features per forest node; `None` means `max(1, p/3)`.
    pub forest_mtry: Option<usize>,
    pub forest_min_samples_leaf: usize,
    pub forest_max_depth: Option<usize>,
    pub boosting_rounds: usize,
    pub learning_rate: f64,
    pub boosting_max_depth: Option<usize>,
    pub boosting_min_samples_leaf: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            forest_trees: 300,
            forest_mtry: None,
            forest_min_samples_leaf: 2,
            forest_max_depth: None,
            boosting_rounds: 300,
            learning_rate: 0.1,
            boosting_max_depth: Some(4),
            boosting_min_samples_leaf: 1,
        }
    }
}

impl ModelConfig {
    pub fn forest_params(&self, n_features: usize) -> ForestParams {
        let mtry = match self.forest_mtry {
            Some(k) => k.min(n_features),
            None => (n_features / 3).max(1),
        };
        ForestParams {
            tree: TreeParams {
                max_depth: self.forest_max_depth,
                min_samples_leaf: self.forest_min_samples_leaf,
                mtry,
            },
            bootstrap: true,
        }
    }

    pub fn boosting_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.boosting_max_depth,
            min_samples_leaf: self.boosting_min_samples_leaf,
            mtry: 0,
        }
    }
}

/// One country's scored models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryEvaluation {
    pub country: CountryCode,
    pub n_train: usize,
    pub n_test: usize,
    pub mae_per_model: BTreeMap<ModelKind, f64>,
    pub best_model: ModelKind,
    /// (actual, predicted) on the test rows, for the best model.
    pub test_predictions: Vec<(f64, f64)>,
    /// (actual, predicted) on the test rows, for the random forest.
    pub rf_test_predictions: Vec<(f64, f64)>,
    /// Random-forest MDI weight per selected feature, selection order.
    pub importances: Vec<(String, f64)>,
    pub selected_features: Vec<String>,
    pub dropped_features: Vec<DroppedFeature>,
    pub linear_conditioning_warning: bool,
}

/// Fit Linear, RandomForest and GradientBoosted on the training matrix,
/// score each on the held-out rows, and pick the argmin MAE. Ties resolve
/// RandomForest, then GradientBoosted, then Linear.
pub fn evaluate_country(
    prepared: &PreparedCountry,
    config: &ModelConfig,
    seed: u64,
) -> Result<CountryEvaluation, EvaluateError> {
    let country = prepared.country.clone();
    let wrap = |source: ModelsError| EvaluateError::Model {
        country: country.clone(),
        source,
    };

    let x = &prepared.train_matrix;
    let y = &prepared.train_targets;
    let p = x.n_cols();
    let country_seed = rng::labelled_seed(seed, country.as_str());

    let linear = fit_linear(x, y).map_err(wrap)?;
    let forest = fit_random_forest(
        x,
        y,
        config.forest_trees,
        &config.forest_params(p),
        rng::mix(country_seed, FOREST_STREAM),
    )
    .map_err(wrap)?;
    let boosted = fit_gbt(
        x,
        y,
        config.boosting_rounds,
        config.learning_rate,
        &config.boosting_params(),
        rng::mix(country_seed, BOOSTING_STREAM),
    )
    .map_err(wrap)?;

    let predict_all = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
        prepared.test_matrix.rows().map(f).collect()
    };
    let linear_preds = predict_all(&|row| linear.predict_row(row));
    let forest_preds = predict_all(&|row| forest.predict_row(row));
    let boosted_preds = predict_all(&|row| boosted.predict_row(row));

    let mut mae_per_model = BTreeMap::new();
    mae_per_model.insert(ModelKind::Linear, mae(&linear_preds, &prepared.test_targets)?);
    mae_per_model.insert(
        ModelKind::RandomForest,
        mae(&forest_preds, &prepared.test_targets)?,
    );
    mae_per_model.insert(
        ModelKind::GradientBoosted,
        mae(&boosted_preds, &prepared.test_targets)?,
    );

    // Scan in tie-break order; only a strictly lower error displaces.
    let mut best_model = ModelKind::RandomForest;
    for kind in [ModelKind::GradientBoosted, ModelKind::Linear] {
        if mae_per_model[&kind] < mae_per_model[&best_model] {
            best_model = kind;
        }
    }

    let pair = |preds: &[f64]| -> Vec<(f64, f64)> {
        prepared
            .test_targets
            .iter()
            .zip(preds)
            .map(|(&a, &p)| (a, p))
            .collect()
    };
    let best_preds = match best_model {
        ModelKind::Linear => &linear_preds,
        ModelKind::RandomForest => &forest_preds,
        ModelKind::GradientBoosted => &boosted_preds,
    };

    Ok(CountryEvaluation {
        n_train: prepared.n_train(),
        n_test: prepared.n_test(),
        best_model,
        test_predictions: pair(best_preds),
        rf_test_predictions: pair(&forest_preds),
        importances: prepared
            .selected_features
            .iter()
            .cloned()
            .zip(forest.importances.iter().copied())
            .collect(),
        selected_features: prepared.selected_features.clone(),
        dropped_features: prepared.dropped_features.clone(),
        linear_conditioning_warning: linear.conditioning_warning,
        mae_per_model,
        country,
    })
}

const FOREST_STREAM: u64 = 2;
const BOOSTING_STREAM: u64 = 3;

/// Cross-country aggregate: the material behind the global report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalReport {
    pub evaluations: Vec<CountryEvaluation>,
    pub skipped: Vec<(CountryCode, String)>,
    /// Headline figure: mean random-forest MAE over evaluated countries.
    pub average_rf_mae: f64,
    pub average_mae_per_model: BTreeMap<ModelKind, f64>,
    /// Per-country (rf_mae, gbt_mae) pairs, evaluation order.
    pub comparison_points: Vec<(CountryCode, f64, f64)>,
    /// Filled by the categorize stage.
    pub category_assignments: BTreeMap<CountryCode, FamineCategory>,
    /// Filled by the categorize stage.
    pub importance_spread: ImportanceSpread,
}

/// Fold evaluations into the aggregate. Evaluations are sorted by country
/// code so the fold order never depends on scheduling.
pub fn aggregate(
    mut evaluations: Vec<CountryEvaluation>,
    mut skipped: Vec<(CountryCode, String)>,
) -> Result<GlobalReport, EvaluateError> {
    if evaluations.is_empty() {
        return Err(EvaluateError::NoEvaluations);
    }
    evaluations.sort_by(|a, b| a.country.cmp(&b.country));
    skipped.sort_by(|a, b| a.0.cmp(&b.0));

    let n = evaluations.len() as f64;
    let mut average_mae_per_model = BTreeMap::new();
    for kind in ModelKind::ALL {
        let mut sum = 0.0;
        for e in &evaluations {
            sum += e.mae_per_model[&kind];
        }
        average_mae_per_model.insert(kind, sum / n);
    }

    let comparison_points = evaluations
        .iter()
        .map(|e| {
            (
                e.country.clone(),
                e.mae_per_model[&ModelKind::RandomForest],
                e.mae_per_model[&ModelKind::GradientBoosted],
            )
        })
        .collect();

    Ok(GlobalReport {
        average_rf_mae: average_mae_per_model[&ModelKind::RandomForest],
        average_mae_per_model,
        comparison_points,
        evaluations,
        skipped,
        category_assignments: BTreeMap::new(),
        importance_spread: ImportanceSpread::default(),
    })
}
