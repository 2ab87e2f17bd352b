//! End-to-end orchestration: parse, validate, per-country prepare/evaluate
//! on a bounded worker pool, categorize, aggregate, emit.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::categorize::{assign_category, category_scores, importance_spread, CategorizeError};
use crate::config::{ConfigError, RunConfig};
use crate::evaluate::{aggregate, evaluate_country, EvaluateError, GlobalReport};
use crate::ingest::{
    parse_catalog, parse_dataset, validate, CountryCode, IngestError, PanelDataset,
    ValidationReport,
};
use crate::models::{fit_gbt, fit_linear, fit_random_forest, Model};
use crate::prepare::{prepare_country, PrepareError, PrepareOutcome, PreparedCountry};
use crate::report::{emit_reports, ReportBundle, ReportError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read '{path}': {source}")]
    ReadInput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Prepare(#[from] PrepareError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("no evaluable countries: every country was skipped")]
    NoEvaluableCountries,
    #[error("worker pool setup failed: {detail}")]
    ThreadPool { detail: String },
}

impl PipelineError {
    /// Process exit code: 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::ReadInput { .. }
            | PipelineError::Ingest(_)
            | PipelineError::Prepare(_)
            | PipelineError::NoEvaluableCountries => 2,
            PipelineError::Evaluate(_)
            | PipelineError::Report(_)
            | PipelineError::ThreadPool { .. } => 3,
        }
    }
}

/// Everything a `run` produces beyond the files themselves.
#[derive(Debug)]
pub struct RunOutput {
    pub bundle: ReportBundle,
    pub parse_warnings: Vec<String>,
    pub validation: ValidationReport,
}

pub fn load_inputs(
    data_path: &Path,
    catalog_path: &Path,
) -> Result<(PanelDataset, Vec<String>), PipelineError> {
    let read = |path: &Path| {
        fs::read_to_string(path).map_err(|source| PipelineError::ReadInput {
            path: path.to_path_buf(),
            source,
        })
    };
    let catalog = parse_catalog(&read(catalog_path)?)?;
    let raw = read(data_path)?;
    let parsed = parse_dataset(raw.as_bytes(), &catalog)?;
    Ok((parsed.dataset, parsed.warnings))
}

/// Run the whole pipeline and write every artifact under `config.out_dir`.
///
/// Per-country work fans out over a pool of `config.threads` workers
/// (0 = machine default); results are folded in country-code order, so
/// output bytes do not depend on the thread count. Skipped countries are
/// reported, never fatal; a run with zero evaluable countries is an error.
pub fn run(
    config: &RunConfig,
    data_path: &Path,
    catalog_path: &Path,
) -> Result<RunOutput, PipelineError> {
    config.check()?;
    let (dataset, parse_warnings) = load_inputs(data_path, catalog_path)?;
    let validation = validate(&dataset, config.target_range());

    let report = run_on_dataset(config, &dataset)?;
    let bundle = emit_reports(report, config, &config.out_dir)?;

    if config.dump_models {
        dump_models(config, &dataset, &bundle.report)?;
    }

    Ok(RunOutput {
        bundle,
        parse_warnings,
        validation,
    })
}

/// The in-memory pipeline behind [`run`]: everything except file I/O.
pub fn run_on_dataset(
    config: &RunConfig,
    dataset: &PanelDataset,
) -> Result<GlobalReport, PipelineError> {
    config.check()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| PipelineError::ThreadPool {
            detail: e.to_string(),
        })?;

    let prepare_config = config.prepare_config();
    let model_config = config.model_config();
    let seed = config.seed;

    enum PerCountry {
        Evaluated(Box<crate::evaluate::CountryEvaluation>),
        Skipped(CountryCode, String),
    }

    let results: Result<Vec<PerCountry>, PipelineError> = pool.install(|| {
        use rayon::prelude::*;
        dataset
            .countries
            .par_iter()
            .map(|country| {
                match prepare_country(dataset, country, &prepare_config)? {
                    PrepareOutcome::Skipped { reason } => {
                        Ok(PerCountry::Skipped(country.clone(), reason))
                    }
                    PrepareOutcome::Ready(prepared) => {
                        let evaluation = evaluate_country(&prepared, &model_config, seed)?;
                        Ok(PerCountry::Evaluated(Box::new(evaluation)))
                    }
                }
            })
            .collect()
    });

    let mut evaluations = Vec::new();
    let mut skipped = Vec::new();
    for result in results? {
        match result {
            PerCountry::Evaluated(evaluation) => evaluations.push(*evaluation),
            PerCountry::Skipped(country, reason) => skipped.push((country, reason)),
        }
    }
    if evaluations.is_empty() {
        return Err(PipelineError::NoEvaluableCountries);
    }

    let mut report = aggregate(evaluations, skipped)?;

    for evaluation in &report.evaluations {
        match category_scores(&evaluation.importances, &dataset.catalog, config.category_scoring)
            .and_then(|scores| assign_category(&scores))
        {
            Ok(category) => {
                report
                    .category_assignments
                    .insert(evaluation.country.clone(), category);
            }
            // A country whose surviving features all sit outside the scored
            // categories simply gets no label.
            Err(CategorizeError::EmptyScores | CategorizeError::EmptyImportances) => {}
        }
    }

    let per_country: Vec<(CountryCode, Vec<(String, f64)>)> = report
        .evaluations
        .iter()
        .map(|e| (e.country.clone(), e.importances.clone()))
        .collect();
    report.importance_spread = importance_spread(&per_country, &dataset.catalog);

    Ok(report)
}

/// Refit and serialize every evaluated country's models under
/// `out_dir/models/`. Refitting is deterministic, so the dumps match the
/// models that were scored.
fn dump_models(
    config: &RunConfig,
    dataset: &PanelDataset,
    report: &GlobalReport,
) -> Result<(), PipelineError> {
    let dir = config.out_dir.join("models");
    fs::create_dir_all(&dir).map_err(|source| PipelineError::ReadInput {
        path: dir.clone(),
        source,
    })?;

    let prepare_config = config.prepare_config();
    let model_config = config.model_config();
    for evaluation in &report.evaluations {
        let PrepareOutcome::Ready(prepared) =
            prepare_country(dataset, &evaluation.country, &prepare_config)?
        else {
            continue;
        };
        let models = fit_suite(&prepared, &model_config, config.seed)
            .map_err(PipelineError::Evaluate)?;
        for model in models {
            let path = dir.join(format!("{}_{}.json", evaluation.country, model.kind()));
            let json = serde_json::to_string(&model).map_err(|e| {
                PipelineError::Report(ReportError::Serialize {
                    detail: e.to_string(),
                })
            })?;
            fs::write(&path, json).map_err(|source| PipelineError::ReadInput {
                path,
                source,
            })?;
        }
    }
    Ok(())
}

/// Fit the three-model suite exactly as `evaluate_country` does.
pub fn fit_suite(
    prepared: &PreparedCountry,
    config: &crate::evaluate::ModelConfig,
    seed: u64,
) -> Result<[Model; 3], EvaluateError> {
    let country = prepared.country.clone();
    let wrap = |source| EvaluateError::Model {
        country: country.clone(),
        source,
    };
    let x = &prepared.train_matrix;
    let y = &prepared.train_targets;
    let country_seed = crate::rng::labelled_seed(seed, prepared.country.as_str());
    Ok([
        Model::Linear(fit_linear(x, y).map_err(wrap)?),
        Model::RandomForest(
            fit_random_forest(
                x,
                y,
                config.forest_trees,
                &config.forest_params(x.n_cols()),
                crate::rng::mix(country_seed, 2),
            )
            .map_err(wrap)?,
        ),
        Model::GradientBoosted(
            fit_gbt(
                x,
                y,
                config.boosting_rounds,
                config.learning_rate,
                &config.boosting_params(),
                crate::rng::mix(country_seed, 3),
            )
            .map_err(wrap)?,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthSpec};

    fn small_config() -> RunConfig {
        let mut config = RunConfig::default();
        config.forest.n_trees = 20;
        config.boosting.rounds = 20;
        config.threads = 2;
        config
    }

    fn small_spec() -> SynthSpec {
        SynthSpec {
            economic_countries: 1,
            natural_countries: 1,
            conflict_countries: 1,
            rows_per_country: 80,
            noise_sigma: 2.0,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn pipeline_evaluates_every_dense_country() {
        let (dataset, _) = generate_synthetic(&small_spec()).unwrap();
        let report = run_on_dataset(&small_config(), &dataset).unwrap();
        assert_eq!(report.evaluations.len(), 3);
        assert!(report.skipped.is_empty());
        assert_eq!(report.category_assignments.len(), 3);
        assert!(!report.importance_spread.per_feature.is_empty());
    }

    #[test]
    fn underpopulated_countries_are_skipped_not_fatal() {
        let spec = SynthSpec {
            rows_per_country: 80,
            ..small_spec()
        };
        let (dataset, _) = generate_synthetic(&spec).unwrap();
        let mut config = small_config();
        config.min_rows = 81;
        let err = run_on_dataset(&config, &dataset).unwrap_err();
        assert!(matches!(err, PipelineError::NoEvaluableCountries));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (dataset, _) = generate_synthetic(&small_spec()).unwrap();
        let mut config_1 = small_config();
        config_1.threads = 1;
        let mut config_4 = small_config();
        config_4.threads = 4;
        let a = run_on_dataset(&config_1, &dataset).unwrap();
        let b = run_on_dataset(&config_4, &dataset).unwrap();
        assert_eq!(a, b);
    }
}
