//! File emission: the structured results document, per-country tables and
//! chart files. Every artifact is written temp-then-rename so a failed run
//! never leaves a half-written file behind, and all numbers use shortest
//! round-trip decimal formatting so reruns are byte-identical.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::categorize::{category_proportions, FamineCategory};
use crate::config::RunConfig;
use crate::evaluate::{CountryEvaluation, GlobalReport};
use crate::ingest::CountryCode;
use crate::models::ModelKind;
use crate::prepare::DroppedFeature;

pub use svg::{bar_chart, scatter_chart};

/// Shortest decimal string that parses back to exactly the same `f64`.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write '{path}': {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization failed: {detail}")]
    Serialize { detail: String },
}

/// Paths of every emitted file plus the report they were derived from.
#[derive(Debug)]
pub struct ReportBundle {
    pub paths: Vec<PathBuf>,
    pub report: GlobalReport,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    summary: SummaryDoc<'a>,
    countries: Vec<CountryDoc<'a>>,
    categories: &'a BTreeMap<CountryCode, FamineCategory>,
    spread: Vec<SpreadRow<'a>>,
    skipped: Vec<SkippedDoc<'a>>,
    config_echo: ConfigEcho<'a>,
    seed: u64,
}

/// The computation-relevant slice of the run config. Runtime-only knobs
/// (thread count, output paths, dump toggle) are excluded so identical
/// analyses produce identical bytes.
#[derive(Serialize)]
struct ConfigEcho<'a> {
    availability_threshold: f64,
    test_fraction: f64,
    split_mode: crate::prepare::SplitMode,
    min_rows: usize,
    seed: u64,
    target_min: f64,
    target_max: f64,
    category_scoring: crate::categorize::ScoringMode,
    forest: &'a crate::config::ForestSection,
    boosting: &'a crate::config::BoostingSection,
}

impl<'a> ConfigEcho<'a> {
    fn from_config(config: &'a RunConfig) -> Self {
        ConfigEcho {
            availability_threshold: config.availability_threshold,
            test_fraction: config.test_fraction,
            split_mode: config.split_mode,
            min_rows: config.min_rows,
            seed: config.seed,
            target_min: config.target_min,
            target_max: config.target_max,
            category_scoring: config.category_scoring,
            forest: &config.forest,
            boosting: &config.boosting,
        }
    }
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    countries_evaluated: usize,
    countries_skipped: usize,
    average_rf_mae: f64,
    average_mae_per_model: &'a BTreeMap<ModelKind, f64>,
    category_proportions: BTreeMap<FamineCategory, f64>,
    comparison_points: Vec<ComparisonPoint<'a>>,
}

#[derive(Serialize)]
struct ComparisonPoint<'a> {
    country: &'a CountryCode,
    rf_mae: f64,
    gbt_mae: f64,
}

#[derive(Serialize)]
struct CountryDoc<'a> {
    country: &'a CountryCode,
    n_train: usize,
    n_test: usize,
    mae: &'a BTreeMap<ModelKind, f64>,
    best_model: ModelKind,
    category: Option<FamineCategory>,
    selected_features: &'a [String],
    dropped_features: &'a [DroppedFeature],
    importances: Vec<ImportanceRow<'a>>,
}

#[derive(Serialize)]
struct ImportanceRow<'a> {
    feature: &'a str,
    weight: f64,
}

#[derive(Serialize)]
struct SpreadRow<'a> {
    feature: &'a str,
    top5_count: usize,
    bottom4_count: usize,
}

#[derive(Serialize)]
struct SkippedDoc<'a> {
    country: &'a CountryCode,
    reason: &'a str,
}

/// A country's importances sorted by descending weight, catalog/selection
/// order on ties.
fn sorted_importances(evaluation: &CountryEvaluation) -> Vec<(&str, f64)> {
    let mut rows: Vec<(&str, f64)> = evaluation
        .importances
        .iter()
        .map(|(name, weight)| (name.as_str(), *weight))
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite weights"));
    rows
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ReportError> {
    let io_err = |source: std::io::Error| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(contents).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Emit every report artifact under `out_dir`:
/// `report.json`, `per_country.csv`, `predictions/<ISO3>.csv`,
/// `importances/<ISO3>.csv`, `categories.json`, `spread.csv`, and the three
/// chart kinds under `charts/`.
pub fn emit_reports(
    report: GlobalReport,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<ReportBundle, ReportError> {
    let mkdir = |dir: &Path| {
        fs::create_dir_all(dir).map_err(|source| ReportError::Io {
            path: dir.to_path_buf(),
            source,
        })
    };
    mkdir(out_dir)?;
    mkdir(&out_dir.join("predictions"))?;
    mkdir(&out_dir.join("importances"))?;
    mkdir(&out_dir.join("charts"))?;

    let mut paths = Vec::new();
    let mut emit = |relative: PathBuf, contents: String| -> Result<PathBuf, ReportError> {
        let path = out_dir.join(relative);
        write_atomic(&path, contents.as_bytes())?;
        paths.push(path.clone());
        Ok(path)
    };

    // (a) report.json
    let doc = ReportDoc {
        summary: SummaryDoc {
            countries_evaluated: report.evaluations.len(),
            countries_skipped: report.skipped.len(),
            average_rf_mae: report.average_rf_mae,
            average_mae_per_model: &report.average_mae_per_model,
            category_proportions: if report.category_assignments.is_empty() {
                BTreeMap::new()
            } else {
                category_proportions(&report.category_assignments)
                    .expect("nonempty assignments")
            },
            comparison_points: report
                .comparison_points
                .iter()
                .map(|(country, rf_mae, gbt_mae)| ComparisonPoint {
                    country,
                    rf_mae: *rf_mae,
                    gbt_mae: *gbt_mae,
                })
                .collect(),
        },
        countries: report
            .evaluations
            .iter()
            .map(|e| CountryDoc {
                country: &e.country,
                n_train: e.n_train,
                n_test: e.n_test,
                mae: &e.mae_per_model,
                best_model: e.best_model,
                category: report.category_assignments.get(&e.country).copied(),
                selected_features: &e.selected_features,
                dropped_features: &e.dropped_features,
                importances: sorted_importances(e)
                    .into_iter()
                    .map(|(feature, weight)| ImportanceRow { feature, weight })
                    .collect(),
            })
            .collect(),
        categories: &report.category_assignments,
        spread: report
            .importance_spread
            .per_feature
            .iter()
            .map(|(feature, counts)| SpreadRow {
                feature,
                top5_count: counts.top5_count,
                bottom4_count: counts.bottom4_count,
            })
            .collect(),
        skipped: report
            .skipped
            .iter()
            .map(|(country, reason)| SkippedDoc { country, reason })
            .collect(),
        config_echo: ConfigEcho::from_config(config),
        seed: config.seed,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| ReportError::Serialize {
        detail: e.to_string(),
    })?;
    emit(PathBuf::from("report.json"), json + "\n")?;

    // (b) per_country.csv
    let mut per_country = String::from(
        "country,n_train,n_test,mae_linear,mae_random_forest,mae_gradient_boosted,best_model,category\n",
    );
    for e in &report.evaluations {
        let category = report
            .category_assignments
            .get(&e.country)
            .map(|c| c.as_str())
            .unwrap_or("");
        per_country.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.country,
            e.n_train,
            e.n_test,
            fmt_f64(e.mae_per_model[&ModelKind::Linear]),
            fmt_f64(e.mae_per_model[&ModelKind::RandomForest]),
            fmt_f64(e.mae_per_model[&ModelKind::GradientBoosted]),
            e.best_model,
            category,
        ));
    }
    emit(PathBuf::from("per_country.csv"), per_country)?;

    // (c) predictions/<ISO3>.csv - best-model pairs, one row per test row.
    for e in &report.evaluations {
        let mut csv = String::from("actual,predicted\n");
        for (actual, predicted) in &e.test_predictions {
            csv.push_str(&format!("{},{}\n", fmt_f64(*actual), fmt_f64(*predicted)));
        }
        emit(PathBuf::from(format!("predictions/{}.csv", e.country)), csv)?;
    }

    // (d) importances/<ISO3>.csv - descending weight.
    for e in &report.evaluations {
        let mut csv = String::from("feature,importance\n");
        for (feature, weight) in sorted_importances(e) {
            csv.push_str(&format!("{},{}\n", csv_field(feature), fmt_f64(weight)));
        }
        emit(PathBuf::from(format!("importances/{}.csv", e.country)), csv)?;
    }

    // (e) categories.json
    let categories_json = serde_json::to_string_pretty(&report.category_assignments)
        .map_err(|e| ReportError::Serialize { detail: e.to_string() })?;
    emit(PathBuf::from("categories.json"), categories_json + "\n")?;

    // (f) spread.csv
    let mut spread = String::from("feature,top5_count,bottom4_count\n");
    for (feature, counts) in &report.importance_spread.per_feature {
        spread.push_str(&format!(
            "{},{},{}\n",
            csv_field(feature),
            counts.top5_count,
            counts.bottom4_count
        ));
    }
    emit(PathBuf::from("spread.csv"), spread)?;

    // (g) charts
    let bars: Vec<(String, f64)> = report
        .evaluations
        .iter()
        .map(|e| {
            (
                e.country.to_string(),
                e.mae_per_model[&ModelKind::RandomForest],
            )
        })
        .collect();
    emit(
        PathBuf::from("charts/mae_by_country.svg"),
        bar_chart(
            "Random forest test error by country",
            "country",
            "mean absolute error",
            &bars,
        ),
    )?;

    let rf_vs_gbt: Vec<(f64, f64)> = report
        .comparison_points
        .iter()
        .map(|(_, rf, gbt)| (*rf, *gbt))
        .collect();
    emit(
        PathBuf::from("charts/rf_vs_gbt.svg"),
        scatter_chart(
            "Random forest error vs gradient boosting error",
            "random forest MAE",
            "gradient boosting MAE",
            &rf_vs_gbt,
            true,
        ),
    )?;

    for e in &report.evaluations {
        emit(
            PathBuf::from(format!("charts/actual_vs_predicted_{}.svg", e.country)),
            scatter_chart(
                &format!("Actual vs predicted food consumption scores: {}", e.country),
                "actual",
                "predicted",
                &e.test_predictions,
                true,
            ),
        )?;
    }

    Ok(ReportBundle { paths, report })
}

/// Quote a CSV field only when it needs it (RFC 4180).
fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}
