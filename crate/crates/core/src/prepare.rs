//! Turn one country's raw rows into imputed, feature-filtered train/test
//! matrices: majority-availability feature selection, an 80:20 style split,
//! then median imputation fitted on training rows only.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{availability, CountryCode, IngestError, PanelDataset};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    #[default]
    Random,
    Chronological,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepareConfig {
    /// A feature is kept only when observed in strictly more than this
    /// fraction of the country's rows.
    pub availability_threshold: f64,
    pub test_fraction: f64,
    pub split_mode: SplitMode,
    pub min_rows: usize,
    pub seed: u64,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            availability_threshold: 0.5,
            test_fraction: 0.2,
            split_mode: SplitMode::Random,
            min_rows: 40,
            seed: 0,
        }
    }
}

impl PrepareConfig {
    pub fn check(&self) -> Result<(), PrepareError> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(PrepareError::BadConfig {
                detail: format!("test_fraction must lie in (0, 1), got {}", self.test_fraction),
            });
        }
        if !(0.0..=1.0).contains(&self.availability_threshold) {
            return Err(PrepareError::BadConfig {
                detail: format!(
                    "availability_threshold must lie in [0, 1], got {}",
                    self.availability_threshold
                ),
            });
        }
        if self.min_rows < 5 {
            return Err(PrepareError::BadConfig {
                detail: format!("min_rows must be at least 5, got {}", self.min_rows),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedFeature {
    pub name: String,
    pub reason: String,
}

/// One country's design matrices, fully imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCountry {
    pub country: CountryCode,
    /// Selected feature names, in catalog order.
    pub selected_features: Vec<String>,
    pub train_matrix: Matrix,
    pub train_targets: Vec<f64>,
    pub test_matrix: Matrix,
    pub test_targets: Vec<f64>,
    /// Training-median imputation value per selected feature.
    pub medians: Vec<f64>,
    pub dropped_features: Vec<DroppedFeature>,
    /// Dates of the test rows, split order (useful for audits).
    pub test_dates: Vec<NaiveDate>,
}

impl PreparedCountry {
    pub fn n_train(&self) -> usize {
        self.train_targets.len()
    }

    pub fn n_test(&self) -> usize {
        self.test_targets.len()
    }
}

/// Countries that cannot be modelled are skipped, never fatal.
#[derive(Debug, Clone, PartialEq)]
pub enum PrepareOutcome {
    Ready(Box<PreparedCountry>),
    Skipped { reason: String },
}

#[derive(Debug, Error)]
pub enum PrepareError {
    #[error("invalid preparation config: {detail}")]
    BadConfig { detail: String },
    #[error("cannot split {n} rows with test fraction {fraction}: {side} set would be empty")]
    DegenerateSplit {
        n: usize,
        fraction: f64,
        side: &'static str,
    },
    #[error("column '{feature}' has no imputation median")]
    MissingMedian { feature: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Keep features observed in strictly more than `threshold` of rows.
/// Input pairs come in catalog order and the order is preserved.
pub fn select_features(avail: &[(String, f64)], threshold: f64) -> Vec<String> {
    avail
        .iter()
        .filter(|(_, fraction)| *fraction > threshold)
        .map(|(name, _)| name.clone())
        .collect()
}

/// Partition row positions into (train, test).
///
/// Random mode applies a seeded uniform permutation and takes the last
/// `round(test_fraction * n)` positions as test. Chronological mode sorts by
/// date (stable, so ties keep input order) and takes the latest-dated rows
/// as test.
pub fn train_test_split(
    dates: &[NaiveDate],
    test_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<(Vec<usize>, Vec<usize>), PrepareError> {
    let n = dates.len();
    let n_test = (test_fraction * n as f64).round() as usize;
    if n_test == 0 {
        return Err(PrepareError::DegenerateSplit {
            n,
            fraction: test_fraction,
            side: "test",
        });
    }
    if n_test >= n {
        return Err(PrepareError::DegenerateSplit {
            n,
            fraction: test_fraction,
            side: "train",
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    match mode {
        SplitMode::Random => {
            use rand::seq::SliceRandom;
            let mut stream = rng::stream(seed, 0);
            order.shuffle(&mut stream);
        }
        SplitMode::Chronological => {
            order.sort_by_key(|&i| dates[i]);
        }
    }
    let test = order.split_off(n - n_test);
    Ok((order, test))
}

/// Median of the observed values in each column. Columns with no observed
/// training value are reported back as `None` so the caller can drop them.
pub fn fit_imputer(columns: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    columns.iter().map(|col| median_of_observed(col)).collect()
}

fn median_of_observed(column: &[Option<f64>]) -> Option<f64> {
    let mut observed: Vec<f64> = column.iter().copied().flatten().collect();
    if observed.is_empty() {
        return None;
    }
    observed.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = observed.len();
    Some(if n % 2 == 1 {
        observed[n / 2]
    } else {
        (observed[n / 2 - 1] + observed[n / 2]) / 2.0
    })
}

/// Replace missing cells with the matching column median; observed cells
/// pass through unchanged.
pub fn impute(
    rows: &[Vec<Option<f64>>],
    medians: &[f64],
    feature_names: &[String],
) -> Result<Matrix, PrepareError> {
    let width = medians.len();
    if width != feature_names.len() {
        return Err(PrepareError::MissingMedian {
            feature: feature_names
                .get(width)
                .cloned()
                .unwrap_or_else(|| "<unknown>".to_string()),
        });
    }
    let mut matrix = Matrix::zeros(rows.len(), width);
    for (r, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), width);
        for c in 0..width {
            matrix.set(r, c, row[c].unwrap_or(medians[c]));
        }
    }
    Ok(matrix)
}

/// Full preparation for one country:
/// availability -> select_features -> split -> fit_imputer (train only) ->
/// impute train and test. Features whose training column is entirely missing
/// after the split are dropped, recorded, and the imputer is refit once.
pub fn prepare_country(
    dataset: &PanelDataset,
    country: &CountryCode,
    config: &PrepareConfig,
) -> Result<PrepareOutcome, PrepareError> {
    config.check()?;
    let rows = dataset.rows_for(country);
    if rows.is_empty() {
        return Err(PrepareError::Ingest(IngestError::UnknownCountry {
            code: country.to_string(),
        }));
    }
    if rows.len() < config.min_rows {
        return Ok(PrepareOutcome::Skipped {
            reason: format!(
                "insufficient rows: {} observed, {} required",
                rows.len(),
                config.min_rows
            ),
        });
    }

    let avail = availability(dataset, country)?;
    let mut dropped_features: Vec<DroppedFeature> = avail
        .iter()
        .filter(|(_, fraction)| *fraction <= config.availability_threshold)
        .map(|(name, fraction)| DroppedFeature {
            name: name.clone(),
            reason: format!(
                "availability {fraction} not above threshold {}",
                config.availability_threshold
            ),
        })
        .collect();
    let mut selected = select_features(&avail, config.availability_threshold);
    if selected.is_empty() {
        return Ok(PrepareOutcome::Skipped {
            reason: "no feature survives the availability filter".to_string(),
        });
    }

    let dates: Vec<NaiveDate> = rows.iter().map(|&i| dataset.observations[i].date).collect();
    let split_seed = rng::mix(
        rng::labelled_seed(config.seed, country.as_str()),
        SPLIT_STREAM,
    );
    let (train_pos, test_pos) =
        train_test_split(&dates, config.test_fraction, split_seed, config.split_mode)?;

    let mut selected_idx: Vec<usize> = selected
        .iter()
        .map(|name| dataset.catalog.position(name).expect("selected from catalog"))
        .collect();

    let gather = |positions: &[usize], idxs: &[usize]| -> Vec<Vec<Option<f64>>> {
        positions
            .iter()
            .map(|&p| {
                let obs = &dataset.observations[rows[p]];
                idxs.iter().map(|&i| obs.features[i]).collect()
            })
            .collect()
    };

    let mut train_rows = gather(&train_pos, &selected_idx);
    let mut medians = fit_imputer(&columns_of(&train_rows, selected_idx.len()));

    // Drop features with no observed training value, then refit once.
    if medians.iter().any(Option::is_none) {
        let keep: Vec<usize> = medians
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.is_some().then_some(i))
            .collect();
        for (i, median) in medians.iter().enumerate() {
            if median.is_none() {
                dropped_features.push(DroppedFeature {
                    name: selected[i].clone(),
                    reason: "no training observations".to_string(),
                });
            }
        }
        selected = keep.iter().map(|&i| selected[i].clone()).collect();
        selected_idx = keep.iter().map(|&i| selected_idx[i]).collect();
        if selected.is_empty() {
            return Ok(PrepareOutcome::Skipped {
                reason: "no feature has training observations".to_string(),
            });
        }
        train_rows = gather(&train_pos, &selected_idx);
        medians = fit_imputer(&columns_of(&train_rows, selected_idx.len()));
    }
    let medians: Vec<f64> = medians.into_iter().map(|m| m.expect("refit leaves no gaps")).collect();

    let test_rows = gather(&test_pos, &selected_idx);
    let train_matrix = impute(&train_rows, &medians, &selected)?;
    let test_matrix = impute(&test_rows, &medians, &selected)?;

    let target_of = |p: usize| dataset.observations[rows[p]].target;
    Ok(PrepareOutcome::Ready(Box::new(PreparedCountry {
        country: country.clone(),
        selected_features: selected,
        train_targets: train_pos.iter().map(|&p| target_of(p)).collect(),
        test_targets: test_pos.iter().map(|&p| target_of(p)).collect(),
        test_dates: test_pos.iter().map(|&p| dates[p]).collect(),
        train_matrix,
        test_matrix,
        medians,
        dropped_features,
    })))
}

const SPLIT_STREAM: u64 = 1;

fn columns_of(rows: &[Vec<Option<f64>>], width: usize) -> Vec<Vec<Option<f64>>> {
    (0..width)
        .map(|c| rows.iter().map(|row| row[c]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_catalog, parse_dataset};

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn selection_is_strict_majority() {
        let avail = vec![
            ("kept".to_string(), 0.7),
            ("boundary".to_string(), 0.5),
            ("gone".to_string(), 0.2),
        ];
        assert_eq!(select_features(&avail, 0.5), vec!["kept".to_string()]);
    }

    #[test]
    fn zero_threshold_keeps_anything_observed() {
        let avail = vec![
            ("a".to_string(), 0.01),
            ("b".to_string(), 0.0),
            ("c".to_string(), 1.0),
        ];
        assert_eq!(
            select_features(&avail, 0.0),
            vec!["a".to_string(), "c".to_string()]
        );
    }

    #[test]
    fn split_sizes_follow_rounding() {
        let dates: Vec<NaiveDate> = (1..=100)
            .map(|d| date("2020-01-01") + chrono::Days::new(d))
            .collect();
        let (train, test) = train_test_split(&dates, 0.2, 7, SplitMode::Random).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);

        let five: Vec<NaiveDate> = dates[..5].to_vec();
        let (train, test) = train_test_split(&five, 0.2, 7, SplitMode::Random).unwrap();
        assert_eq!((train.len(), test.len()), (4, 1));
    }

    #[test]
    fn split_is_deterministic_and_a_partition() {
        let dates: Vec<NaiveDate> = (0..37).map(|d| date("2020-01-01") + chrono::Days::new(d)).collect();
        let a = train_test_split(&dates, 0.2, 42, SplitMode::Random).unwrap();
        let b = train_test_split(&dates, 0.2, 42, SplitMode::Random).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.0.iter().chain(a.1.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn chronological_split_takes_latest_dates() {
        let dates = vec![
            date("2020-03-01"),
            date("2020-01-01"),
            date("2020-05-01"),
            date("2020-02-01"),
            date("2020-04-01"),
        ];
        let (train, test) =
            train_test_split(&dates, 0.4, 0, SplitMode::Chronological).unwrap();
        assert_eq!(test, vec![4, 2]); // 2020-04-01, 2020-05-01
        assert_eq!(train, vec![1, 3, 0]);
    }

    #[test]
    fn degenerate_split_is_an_error() {
        let dates = vec![date("2020-01-01"), date("2020-01-02")];
        assert!(train_test_split(&dates, 0.1, 0, SplitMode::Random).is_err());
        assert!(train_test_split(&dates, 0.95, 0, SplitMode::Random).is_err());
    }

    #[test]
    fn median_handles_missing_and_even_counts() {
        assert_eq!(median_of_observed(&[Some(1.0), None, Some(3.0)]), Some(2.0));
        assert_eq!(
            median_of_observed(&[Some(1.0), Some(2.0), Some(3.0), Some(4.0)]),
            Some(2.5)
        );
        assert_eq!(median_of_observed(&[None, None]), None);
    }

    #[test]
    fn impute_fills_only_missing_cells() {
        let rows = vec![
            vec![Some(1.0), None],
            vec![None, Some(4.0)],
            vec![Some(3.0), Some(6.0)],
        ];
        let names = vec!["a".to_string(), "b".to_string()];
        let m = impute(&rows, &[2.0, 5.0], &names).unwrap();
        assert_eq!(m.row(0), &[1.0, 5.0]);
        assert_eq!(m.row(1), &[2.0, 4.0]);
        assert_eq!(m.row(2), &[3.0, 6.0]);
    }

    fn synthetic_dataset(rows_per_country: usize) -> PanelDataset {
        let catalog = parse_catalog(
            r#"
            [[features]]
            name = "alpha"
            category = "natural"

            [[features]]
            name = "beta"
            category = "economic"
        "#,
        )
        .unwrap();
        let mut csv = String::from("country,admin1,date,target,alpha,beta\n");
        for i in 0..rows_per_country {
            let d = date("2020-01-01") + chrono::Days::new(i as u64);
            csv.push_str(&format!("KEN,,{d},{},{},{}\n", 50 + i % 7, i, i * 2));
        }
        parse_dataset(csv.as_bytes(), &catalog).unwrap().dataset
    }

    #[test]
    fn too_few_rows_skips() {
        let ds = synthetic_dataset(10);
        let out = prepare_country(
            &ds,
            &CountryCode::parse("KEN").unwrap(),
            &PrepareConfig::default(),
        )
        .unwrap();
        match out {
            PrepareOutcome::Skipped { reason } => {
                assert!(reason.contains("insufficient rows"))
            }
            _ => panic!("expected skip"),
        }
    }

    #[test]
    fn dense_country_splits_480_120_with_no_missing_cells() {
        let ds = synthetic_dataset(600);
        let out = prepare_country(
            &ds,
            &CountryCode::parse("KEN").unwrap(),
            &PrepareConfig::default(),
        )
        .unwrap();
        let prepared = match out {
            PrepareOutcome::Ready(p) => p,
            PrepareOutcome::Skipped { reason } => panic!("skipped: {reason}"),
        };
        assert_eq!(prepared.n_train(), 480);
        assert_eq!(prepared.n_test(), 120);
        assert_eq!(prepared.selected_features, vec!["alpha", "beta"]);
        assert!(prepared.train_matrix.rows().flatten().all(|v| v.is_finite()));
        assert!(prepared.test_matrix.rows().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn feature_without_training_observations_is_dropped_and_recorded() {
        // "gamma" is observed only in the two newest rows; a chronological
        // split pushes those rows into the test set.
        let catalog = parse_catalog(
            r#"
            [[features]]
            name = "alpha"
            category = "natural"

            [[features]]
            name = "gamma"
            category = "conflict"
        "#,
        )
        .unwrap();
        let mut csv = String::from("country,admin1,date,target,alpha,gamma\n");
        for i in 0..10 {
            let d = date("2020-01-01") + chrono::Days::new(i as u64);
            let gamma = if i >= 8 { "9".to_string() } else { String::new() };
            csv.push_str(&format!("KEN,,{d},50,{i},{gamma}\n"));
        }
        let ds = parse_dataset(csv.as_bytes(), &catalog).unwrap().dataset;
        let config = PrepareConfig {
            min_rows: 5,
            split_mode: SplitMode::Chronological,
            availability_threshold: 0.1,
            ..PrepareConfig::default()
        };
        let out = prepare_country(&ds, &CountryCode::parse("KEN").unwrap(), &config).unwrap();
        let prepared = match out {
            PrepareOutcome::Ready(p) => p,
            PrepareOutcome::Skipped { reason } => panic!("skipped: {reason}"),
        };
        assert_eq!(prepared.selected_features, vec!["alpha"]);
        assert!(prepared
            .dropped_features
            .iter()
            .any(|d| d.name == "gamma" && d.reason == "no training observations"));
    }

    #[test]
    fn medians_come_from_training_rows_only() {
        // Train rows (chronological: earliest 8) have alpha in {0..8} minus
        // missing; test rows carry extreme values that must not leak.
        let catalog = parse_catalog(
            r#"
            [[features]]
            name = "alpha"
            category = "natural"
        "#,
        )
        .unwrap();
        let mut csv = String::from("country,admin1,date,target,alpha\n");
        for i in 0..8 {
            let d = date("2020-01-01") + chrono::Days::new(i as u64);
            let alpha = if i == 3 { String::new() } else { i.to_string() };
            csv.push_str(&format!("KEN,,{d},50,{alpha}\n"));
        }
        for i in 8..10 {
            let d = date("2020-01-01") + chrono::Days::new(i as u64);
            csv.push_str(&format!("KEN,,{d},50,1000000\n"));
        }
        let ds = parse_dataset(csv.as_bytes(), &catalog).unwrap().dataset;
        let config = PrepareConfig {
            min_rows: 5,
            split_mode: SplitMode::Chronological,
            ..PrepareConfig::default()
        };
        let out = prepare_country(&ds, &CountryCode::parse("KEN").unwrap(), &config).unwrap();
        let prepared = match out {
            PrepareOutcome::Ready(p) => p,
            _ => panic!("expected ready"),
        };
        // median of {0,1,2,4,5,6,7} = 4; the million-valued test rows are invisible.
        assert_eq!(prepared.medians, vec![4.0]);
    }
}
