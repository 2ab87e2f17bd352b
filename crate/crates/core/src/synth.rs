//! Synthetic fixture generator: a conforming dataset where every country's
//! target is a known function of exactly one category's features plus
//! Gaussian noise, with the planted labels emitted alongside.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    catalog_to_toml, write_dataset, CatalogEntry, CountryCode, FamineCategory,
    FeatureCatalog, Observation, PanelDataset,
};
use crate::rng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator spec: {detail}")]
    BadSpec { detail: String },
    #[error("cannot write '{path}': {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Shape of the planted target function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TargetShape {
    /// Weighted sum of threshold indicators over the planted features.
    #[default]
    Step,
    /// Weighted sum of the planted feature values themselves.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub economic_countries: usize,
    pub natural_countries: usize,
    pub conflict_countries: usize,
    pub rows_per_country: usize,
    pub noise_sigma: f64,
    pub shape: TargetShape,
    pub features_per_category: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            economic_countries: 4,
            natural_countries: 4,
            conflict_countries: 4,
            rows_per_country: 600,
            noise_sigma: 3.0,
            shape: TargetShape::Step,
            features_per_category: 4,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn check(&self) -> Result<(), SynthError> {
        let bad = |detail: String| Err(SynthError::BadSpec { detail });
        if self.economic_countries == 0
            || self.natural_countries == 0
            || self.conflict_countries == 0
        {
            return bad("every planted category needs at least one country".to_string());
        }
        let max = self
            .economic_countries
            .max(self.natural_countries)
            .max(self.conflict_countries);
        if max > 26 {
            return bad(format!("at most 26 countries per category, got {max}"));
        }
        if self.rows_per_country < 2 {
            return bad("rows_per_country must be at least 2".to_string());
        }
        if self.noise_sigma < 0.0 || !self.noise_sigma.is_finite() {
            return bad(format!("noise sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.features_per_category == 0 {
            return bad("features_per_category must be at least 1".to_string());
        }
        Ok(())
    }
}

const NATURAL_NAMES: [&str; 4] = [
    "rainfall_value_mean_last_3month",
    "ndvi_value_mean_last_3month",
    "rainfall_1_month_anomaly_mean_last_3month",
    "ndvi_anomaly_mean_last_3month",
];
const ECONOMIC_NAMES: [&str; 4] = [
    "headline_inflation_value",
    "food_inflation_value",
    "ce_variation_3months",
    "single_pewi_mean_last_3months",
];
// Independent uniform draws would violate an overall-vs-component total,
// so the planted conflict features are all component series.
const CONFLICT_NAMES: [&str; 4] = [
    "num_fatalities_battles_90days",
    "num_fatalities_remote_violence_90days",
    "num_fatalities_vac_90days",
    "num_fatalities_battles_remote_violence_90days",
];

fn feature_names(category: FamineCategory, count: usize) -> Vec<String> {
    let curated: &[&str] = match category {
        FamineCategory::Natural => &NATURAL_NAMES,
        FamineCategory::Economic => &ECONOMIC_NAMES,
        FamineCategory::Conflict => &CONFLICT_NAMES,
        FamineCategory::Other => &[],
    };
    (0..count)
        .map(|i| {
            curated
                .get(i)
                .map(|n| n.to_string())
                .unwrap_or_else(|| format!("synth_{}_{}", category.as_str(), i))
        })
        .collect()
}

fn synth_catalog(features_per_category: usize) -> FeatureCatalog {
    let mut entries = Vec::new();
    for category in FamineCategory::SCORED {
        for name in feature_names(category, features_per_category) {
            entries.push(CatalogEntry {
                name,
                category,
                description: format!("synthetic {} driver", category.as_str()),
                lower_bound: Some(0.0),
                upper_bound: Some(1.0),
            });
        }
    }
    entries.push(CatalogEntry {
        name: "pop_density".to_string(),
        category: FamineCategory::Other,
        description: "synthetic bystander feature, votes in no category".to_string(),
        lower_bound: Some(0.0),
        upper_bound: Some(1.0),
    });
    FeatureCatalog::new(entries).expect("synthetic catalog is valid")
}

fn country_code(category: FamineCategory, index: usize) -> CountryCode {
    let prefix = match category {
        FamineCategory::Economic => "EC",
        FamineCategory::Natural => "NA",
        FamineCategory::Conflict => "CO",
        FamineCategory::Other => unreachable!("no countries planted as other"),
    };
    let letter = (b'A' + index as u8) as char;
    CountryCode::parse(&format!("{prefix}{letter}")).expect("three letters")
}

/// Descending weights w_i proportional to (k - i), summing to one.
fn planted_weights(k: usize) -> Vec<f64> {
    let denom = (k * (k + 1)) as f64 / 2.0;
    (0..k).map(|i| (k - i) as f64 / denom).collect()
}

/// Generate the dataset and the planted country -> category truth map.
pub fn generate_synthetic(
    spec: &SynthSpec,
) -> Result<(PanelDataset, BTreeMap<CountryCode, FamineCategory>), SynthError> {
    spec.check()?;
    let catalog = synth_catalog(spec.features_per_category);
    let width = catalog.len();
    let start_date = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let weights = planted_weights(spec.features_per_category);

    let plan: Vec<(FamineCategory, usize)> = [
        (FamineCategory::Economic, spec.economic_countries),
        (FamineCategory::Natural, spec.natural_countries),
        (FamineCategory::Conflict, spec.conflict_countries),
    ]
    .into_iter()
    .collect();

    let mut observations = Vec::new();
    let mut truth = BTreeMap::new();
    for (category, count) in plan {
        for country_idx in 0..count {
            let country = country_code(category, country_idx);
            truth.insert(country.clone(), category);

            let mut stream =
                rng::stream(rng::labelled_seed(spec.seed, country.as_str()), 0);
            let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
                .expect("valid sigma");
            let planted: Vec<usize> = feature_names(category, spec.features_per_category)
                .iter()
                .map(|n| catalog.position(n).expect("planted feature in catalog"))
                .collect();

            for row in 0..spec.rows_per_country {
                let values: Vec<f64> =
                    (0..width).map(|_| stream.random_range(0.0..1.0)).collect();
                let mut signal = 0.0;
                for (w, &feature_idx) in weights.iter().zip(&planted) {
                    let x = values[feature_idx];
                    signal += match spec.shape {
                        TargetShape::Step => {
                            if x > 0.5 {
                                *w
                            } else {
                                0.0
                            }
                        }
                        TargetShape::Linear => w * x,
                    };
                }
                let eps = if spec.noise_sigma > 0.0 {
                    noise.sample(&mut stream)
                } else {
                    0.0
                };
                let target = 20.0 + 60.0 * signal + eps;
                observations.push(Observation {
                    country: country.clone(),
                    admin1: None,
                    date: start_date + chrono::Days::new(row as u64),
                    features: values.into_iter().map(Some).collect(),
                    target,
                });
            }
        }
    }

    let dataset = PanelDataset::new(catalog, observations).expect("nonempty by construction");
    Ok((dataset, truth))
}

/// Files produced by [`write_synthetic`].
#[derive(Debug)]
pub struct SynthFiles {
    pub dataset_path: PathBuf,
    pub catalog_path: PathBuf,
    pub truth_path: PathBuf,
}

/// Generate and write `dataset.csv`, `catalog.toml` and `truth.json` under
/// `dir`.
pub fn write_synthetic(spec: &SynthSpec, dir: &Path) -> Result<SynthFiles, SynthError> {
    let (dataset, truth) = generate_synthetic(spec)?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| SynthError::Io {
            path: path.clone(),
            source,
        }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let dataset_path = dir.join("dataset.csv");
    let mut buffer = Vec::new();
    write_dataset(&dataset, &mut buffer).expect("in-memory write cannot fail");
    fs::write(&dataset_path, &buffer).map_err(io_err(&dataset_path))?;

    let catalog_path = dir.join("catalog.toml");
    fs::write(&catalog_path, catalog_to_toml(&dataset.catalog)).map_err(io_err(&catalog_path))?;

    let truth_path = dir.join("truth.json");
    let json = serde_json::to_string_pretty(&truth).expect("string map serializes");
    fs::write(&truth_path, json + "\n").map_err(io_err(&truth_path))?;

    Ok(SynthFiles {
        dataset_path,
        catalog_path,
        truth_path,
    })
}
