//! Panel dataset: country-stamped, dated rows of optional feature values plus
//! the food-consumption target.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::catalog::FeatureCatalog;
use super::IngestError;
use crate::report::fmt_f64;

/// ISO 3166-1 alpha-3 style country code: exactly three ASCII letters,
/// normalized to upper case. Synthetic codes are allowed as long as they
/// keep the shape.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryCode(String);

impl CountryCode {
    pub fn parse(raw: &str) -> Option<Self> {
        let raw = raw.trim();
        if raw.len() == 3 && raw.chars().all(|c| c.is_ascii_alphabetic()) {
            Some(CountryCode(raw.to_ascii_uppercase()))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CountryCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One dated row for one country. Feature values are stored in catalog
/// column order; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub country: CountryCode,
    pub admin1: Option<String>,
    pub date: NaiveDate,
    pub features: Vec<Option<f64>>,
    pub target: f64,
}

impl Observation {
    pub fn feature(&self, idx: usize) -> Option<f64> {
        self.features.get(idx).copied().flatten()
    }
}

/// The parsed panel: a catalog plus observations, immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelDataset {
    pub catalog: FeatureCatalog,
    pub observations: Vec<Observation>,
    /// Distinct country codes, sorted.
    pub countries: Vec<CountryCode>,
}

impl PanelDataset {
    pub fn new(
        catalog: FeatureCatalog,
        observations: Vec<Observation>,
    ) -> Result<Self, IngestError> {
        if observations.is_empty() {
            return Err(IngestError::EmptyDataset);
        }
        let width = catalog.len();
        debug_assert!(observations.iter().all(|o| o.features.len() == width));
        let mut countries: Vec<CountryCode> =
            observations.iter().map(|o| o.country.clone()).collect();
        countries.sort();
        countries.dedup();
        Ok(PanelDataset {
            catalog,
            observations,
            countries,
        })
    }

    pub fn has_country(&self, country: &CountryCode) -> bool {
        self.countries.binary_search(country).is_ok()
    }

    /// Indices of this country's observations, in dataset order.
    pub fn rows_for(&self, country: &CountryCode) -> Vec<usize> {
        self.observations
            .iter()
            .enumerate()
            .filter(|(_, o)| &o.country == country)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Result of a parse: the dataset plus any non-fatal findings (for now only
/// auto-registered feature columns).
#[derive(Debug)]
pub struct ParsedDataset {
    pub dataset: PanelDataset,
    pub warnings: Vec<String>,
}

const REQUIRED_COLUMNS: [&str; 3] = ["country", "date", "target"];

/// Parse the delimited panel format: UTF-8 CSV with header
/// `country,admin1,date,target,<feature...>`, empty string meaning missing,
/// quoting per RFC 4180. Numbers use the decimal point regardless of locale.
///
/// Feature columns absent from the catalog are kept: they are registered
/// under category `Other` and reported as warnings.
pub fn parse_dataset<R: Read>(
    reader: R,
    catalog: &FeatureCatalog,
) -> Result<ParsedDataset, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| IngestError::Csv { detail: e.to_string() })?
        .clone();
    let mut col_of = BTreeMap::new();
    for (i, name) in headers.iter().enumerate() {
        col_of.insert(name.trim().to_string(), i);
    }
    for required in REQUIRED_COLUMNS {
        if !col_of.contains_key(required) {
            return Err(IngestError::MissingColumn {
                name: required.to_string(),
            });
        }
    }
    let country_col = col_of["country"];
    let date_col = col_of["date"];
    let target_col = col_of["target"];
    let admin1_col = col_of.get("admin1").copied();

    let mut catalog = catalog.clone();
    let mut warnings = Vec::new();
    // (csv column, catalog index) for every feature column, header order.
    let mut feature_cols: Vec<(usize, usize)> = Vec::new();
    for (name, &col) in &col_of {
        if REQUIRED_COLUMNS.contains(&name.as_str()) || name == "admin1" {
            continue;
        }
        let idx = match catalog.position(name) {
            Some(idx) => idx,
            None => {
                warnings.push(format!(
                    "feature column '{name}' is not in the catalog; registered under category 'other'"
                ));
                catalog.register_unknown(name)
            }
        };
        feature_cols.push((col, idx));
    }

    let width = catalog.len();
    let mut observations = Vec::new();
    for (row_idx, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Csv { detail: e.to_string() })?;

        let country_raw = record.get(country_col).unwrap_or("");
        let country = CountryCode::parse(country_raw).ok_or_else(|| {
            IngestError::BadCountry {
                row: row_idx,
                value: country_raw.to_string(),
            }
        })?;

        let date_raw = record.get(date_col).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d").map_err(|_| {
            IngestError::BadDate {
                row: row_idx,
                value: date_raw.to_string(),
            }
        })?;

        let admin1 = admin1_col
            .and_then(|c| record.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);

        let target = parse_number(record.get(target_col).unwrap_or(""), row_idx, "target")?
            .ok_or_else(|| IngestError::BadNumber {
                row: row_idx,
                column: "target".to_string(),
                value: String::new(),
            })?;

        let mut features = vec![None; width];
        for &(col, idx) in &feature_cols {
            let cell = record.get(col).unwrap_or("");
            features[idx] = parse_number(cell, row_idx, catalog.entry(idx).name.as_str())?;
        }

        observations.push(Observation {
            country,
            admin1,
            date,
            features,
            target,
        });
    }

    let dataset = PanelDataset::new(catalog, observations)?;
    Ok(ParsedDataset { dataset, warnings })
}

/// Empty cell -> missing. Anything else must be a finite decimal number.
fn parse_number(cell: &str, row: usize, column: &str) -> Result<Option<f64>, IngestError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(IngestError::BadNumber {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Serialize a dataset back to the delimited format. Column order is the
/// catalog order; missing cells become empty strings. Re-parsing the output
/// with the same catalog yields an equal dataset.
pub fn write_dataset<W: Write>(dataset: &PanelDataset, writer: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![
        "country".to_string(),
        "admin1".to_string(),
        "date".to_string(),
        "target".to_string(),
    ];
    header.extend(dataset.catalog.entries().iter().map(|e| e.name.clone()));
    w.write_record(&header)
        .map_err(|e| IngestError::Csv { detail: e.to_string() })?;

    for obs in &dataset.observations {
        let mut record = vec![
            obs.country.to_string(),
            obs.admin1.clone().unwrap_or_default(),
            obs.date.format("%Y-%m-%d").to_string(),
            fmt_f64(obs.target),
        ];
        record.extend(
            obs.features
                .iter()
                .map(|v| v.map(fmt_f64).unwrap_or_default()),
        );
        w.write_record(&record)
            .map_err(|e| IngestError::Csv { detail: e.to_string() })?;
    }
    w.flush().map_err(|e| IngestError::Csv { detail: e.to_string() })?;
    Ok(())
}

/// Per-feature availability for one country: observed-row count over total
/// row count, an exact rational k/n. Returned in catalog order.
pub fn availability(
    dataset: &PanelDataset,
    country: &CountryCode,
) -> Result<Vec<(String, f64)>, IngestError> {
    if !dataset.has_country(country) {
        return Err(IngestError::UnknownCountry {
            code: country.to_string(),
        });
    }
    let width = dataset.catalog.len();
    let mut observed = vec![0usize; width];
    let mut total = 0usize;
    for obs in &dataset.observations {
        if &obs.country != country {
            continue;
        }
        total += 1;
        for (i, v) in obs.features.iter().enumerate() {
            if v.is_some() {
                observed[i] += 1;
            }
        }
    }
    Ok(dataset
        .catalog
        .entries()
        .iter()
        .zip(observed)
        .map(|(e, k)| (e.name.clone(), k as f64 / total as f64))
        .collect())
}
