//! Parsing and validation of the panel dataset and feature catalog.

mod catalog;
mod dataset;
mod validate;

pub use catalog::{
    catalog_to_toml, default_catalog, parse_catalog, CatalogEntry, FamineCategory,
    FeatureCatalog,
};
pub use dataset::{
    availability, parse_dataset, write_dataset, CountryCode, Observation, PanelDataset,
    ParsedDataset,
};
pub use validate::{validate, BoundViolation, TargetRange, ValidationReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("catalog must declare at least one feature")]
    EmptyCatalog,
    #[error("duplicate feature name '{name}' in catalog")]
    DuplicateFeature { name: String },
    #[error("feature '{feature}' has unknown category '{category}' (expected natural, economic, conflict or other)")]
    UnknownCategory { feature: String, category: String },
    #[error("malformed catalog document: {detail}")]
    MalformedCatalog { detail: String },
    #[error("dataset header is missing required column '{name}'")]
    MissingColumn { name: String },
    #[error("data row {row}: column '{column}' holds '{value}', not a finite number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("data row {row}: '{value}' is not an ISO 8601 calendar date")]
    BadDate { row: usize, value: String },
    #[error("data row {row}: '{value}' is not a three-letter country code")]
    BadCountry { row: usize, value: String },
    #[error("dataset holds no observations")]
    EmptyDataset,
    #[error("unknown country code '{code}'")]
    UnknownCountry { code: String },
    #[error("csv error: {detail}")]
    Csv { detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
