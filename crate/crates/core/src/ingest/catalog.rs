//! Feature catalog: the ordered declaration of every feature column, its
//! famine category and its semantic validation bounds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Famine-driver category a feature belongs to. `Other` marks features that
/// measure something real but vote in no category (e.g. population density).
///
/// Variant order is alphabetical so that `Ord` doubles as the documented
/// tie-break order for category assignment.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum FamineCategory {
    Conflict,
    Economic,
    Natural,
    Other,
}

impl FamineCategory {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "conflict" => Some(FamineCategory::Conflict),
            "economic" => Some(FamineCategory::Economic),
            "natural" => Some(FamineCategory::Natural),
            "other" => Some(FamineCategory::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FamineCategory::Conflict => "conflict",
            FamineCategory::Economic => "economic",
            FamineCategory::Natural => "natural",
            FamineCategory::Other => "other",
        }
    }

    /// The three categories that participate in scoring.
    pub const SCORED: [FamineCategory; 3] = [
        FamineCategory::Conflict,
        FamineCategory::Economic,
        FamineCategory::Natural,
    ];
}

impl std::fmt::Display for FamineCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One declared feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub category: FamineCategory,
    #[serde(default)]
    pub description: String,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
}

/// Ordered feature declarations. Entry order is stable and defines the
/// canonical column order everywhere downstream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureCatalog {
    entries: Vec<CatalogEntry>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl PartialEq for FeatureCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl FeatureCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, IngestError> {
        if entries.is_empty() {
            return Err(IngestError::EmptyCatalog);
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (i, entry) in entries.iter().enumerate() {
            if index.insert(entry.name.clone(), i).is_some() {
                return Err(IngestError::DuplicateFeature {
                    name: entry.name.clone(),
                });
            }
        }
        Ok(FeatureCatalog { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &CatalogEntry {
        &self.entries[idx]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.position(name).map(|i| &self.entries[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn category_of(&self, name: &str) -> Option<FamineCategory> {
        self.get(name).map(|e| e.category)
    }

    /// Register a feature seen in data but absent from the declarations.
    /// It lands at the end of the order, under category `Other`, unbounded.
    pub fn register_unknown(&mut self, name: &str) -> usize {
        debug_assert!(!self.contains(name));
        let idx = self.entries.len();
        self.entries.push(CatalogEntry {
            name: name.to_string(),
            category: FamineCategory::Other,
            description: "auto-registered from dataset header".to_string(),
            lower_bound: None,
            upper_bound: None,
        });
        self.index.insert(name.to_string(), idx);
        idx
    }

    /// Restore the name index after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
    }
}

#[derive(Debug, Deserialize)]
struct RawCatalog {
    #[serde(default)]
    features: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
struct RawEntry {
    name: String,
    category: String,
    #[serde(default)]
    description: String,
    min: Option<f64>,
    max: Option<f64>,
}

/// Parse a catalog document (TOML, top-level ordered `features` list).
///
/// Missing bounds mean unbounded; the entry order in the document is kept.
pub fn parse_catalog(raw: &str) -> Result<FeatureCatalog, IngestError> {
    let raw: RawCatalog =
        toml::from_str(raw).map_err(|e| IngestError::MalformedCatalog {
            detail: e.to_string(),
        })?;
    if raw.features.is_empty() {
        return Err(IngestError::EmptyCatalog);
    }
    let mut entries = Vec::with_capacity(raw.features.len());
    for feat in raw.features {
        let category = FamineCategory::parse(&feat.category).ok_or_else(|| {
            IngestError::UnknownCategory {
                feature: feat.name.clone(),
                category: feat.category.clone(),
            }
        })?;
        entries.push(CatalogEntry {
            name: feat.name,
            category,
            description: feat.description,
            lower_bound: feat.min,
            upper_bound: feat.max,
        });
    }
    FeatureCatalog::new(entries)
}

/// Serialize a catalog back to the document format accepted by
/// [`parse_catalog`].
pub fn catalog_to_toml(catalog: &FeatureCatalog) -> String {
    let mut out = String::new();
    for entry in catalog.entries() {
        out.push_str("[[features]]\n");
        out.push_str(&format!("name = {:?}\n", entry.name));
        out.push_str(&format!("category = {:?}\n", entry.category.as_str()));
        if !entry.description.is_empty() {
            out.push_str(&format!("description = {:?}\n", entry.description));
        }
        if let Some(min) = entry.lower_bound {
            out.push_str(&format!("min = {}\n", crate::report::fmt_f64(min)));
        }
        if let Some(max) = entry.upper_bound {
            out.push_str(&format!("max = {}\n", crate::report::fmt_f64(max)));
        }
        out.push('\n');
    }
    out
}

fn entry(
    name: &str,
    category: FamineCategory,
    description: &str,
    lower: Option<f64>,
    upper: Option<f64>,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        category,
        description: description.to_string(),
        lower_bound: lower,
        upper_bound: upper,
    }
}

/// The built-in 31-feature catalog covering the standard panel schema:
/// satellite rainfall/vegetation aggregates, undernourishment prevalence,
/// market indicators and rolling conflict-fatality counts.
pub fn default_catalog() -> FeatureCatalog {
    use FamineCategory::{Conflict, Economic, Natural, Other};
    let mut entries = Vec::new();

    for stat in ["min", "mean", "max"] {
        entries.push(entry(
            &format!("rainfall_value_{stat}_last_3month"),
            Natural,
            &format!("{stat} of measured rainfall over the last three months"),
            Some(0.0),
            None,
        ));
    }
    entries.push(entry(
        "rainfall_value_mean_last_12month",
        Natural,
        "mean measured rainfall over the last twelve months",
        Some(0.0),
        None,
    ));
    for window in ["1_month", "3_months"] {
        for stat in ["min", "mean", "max"] {
            entries.push(entry(
                &format!("rainfall_{window}_anomaly_{stat}_last_3month"),
                Natural,
                &format!(
                    "{stat} of the {} rainfall anomaly over the last three months",
                    window.replace('_', " ")
                ),
                None,
                None,
            ));
        }
    }
    for stat in ["min", "mean", "max"] {
        entries.push(entry(
            &format!("ndvi_value_{stat}_last_3month"),
            Natural,
            &format!("{stat} vegetation index over the last three months"),
            Some(-1.0),
            Some(1.0),
        ));
    }
    for stat in ["min", "mean", "max"] {
        entries.push(entry(
            &format!("ndvi_anomaly_{stat}_last_3month"),
            Natural,
            &format!("{stat} vegetation-index anomaly over the last three months"),
            None,
            None,
        ));
    }

    for stat in ["min", "mean", "max"] {
        entries.push(entry(
            &format!("single_pewi_{stat}_last_3months"),
            Economic,
            &format!("{stat} prevalence of undernourishment over the last three months"),
            Some(0.0),
            Some(100.0),
        ));
    }
    entries.push(entry(
        "headline_inflation_value",
        Economic,
        "overall consumer price inflation rate",
        None,
        None,
    ));
    entries.push(entry(
        "food_inflation_value",
        Economic,
        "food price inflation rate",
        None,
        None,
    ));
    entries.push(entry(
        "ce_variation_3months",
        Economic,
        "currency exchange rate variation over the last three months",
        None,
        None,
    ));

    for kind in ["battles", "remote_violence", "vac", "overall"] {
        entries.push(entry(
            &format!("num_fatalities_{kind}_90days"),
            Conflict,
            &format!("{} fatalities over a rolling 90-day window", kind.replace('_', " ")),
            Some(0.0),
            None,
        ));
    }
    for kind in ["battles", "battles_remote_violence", "vac", "vac_remote_violence"] {
        entries.push(entry(
            &format!("num_fatalities_{kind}_90days_difference"),
            Conflict,
            &format!(
                "change in {} fatalities versus the previous 90-day window",
                kind.replace('_', " ")
            ),
            None,
            None,
        ));
    }

    entries.push(entry(
        "pop_density",
        Other,
        "people per square kilometre, averaged over the admin-1 unit",
        Some(0.0),
        None,
    ));

    FeatureCatalog::new(entries).expect("built-in catalog is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_has_31_features_in_three_scored_categories() {
        let catalog = default_catalog();
        assert_eq!(catalog.len(), 31);
        let mut seen = std::collections::BTreeSet::new();
        for e in catalog.entries() {
            seen.insert(e.category);
        }
        assert!(seen.contains(&FamineCategory::Natural));
        assert!(seen.contains(&FamineCategory::Economic));
        assert!(seen.contains(&FamineCategory::Conflict));
    }

    #[test]
    fn parse_keeps_document_order() {
        let doc = r#"
            [[features]]
            name = "b_feature"
            category = "economic"

            [[features]]
            name = "a_feature"
            category = "natural"
            min = 0.0
            max = 10.0
            description = "demo"
        "#;
        let catalog = parse_catalog(doc).unwrap();
        assert_eq!(catalog.entry(0).name, "b_feature");
        assert_eq!(catalog.entry(1).name, "a_feature");
        assert_eq!(catalog.entry(1).lower_bound, Some(0.0));
        assert_eq!(catalog.entry(1).upper_bound, Some(10.0));
        assert_eq!(catalog.entry(0).lower_bound, None);
    }

    #[test]
    fn empty_catalog_rejected() {
        let err = parse_catalog("features = []").unwrap_err();
        assert!(err
            .to_string()
            .contains("catalog must declare at least one feature"));
    }

    #[test]
    fn duplicate_name_rejected() {
        let doc = r#"
            [[features]]
            name = "food_inflation_value"
            category = "economic"

            [[features]]
            name = "food_inflation_value"
            category = "economic"
        "#;
        let err = parse_catalog(doc).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateFeature { ref name } if name == "food_inflation_value"));
    }

    #[test]
    fn unknown_category_names_offending_entry() {
        let doc = r#"
            [[features]]
            name = "x"
            category = "martian"
        "#;
        let err = parse_catalog(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('x') && msg.contains("martian"));
    }

    #[test]
    fn catalog_toml_round_trips() {
        let catalog = default_catalog();
        let doc = catalog_to_toml(&catalog);
        let reparsed = parse_catalog(&doc).unwrap();
        assert_eq!(catalog, reparsed);
    }
}
