//! Semantic validation of a parsed dataset. Findings are report entries,
//! never errors, and validation never mutates the data.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::catalog::FamineCategory;
use super::dataset::{CountryCode, PanelDataset};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub row: usize,
    pub feature: String,
    pub value: f64,
}

/// Findings over one dataset. All row indices are zero-based data-row
/// positions (header excluded). Empty lists mean the dataset is fully clean.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub row_counts_per_country: BTreeMap<CountryCode, usize>,
    pub target_range_violations: Vec<(usize, f64)>,
    pub bound_violations: Vec<BoundViolation>,
    pub duplicate_keys: Vec<(CountryCode, Option<String>, NaiveDate)>,
    pub conflict_consistency_warnings: Vec<usize>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.target_range_violations.is_empty()
            && self.bound_violations.is_empty()
            && self.duplicate_keys.is_empty()
            && self.conflict_consistency_warnings.is_empty()
    }
}

/// Inclusive target range accepted by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetRange {
    pub min: f64,
    pub max: f64,
}

impl Default for TargetRange {
    fn default() -> Self {
        TargetRange { min: 0.0, max: 112.0 }
    }
}

/// Validate a dataset against its catalog.
///
/// The conflict-consistency rule is name-driven: within category `conflict`,
/// a feature whose name contains `overall` is a total and every other
/// conflict feature is a component; totals and components are only compared
/// when both are levels or both are `difference` series. A row where a total
/// is smaller than any matching component gets one warning entry. Sources
/// report with lags, so this is a warning, never an error.
pub fn validate(dataset: &PanelDataset, target_range: TargetRange) -> ValidationReport {
    let mut report = ValidationReport::default();

    for obs in &dataset.observations {
        *report
            .row_counts_per_country
            .entry(obs.country.clone())
            .or_insert(0) += 1;
    }

    // (total feature idx, component feature idxs) pairs for the conflict rule.
    let conflict_pairs = conflict_pairs(dataset);

    let mut seen_keys: BTreeMap<(CountryCode, Option<String>, NaiveDate), usize> =
        BTreeMap::new();

    for (row, obs) in dataset.observations.iter().enumerate() {
        if obs.target < target_range.min || obs.target > target_range.max {
            report.target_range_violations.push((row, obs.target));
        }

        for (idx, value) in obs.features.iter().enumerate() {
            let Some(value) = *value else { continue };
            let entry = dataset.catalog.entry(idx);
            let below = entry.lower_bound.is_some_and(|min| value < min);
            let above = entry.upper_bound.is_some_and(|max| value > max);
            if below || above {
                report.bound_violations.push(BoundViolation {
                    row,
                    feature: entry.name.clone(),
                    value,
                });
            }
        }

        let key = (obs.country.clone(), obs.admin1.clone(), obs.date);
        *seen_keys.entry(key).or_insert(0) += 1;

        'consistency: for (total_idx, component_idxs) in &conflict_pairs {
            let Some(total) = obs.feature(*total_idx) else { continue };
            for &component_idx in component_idxs {
                if let Some(component) = obs.feature(component_idx) {
                    if total < component {
                        report.conflict_consistency_warnings.push(row);
                        break 'consistency;
                    }
                }
            }
        }
    }

    report.duplicate_keys = seen_keys
        .into_iter()
        .filter(|(_, count)| *count > 1)
        .map(|(key, _)| key)
        .collect();

    report
}

fn conflict_pairs(dataset: &PanelDataset) -> Vec<(usize, Vec<usize>)> {
    let conflict_features: Vec<usize> = dataset
        .catalog
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.category == FamineCategory::Conflict)
        .map(|(i, _)| i)
        .collect();

    conflict_features
        .iter()
        .filter(|&&i| dataset.catalog.entry(i).name.contains("overall"))
        .map(|&total_idx| {
            let total_is_diff = dataset.catalog.entry(total_idx).name.contains("difference");
            let components = conflict_features
                .iter()
                .copied()
                .filter(|&i| {
                    i != total_idx
                        && !dataset.catalog.entry(i).name.contains("overall")
                        && dataset.catalog.entry(i).name.contains("difference") == total_is_diff
                })
                .collect();
            (total_idx, components)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::catalog::parse_catalog;
    use super::super::dataset::parse_dataset;
    use super::*;

    const CATALOG: &str = r#"
        [[features]]
        name = "rainfall"
        category = "natural"
        min = 0.0

        [[features]]
        name = "num_fatalities_battles_90days"
        category = "conflict"
        min = 0.0

        [[features]]
        name = "num_fatalities_overall_90days"
        category = "conflict"
        min = 0.0
    "#;

    fn parse(csv: &str) -> PanelDataset {
        let catalog = parse_catalog(CATALOG).unwrap();
        parse_dataset(csv.as_bytes(), &catalog).unwrap().dataset
    }

    #[test]
    fn clean_dataset_yields_empty_report() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,,2020-01-01,50,1,2,5\n\
             KEN,,2020-01-08,60,2,0,0\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert!(report.is_clean());
        assert_eq!(report.row_counts_per_country.len(), 1);
        assert_eq!(
            report.row_counts_per_country
                [&CountryCode::parse("KEN").unwrap()],
            2
        );
    }

    #[test]
    fn target_out_of_range_surfaces_here_not_at_parse() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,,2020-01-01,115,1,0,0\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert_eq!(report.target_range_violations, vec![(0, 115.0)]);
    }

    #[test]
    fn overall_below_component_warns_once_per_row() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,,2020-01-01,50,1,7,5\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert_eq!(report.conflict_consistency_warnings, vec![0]);
    }

    #[test]
    fn duplicate_key_listed_once() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,Coast,2020-01-01,50,1,0,0\n\
             KEN,Coast,2020-01-01,51,2,0,0\n\
             KEN,Rift,2020-01-01,52,3,0,0\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert_eq!(report.duplicate_keys.len(), 1);
        assert_eq!(report.duplicate_keys[0].1.as_deref(), Some("Coast"));
    }

    #[test]
    fn bound_violation_reports_feature_and_value() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,,2020-01-01,50,-3,0,0\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert_eq!(report.bound_violations.len(), 1);
        assert_eq!(report.bound_violations[0].feature, "rainfall");
        assert_eq!(report.bound_violations[0].value, -3.0);
    }

    #[test]
    fn missing_cells_never_trigger_consistency_warnings() {
        let ds = parse(
            "country,admin1,date,target,rainfall,num_fatalities_battles_90days,num_fatalities_overall_90days\n\
             KEN,,2020-01-01,50,1,7,\n",
        );
        let report = validate(&ds, TargetRange::default());
        assert!(report.conflict_consistency_warnings.is_empty());
    }
}
