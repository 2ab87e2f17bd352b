//! Convert per-country feature importances into a famine-category label and
//! the cross-country importance-spread tallies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::ingest::FamineCategory;
use crate::ingest::{CountryCode, FeatureCatalog};

#[derive(Debug, Error)]
pub enum CategorizeError {
    #[error("cannot score an empty importance set")]
    EmptyImportances,
    #[error("no scored category has a contributing feature")]
    EmptyScores,
}

/// How category scores are computed from a country's importances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMode {
    /// Mean importance weight per category; the largest score wins.
    #[default]
    Importance,
    /// Mean descending-rank position per category; the smallest score wins.
    Rank,
}

/// Per-category score plus how many selected features contributed to it.
/// Only categories with at least one contributing feature appear; `Other`
/// never does.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScores {
    pub mode: ScoringMode,
    pub scores: BTreeMap<FamineCategory, f64>,
    pub feature_counts: BTreeMap<FamineCategory, usize>,
}

/// Score categories from one country's (feature, weight) pairs.
///
/// Features are grouped by their catalog category; `Other` features are
/// excluded from the vote. In importance mode the score is the mean weight.
/// In rank mode features are ranked by descending weight (ties by catalog
/// order, rank 1 = most important) and the score is the mean rank.
pub fn category_scores(
    importances: &[(String, f64)],
    catalog: &FeatureCatalog,
    mode: ScoringMode,
) -> Result<CategoryScores, CategorizeError> {
    if importances.is_empty() {
        return Err(CategorizeError::EmptyImportances);
    }

    // Canonical iteration order: catalog order, regardless of input order.
    let mut by_position: Vec<(usize, f64)> = importances
        .iter()
        .filter_map(|(name, weight)| catalog.position(name).map(|pos| (pos, *weight)))
        .collect();
    by_position.sort_by_key(|(pos, _)| *pos);

    let mut sums: BTreeMap<FamineCategory, f64> = BTreeMap::new();
    let mut counts: BTreeMap<FamineCategory, usize> = BTreeMap::new();

    match mode {
        ScoringMode::Importance => {
            for &(pos, weight) in &by_position {
                let category = catalog.entry(pos).category;
                if category == FamineCategory::Other {
                    continue;
                }
                *sums.entry(category).or_insert(0.0) += weight;
                *counts.entry(category).or_insert(0) += 1;
            }
        }
        ScoringMode::Rank => {
            let ranked = rank_descending(&by_position);
            for (rank, &(pos, _)) in ranked.iter().enumerate() {
                let category = catalog.entry(*pos).category;
                if category == FamineCategory::Other {
                    continue;
                }
                *sums.entry(category).or_insert(0.0) += (rank + 1) as f64;
                *counts.entry(category).or_insert(0) += 1;
            }
        }
    }

    if sums.is_empty() {
        return Err(CategorizeError::EmptyScores);
    }
    let scores = sums
        .into_iter()
        .map(|(category, sum)| (category, sum / counts[&category] as f64))
        .collect();
    Ok(CategoryScores {
        mode,
        scores,
        feature_counts: counts,
    })
}

/// Winner of the score table: argmax in importance mode, argmin in rank
/// mode. Ties break alphabetically (Conflict < Economic < Natural), which is
/// the enum's own order.
pub fn assign_category(scores: &CategoryScores) -> Result<FamineCategory, CategorizeError> {
    let mut entries: Vec<(&FamineCategory, &f64)> = scores.scores.iter().collect();
    if entries.is_empty() {
        return Err(CategorizeError::EmptyScores);
    }
    // BTreeMap iteration is already alphabetical; strict comparison keeps
    // the earlier (alphabetically smaller) category on ties.
    let mut best = entries.remove(0);
    for (category, score) in entries {
        let wins = match scores.mode {
            ScoringMode::Importance => score > best.1,
            ScoringMode::Rank => score < best.1,
        };
        if wins {
            best = (category, score);
        }
    }
    Ok(*best.0)
}

/// Cross-country tally of how often each feature lands in a country's five
/// most / four least important features.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ImportanceSpread {
    pub per_feature: BTreeMap<String, SpreadCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SpreadCounts {
    pub top5_count: usize,
    pub bottom4_count: usize,
}

/// Rank each country's features by descending weight (ties by catalog
/// order); count ranks 1-5 into `top5_count` and the last four ranks into
/// `bottom4_count`. With eight or fewer features a feature can land in both.
pub fn importance_spread(
    per_country: &[(CountryCode, Vec<(String, f64)>)],
    catalog: &FeatureCatalog,
) -> ImportanceSpread {
    let mut spread = ImportanceSpread::default();
    for (_, importances) in per_country {
        let mut by_position: Vec<(usize, f64)> = importances
            .iter()
            .filter_map(|(name, weight)| catalog.position(name).map(|pos| (pos, *weight)))
            .collect();
        by_position.sort_by_key(|(pos, _)| *pos);
        let ranked = rank_descending(&by_position);

        let n = ranked.len();
        for (rank, &(pos, _)) in ranked.iter().enumerate() {
            let name = catalog.entry(*pos).name.clone();
            let counts = spread.per_feature.entry(name).or_default();
            if rank < 5 {
                counts.top5_count += 1;
            }
            if rank + 4 >= n {
                counts.bottom4_count += 1;
            }
        }
    }
    spread
}

/// Fraction of countries assigned to each category; fractions sum to one.
pub fn category_proportions(
    assignments: &BTreeMap<CountryCode, FamineCategory>,
) -> Result<BTreeMap<FamineCategory, f64>, CategorizeError> {
    if assignments.is_empty() {
        return Err(CategorizeError::EmptyScores);
    }
    let mut counts: BTreeMap<FamineCategory, usize> = BTreeMap::new();
    for category in assignments.values() {
        *counts.entry(*category).or_insert(0) += 1;
    }
    let total = assignments.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(category, count)| (category, count as f64 / total))
        .collect())
}

/// Sort (catalog position, weight) pairs by descending weight; equal weights
/// keep catalog order. Rank = index + 1.
fn rank_descending(by_position: &[(usize, f64)]) -> Vec<&(usize, f64)> {
    let mut ranked: Vec<&(usize, f64)> = by_position.iter().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite weights"));
    ranked
}
