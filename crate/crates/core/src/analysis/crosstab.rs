//! Contingency counts of culture assignments against a categorical covariate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crosstab {
    /// Occupied culture ids, ascending.
    pub culture_ids: Vec<usize>,
    /// Covariate levels, lexicographically sorted.
    pub levels: Vec<String>,
    /// counts[culture][level].
    pub counts: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
    pub total: usize,
}

/// Tabulates assignment-by-covariate counts with row and column totals.
pub fn covariate_crosstab(assignments: &[usize], covariates: &[String]) -> Result<Crosstab> {
    if assignments.len() != covariates.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} assignments vs {} covariate labels",
            assignments.len(),
            covariates.len()
        )));
    }
    if assignments.is_empty() {
        return Err(Error::InvalidInput("no respondents".into()));
    }
    let mut culture_ids: Vec<usize> = assignments.to_vec();
    culture_ids.sort_unstable();
    culture_ids.dedup();
    let mut levels: Vec<String> = covariates.to_vec();
    levels.sort();
    levels.dedup();

    let mut counts = vec![vec![0usize; levels.len()]; culture_ids.len()];
    for (&a, label) in assignments.iter().zip(covariates.iter()) {
        let r = culture_ids.binary_search(&a).expect("culture id present");
        let c = levels.binary_search(label).expect("level present");
        counts[r][c] += 1;
    }
    let row_totals: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<usize> = (0..levels.len())
        .map(|c| counts.iter().map(|r| r[c]).sum())
        .collect();
    let total = assignments.len();
    debug_assert_eq!(row_totals.iter().sum::<usize>(), total);

    Ok(Crosstab {
        culture_ids,
        levels,
        counts,
        row_totals,
        col_totals,
        total,
    })
}
