//! Ranking of items by cross-culture disagreement.

use serde::{Deserialize, Serialize};

use crate::analysis::summary::ConsensusSummary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControversyRow {
    pub item_id: String,
    /// Consensus values per culture, in the summary's culture order.
    pub consensus: Vec<f64>,
    /// Population variance of the per-culture consensus values.
    pub variance: f64,
    /// Unweighted arithmetic mean of the per-culture consensus values.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControversyTable {
    pub culture_ids: Vec<usize>,
    /// Rows sorted by variance, descending; ties keep item order.
    pub rows: Vec<ControversyRow>,
}

/// Ranks items by the unweighted population variance of their per-culture
/// consensus values on the (0, 1) scale. Fewer than two occupied cultures
/// yields an empty table with a warning (there is no disagreement to rank).
pub fn controversy_ranking(summary: &ConsensusSummary) -> ControversyTable {
    let culture_ids: Vec<usize> = summary.cultures.iter().map(|c| c.culture_id).collect();
    if summary.cultures.len() < 2 {
        log::warn!(
            "controversy ranking needs at least 2 occupied cultures, found {}",
            summary.cultures.len()
        );
        return ControversyTable {
            culture_ids,
            rows: Vec::new(),
        };
    }
    let m = summary.cultures.len() as f64;
    let mut rows: Vec<ControversyRow> = summary
        .item_ids
        .iter()
        .enumerate()
        .map(|(k, item_id)| {
            let consensus: Vec<f64> = summary.cultures.iter().map(|c| c.consensus[k]).collect();
            let mean = consensus.iter().sum::<f64>() / m;
            let variance = consensus.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            ControversyRow {
                item_id: item_id.clone(),
                consensus,
                variance,
                mean,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.variance
            .partial_cmp(&a.variance)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    ControversyTable { culture_ids, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::summary::CultureSummary;
    use approx::assert_abs_diff_eq;

    fn summary_from(values: Vec<Vec<f64>>, item_ids: Vec<&str>) -> ConsensusSummary {
        // values[c][k]
        let k = values[0].len();
        ConsensusSummary {
            cultures: values
                .into_iter()
                .enumerate()
                .map(|(c, consensus)| CultureSummary {
                    culture_id: c,
                    occupancy_count: 1,
                    consensus,
                    difficulty: vec![1.0; k],
                })
                .collect(),
            item_ids: item_ids.into_iter().map(String::from).collect(),
        }
    }

    #[test]
    fn identical_cultures_have_zero_variance() {
        let s = summary_from(
            vec![vec![0.3, 0.8], vec![0.3, 0.8], vec![0.3, 0.8]],
            vec!["a", "b"],
        );
        let t = controversy_ranking(&s);
        for row in &t.rows {
            assert_abs_diff_eq!(row.variance, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn extreme_two_culture_split_hits_quarter() {
        let s = summary_from(vec![vec![0.0001], vec![0.9999]], vec!["a"]);
        let t = controversy_ranking(&s);
        assert!((t.rows[0].variance - 0.25).abs() < 1e-3);
    }

    #[test]
    fn ranks_by_variance_descending() {
        // Survey items with per-culture consensus values from a published
        // four-culture table; the first should out-rank the second.
        let s = summary_from(
            vec![
                vec![0.18, 0.50],
                vec![0.75, 0.67],
                vec![0.02, 0.04],
                vec![0.94, 0.96],
            ],
            vec!["manufacturing_automation", "threats_to_democracy"],
        );
        let t = controversy_ranking(&s);
        assert_eq!(t.rows[0].item_id, "manufacturing_automation");
        assert_eq!(t.rows[1].item_id, "threats_to_democracy");
        assert_abs_diff_eq!(t.rows[0].variance, 0.14646875, epsilon = 1e-12);
        assert_abs_diff_eq!(t.rows[1].variance, 0.11121875, epsilon = 1e-12);
        assert_abs_diff_eq!(t.rows[0].mean, 0.4725, epsilon = 1e-12);
        assert_abs_diff_eq!(t.rows[1].mean, 0.5425, epsilon = 1e-12);
    }

    #[test]
    fn fewer_than_two_cultures_yields_empty_table() {
        let s = summary_from(vec![vec![0.5, 0.5]], vec!["a", "b"]);
        let t = controversy_ranking(&s);
        assert!(t.rows.is_empty());
        assert_eq!(t.culture_ids, vec![0]);
    }
}
