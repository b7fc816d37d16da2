//! Per-culture ranking of items by posterior difficulty.

use serde::{Deserialize, Serialize};

use crate::analysis::summary::ConsensusSummary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyRanking {
    pub culture_id: usize,
    /// (item id, posterior mean difficulty), hardest first. The sort is
    /// stable, so equal difficulties keep item order.
    pub ranked: Vec<(String, f64)>,
    /// Item id of the top entry.
    pub most_challenging: String,
}

/// Ranks items by posterior mean difficulty within each culture, descending.
pub fn difficulty_ranking(summary: &ConsensusSummary) -> Vec<DifficultyRanking> {
    summary
        .cultures
        .iter()
        .map(|culture| {
            let mut ranked: Vec<(String, f64)> = summary
                .item_ids
                .iter()
                .cloned()
                .zip(culture.difficulty.iter().copied())
                .collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
            let most_challenging = ranked[0].0.clone();
            DifficultyRanking {
                culture_id: culture.culture_id,
                ranked,
                most_challenging,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::summary::CultureSummary;

    fn summary(difficulties: Vec<Vec<f64>>, item_ids: Vec<&str>) -> ConsensusSummary {
        let k = item_ids.len();
        ConsensusSummary {
            cultures: difficulties
                .into_iter()
                .enumerate()
                .map(|(c, difficulty)| CultureSummary {
                    culture_id: c,
                    occupancy_count: 1,
                    consensus: vec![0.5; k],
                    difficulty,
                })
                .collect(),
            item_ids: item_ids.into_iter().map(String::from).collect(),
        }
    }

    #[test]
    fn uniform_difficulties_keep_item_order() {
        let s = summary(vec![vec![1.0, 1.0, 1.0]], vec!["a", "b", "c"]);
        let r = difficulty_ranking(&s);
        let order: Vec<&str> = r[0].ranked.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(order, vec!["a", "b", "c"]);
        assert_eq!(r[0].most_challenging, "a");
    }

    #[test]
    fn hardest_item_ranks_first() {
        let s = summary(
            vec![vec![1.0, 5.0, 0.5], vec![2.0, 0.1, 0.3]],
            vec!["a", "b", "c"],
        );
        let r = difficulty_ranking(&s);
        assert_eq!(r[0].most_challenging, "b");
        assert_eq!(r[1].most_challenging, "a");
    }

    #[test]
    fn single_item_is_trivially_most_challenging() {
        let s = summary(vec![vec![0.7]], vec!["only"]);
        let r = difficulty_ranking(&s);
        assert_eq!(r[0].most_challenging, "only");
        assert_eq!(r[0].ranked.len(), 1);
    }
}
