//! Posterior consensus and difficulty summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{modal_assignment, PosteriorChain};
use crate::model::config::ConsensusMean;
use crate::model::link::inverse_logit;

/// Summary of one occupied culture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CultureSummary {
    pub culture_id: usize,
    /// Respondents whose modal assignment is this culture.
    pub occupancy_count: usize,
    /// Posterior consensus per item on the (0, 1) scale.
    pub consensus: Vec<f64>,
    /// Posterior mean difficulty per item (exp of mean log difficulty).
    pub difficulty: Vec<f64>,
}

/// Per-culture, per-item posterior summaries over a trailing window of
/// retained samples. Cultures are listed in ascending index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub cultures: Vec<CultureSummary>,
    pub item_ids: Vec<String>,
}

impl ConsensusSummary {
    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn total_occupancy(&self) -> usize {
        self.cultures.iter().map(|c| c.occupancy_count).sum()
    }
}

/// Summarizes a relabeled chain: for each culture occupied in the modal
/// assignment, the posterior mean consensus (averaged on the logit or the
/// response scale per `mode`) and mean difficulty over the final `window`
/// samples.
pub fn consensus_summary(
    chain: &PosteriorChain,
    item_ids: &[String],
    window: usize,
    mode: ConsensusMean,
) -> Result<ConsensusSummary> {
    if chain.samples.is_empty() {
        return Err(Error::EmptyChain);
    }
    if window == 0 {
        return Err(Error::InvalidInput("window must be at least 1".into()));
    }
    let k = chain.samples[0].n_items();
    if item_ids.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} item ids for {k} items",
            item_ids.len()
        )));
    }

    let modal = modal_assignment(chain, window)?;
    let j = chain.samples[0].truncation();
    let mut occupancy = vec![0usize; j];
    for &c in &modal {
        occupancy[c] += 1;
    }

    let available = chain.samples.len();
    let used = window.min(available);
    let tail = &chain.samples[available - used..];

    let mut cultures = Vec::new();
    for c in 0..j {
        if occupancy[c] == 0 {
            continue;
        }
        let mut consensus = Vec::with_capacity(k);
        let mut difficulty = Vec::with_capacity(k);
        for kk in 0..k {
            let mut truth_acc = 0.0;
            let mut logdiff_acc = 0.0;
            for s in tail {
                truth_acc += match mode {
                    ConsensusMean::LogitScale => s.cultures[c].truths[kk],
                    ConsensusMean::ResponseScale => inverse_logit(s.cultures[c].truths[kk]),
                };
                logdiff_acc += s.cultures[c].log_difficulties[kk];
            }
            let truth_mean = truth_acc / used as f64;
            consensus.push(match mode {
                ConsensusMean::LogitScale => inverse_logit(truth_mean),
                ConsensusMean::ResponseScale => truth_mean,
            });
            difficulty.push((logdiff_acc / used as f64).exp());
        }
        cultures.push(CultureSummary {
            culture_id: c,
            occupancy_count: occupancy[c],
            consensus,
            difficulty,
        });
    }

    Ok(ConsensusSummary {
        cultures,
        item_ids: item_ids.to_vec(),
    })
}
