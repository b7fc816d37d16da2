//! Label-switching repair and modal assignments.
//!
//! Mixture labels are only identified up to permutation, so raw chains can
//! swap culture indices between samples. `relabel` aligns every retained
//! sample to a smoothed running reference of truth vectors with a greedy
//! matching over occupied components; the per-sample likelihood is invariant
//! because parameters and assignments are permuted together.

use crate::error::{Error, Result};
use crate::inference::sticks::{stick_breaking, sticks_from_weights};
use crate::inference::PosteriorChain;
use crate::model::types::ModelState;

/// Smoothing factor for the running reference truths.
const REFERENCE_SMOOTHING: f64 = 0.1;

/// Returns a chain whose samples have culture indices permuted for label
/// stability. The first retained sample seeds the reference and keeps its
/// labels.
pub fn relabel(chain: &PosteriorChain) -> Result<PosteriorChain> {
    if chain.samples.is_empty() {
        return Err(Error::EmptyChain);
    }
    let j = chain.samples[0].truncation();
    let mut reference: Vec<Vec<f64>> = chain.samples[0]
        .cultures
        .iter()
        .map(|c| c.truths.clone())
        .collect();

    let mut samples = Vec::with_capacity(chain.samples.len());
    for state in &chain.samples {
        let occupied = state.mixture.occupied_components();
        let perm = match_components(state, &occupied, &reference, j);
        let permuted = apply_permutation(state, &perm)?;
        let counts = permuted.mixture.counts();
        for (c, culture) in permuted.cultures.iter().enumerate() {
            if counts[c] > 0 {
                for (r, t) in reference[c].iter_mut().zip(culture.truths.iter()) {
                    *r = (1.0 - REFERENCE_SMOOTHING) * *r + REFERENCE_SMOOTHING * t;
                }
            }
        }
        samples.push(permuted);
    }

    Ok(PosteriorChain {
        samples,
        config: chain.config.clone(),
        log_likelihood_trace: chain.log_likelihood_trace.clone(),
        seed: chain.seed,
    })
}

/// Greedy bipartite matching of occupied components to reference slots by
/// squared truth distance. Returns `perm[old_index] = new_index`.
fn match_components(
    state: &ModelState,
    occupied: &[usize],
    reference: &[Vec<f64>],
    j: usize,
) -> Vec<usize> {
    let mut perm = vec![usize::MAX; j];
    let mut slot_taken = vec![false; j];
    let mut comp_matched = vec![false; j];

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(occupied.len() * j);
    for &c in occupied {
        for (r, rref) in reference.iter().enumerate() {
            let cost: f64 = state.cultures[c]
                .truths
                .iter()
                .zip(rref.iter())
                .map(|(t, rr)| (t - rr) * (t - rr))
                .sum();
            pairs.push((cost, c, r));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut matched = 0;
    for &(_, c, r) in &pairs {
        if !comp_matched[c] && !slot_taken[r] {
            perm[c] = r;
            comp_matched[c] = true;
            slot_taken[r] = true;
            matched += 1;
            if matched == occupied.len() {
                break;
            }
        }
    }
    // Unoccupied components fill remaining slots in index order.
    let mut free_slots = (0..j).filter(|&r| !slot_taken[r]);
    for c in 0..j {
        if perm[c] == usize::MAX {
            perm[c] = free_slots.next().expect("slot counts match");
        }
    }
    perm
}

fn apply_permutation(state: &ModelState, perm: &[usize]) -> Result<ModelState> {
    let j = state.truncation();
    let mut cultures = state.cultures.clone();
    let mut weights = vec![0.0; j];
    for c in 0..j {
        cultures[perm[c]] = state.cultures[c].clone();
        weights[perm[c]] = state.mixture.weights[c];
    }
    let assignments = state
        .mixture
        .assignments
        .iter()
        .map(|&a| perm[a])
        .collect();
    // Weights are re-derived from back-solved sticks so the stick/weight
    // consistency invariant stays exact.
    let sticks = sticks_from_weights(&weights)?;
    let weights = stick_breaking(&sticks)?;
    Ok(ModelState {
        cultures,
        respondents: state.respondents.clone(),
        mixture: crate::model::types::MixtureState {
            sticks,
            weights,
            assignments,
            concentration: state.mixture.concentration,
        },
    })
}

/// Most frequent culture per respondent over the final `window` retained
/// samples (all samples, with a warning, if the chain is shorter). Ties break
/// toward the lower culture index.
pub fn modal_assignment(chain: &PosteriorChain, window: usize) -> Result<Vec<usize>> {
    if chain.samples.is_empty() {
        return Err(Error::EmptyChain);
    }
    if window == 0 {
        return Err(Error::InvalidInput("window must be at least 1".into()));
    }
    let available = chain.samples.len();
    let used = if available < window {
        log::warn!(
            "modal assignment window {window} exceeds {available} retained samples; using all"
        );
        available
    } else {
        window
    };
    let n = chain.samples[0].n_respondents();
    let j = chain.samples[0].truncation();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut counts = vec![0usize; j];
        for state in &chain.samples[available - used..] {
            counts[state.mixture.assignments[i]] += 1;
        }
        let mut best = 0;
        for c in 1..j {
            if counts[c] > counts[best] {
                best = c;
            }
        }
        labels.push(best);
    }
    Ok(labels)
}
