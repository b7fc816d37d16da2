//! Truncated stick-breaking construction and its conjugate Gibbs update.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Keep Beta draws strictly inside (0, 1).
const STICK_CLAMP: f64 = 1e-12;

/// Transforms stick fractions into mixture weights:
/// `w_j = v_j * prod_{l<j} (1 - v_l)`. Requires every `v_j` in (0, 1] and the
/// final stick equal to 1, which makes the weights sum to one with the
/// truncation absorbing the tail.
pub fn stick_breaking(sticks: &[f64]) -> Result<Vec<f64>> {
    if sticks.is_empty() {
        return Err(Error::InvalidInput("empty stick vector".into()));
    }
    let last = *sticks.last().unwrap();
    if last != 1.0 {
        return Err(Error::Domain(format!(
            "final stick must be exactly 1, got {last}"
        )));
    }
    let mut weights = Vec::with_capacity(sticks.len());
    let mut remaining = 1.0;
    for &v in sticks {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("stick {v} outside (0, 1]")));
        }
        weights.push(v * remaining);
        remaining *= 1.0 - v;
    }
    Ok(weights)
}

/// Log weights computed in log space; safe against underflow at deep
/// truncations.
pub fn log_stick_weights(sticks: &[f64]) -> Vec<f64> {
    let mut log_weights = Vec::with_capacity(sticks.len());
    let mut log_remaining = 0.0;
    for &v in sticks {
        log_weights.push(v.ln() + log_remaining);
        log_remaining += (-v).ln_1p();
    }
    log_weights
}

/// Inverts [`stick_breaking`]: recovers stick fractions from positive weights
/// summing to one. Used when component labels are permuted.
pub fn sticks_from_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("empty weight vector".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput(
            "weights must be strictly positive".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("weights sum to {sum}")));
    }
    let j = weights.len();
    let mut sticks = Vec::with_capacity(j);
    // The leftover mass is tracked multiplicatively; a running subtraction
    // cancels catastrophically once earlier sticks approach 1.
    let mut remaining = 1.0;
    for (idx, &w) in weights.iter().enumerate() {
        if idx == j - 1 {
            sticks.push(1.0);
        } else {
            let v = (w / remaining).clamp(STICK_CLAMP, 1.0 - STICK_CLAMP);
            sticks.push(v);
            remaining *= 1.0 - v;
        }
    }
    Ok(sticks)
}

/// Conjugate update of the stick fractions given assignment counts:
/// `v_j ~ Beta(1 + n_j, concentration + sum_{l>j} n_l)` for j < J, last stick
/// pinned to 1.
pub fn update_sticks(
    assignments: &[usize],
    truncation_j: usize,
    concentration: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let mut counts = vec![0usize; truncation_j];
    for &a in assignments {
        counts[a] += 1;
    }
    let mut tail: Vec<f64> = vec![0.0; truncation_j];
    let mut acc = 0.0;
    for j in (0..truncation_j).rev() {
        tail[j] = acc;
        acc += counts[j] as f64;
    }
    let mut sticks = Vec::with_capacity(truncation_j);
    for j in 0..truncation_j - 1 {
        let a = 1.0 + counts[j] as f64;
        let b = concentration + tail[j];
        let v = Beta::new(a, b)
            .expect("Beta parameters are positive")
            .sample(rng);
        sticks.push(v.clamp(STICK_CLAMP, 1.0 - STICK_CLAMP));
    }
    sticks.push(1.0);
    sticks
}
