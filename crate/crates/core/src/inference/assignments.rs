//! Gibbs update of culture assignments.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::types::{ModelState, ResponseMatrix};

use super::sticks::log_stick_weights;

/// Unnormalized log posterior probabilities of each component for respondent
/// `i`: `log w_j + sum_k log density(x_ik | culture j)` over all truncated
/// components.
pub fn assignment_log_probs(data: &ResponseMatrix, state: &ModelState, i: usize) -> Vec<f64> {
    let log_weights = log_stick_weights(&state.mixture.sticks);
    assignment_log_probs_with(data, state, i, &log_weights)
}

fn assignment_log_probs_with(
    data: &ResponseMatrix,
    state: &ModelState,
    i: usize,
    log_weights: &[f64],
) -> Vec<f64> {
    let k = data.n_items();
    let resp = &state.respondents[i];
    let b = resp.scale_bias();
    let e = resp.competence();
    let a = resp.shift_bias;
    let mut log_probs = Vec::with_capacity(state.truncation());
    for (j, culture) in state.cultures.iter().enumerate() {
        let mut lp = log_weights[j];
        for kk in 0..k {
            if data.is_observed(i, kk) {
                let x = data.logit_value(i, kk);
                // Inlined cell density with respondent constants hoisted.
                let lam = culture.log_difficulties[kk].exp();
                let mean = b * culture.truths[kk] + a;
                let var = b * b * lam / e;
                let z = x - mean;
                lp += -0.5 * (z * z / var + var.ln() + 1.8378770664093453);
            }
        }
        log_probs.push(lp);
    }
    log_probs
}

/// Redraws every respondent's assignment from its categorical conditional
/// (log-sum-exp normalized). Respondents are processed in index order from a
/// single RNG stream, so results are reproducible.
pub fn update_assignments(
    data: &ResponseMatrix,
    state: &mut ModelState,
    rng: &mut impl Rng,
) -> Result<()> {
    let log_weights = log_stick_weights(&state.mixture.sticks);
    let n = data.n_respondents();
    for i in 0..n {
        let log_probs = assignment_log_probs_with(data, state, i, &log_weights);
        state.mixture.assignments[i] = sample_from_log_probs(&log_probs, rng)
            .map_err(|e| match e {
                Error::NonFinite(_) => {
                    Error::NonFinite(format!("assignment probabilities of respondent {i}"))
                }
                other => other,
            })?;
    }
    Ok(())
}

/// Draws an index proportional to `exp(log_probs)` using the log-sum-exp
/// trick.
pub(crate) fn sample_from_log_probs(log_probs: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let max = log_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite("categorical log probabilities".into()));
    }
    let mut total = 0.0;
    let probs: Vec<f64> = log_probs
        .iter()
        .map(|&lp| {
            let p = (lp - max).exp();
            total += p;
            p
        })
        .collect();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(j);
        }
    }
    Ok(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::Grid;
    use crate::model::types::{CultureParams, MixtureState, RespondentParams};
    use approx::assert_abs_diff_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data_2x2() -> ResponseMatrix {
        ResponseMatrix::new(
            Grid::from_vec(2, 2, vec![0.3, 0.6, 0.4, 0.7]),
            Grid::filled(2, 2, true),
            vec!["r1".into(), "r2".into()],
            vec!["q1".into(), "q2".into()],
        )
        .unwrap()
    }

    #[test]
    fn single_component_always_wins() {
        let data = data_2x2();
        let mut state = ModelState {
            cultures: vec![CultureParams::centered(vec![0.0, 0.0], vec![0.0, 0.0])],
            respondents: vec![RespondentParams::neutral(); 2],
            mixture: MixtureState {
                sticks: vec![1.0],
                weights: vec![1.0],
                assignments: vec![0, 0],
                concentration: 1.0,
            },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        update_assignments(&data, &mut state, &mut rng).unwrap();
        assert_eq!(state.mixture.assignments, vec![0, 0]);
    }

    #[test]
    fn identical_components_split_evenly() {
        let data = data_2x2();
        let culture = CultureParams::centered(vec![0.1, -0.2], vec![0.0, 0.0]);
        let state = ModelState {
            cultures: vec![culture.clone(), culture],
            respondents: vec![RespondentParams::neutral(); 2],
            mixture: MixtureState {
                sticks: vec![0.5, 1.0],
                weights: vec![0.5, 0.5],
                assignments: vec![0, 0],
                concentration: 1.0,
            },
        };
        for i in 0..2 {
            let lp = assignment_log_probs(&data, &state, i);
            let p0 = 1.0 / (1.0 + (lp[1] - lp[0]).exp());
            assert_abs_diff_eq!(p0, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_finite_probabilities_error() {
        let data = data_2x2();
        let mut state = ModelState {
            cultures: vec![CultureParams::new(vec![f64::NAN, 0.0], vec![0.0, 0.0])],
            respondents: vec![RespondentParams::neutral(); 2],
            mixture: MixtureState {
                sticks: vec![1.0],
                weights: vec![1.0],
                assignments: vec![0, 0],
                concentration: 1.0,
            },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(update_assignments(&data, &mut state, &mut rng).is_err());
    }
}
