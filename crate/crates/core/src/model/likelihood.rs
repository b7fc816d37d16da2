//! Continuous response model likelihood.
//!
//! A respondent with competence E, shift bias a, and scale bias b answering an
//! item with consensus position T and difficulty lambda produces a latent
//! appraisal Y ~ Normal(T, sqrt(lambda / E)) and reports X = b * Y + a on the
//! logit scale, so
//!
//! ```text
//! X ~ Normal(b * T + a,  b * sqrt(lambda / E))
//! ```
//!
//! Densities are evaluated on the logit scale. The Jacobian of the logit
//! transform depends only on the data, cancels in every posterior conditional,
//! and is omitted throughout; reported log likelihoods are therefore
//! comparable only within a fixed dataset.

use crate::error::{Error, Result};
use crate::model::types::{ModelState, RespondentParams, ResponseMatrix};

const LN_2PI: f64 = 1.8378770664093453;

/// Log density of an observed response `x_obs` in (0, 1) for one cell.
/// Returns a non-finite value for invalid parameters (lambda <= 0, x_obs
/// outside (0, 1), or non-finite inputs).
pub fn cell_log_density(
    x_obs: f64,
    truth: f64,
    difficulty: f64,
    resp: &RespondentParams,
) -> f64 {
    if !(x_obs > 0.0 && x_obs < 1.0) {
        return f64::NAN;
    }
    let x = x_obs.ln() - (-x_obs).ln_1p();
    log_density_logit(x, truth, difficulty, resp)
}

/// Same density with the response already on the logit scale.
pub fn log_density_logit(x: f64, truth: f64, difficulty: f64, resp: &RespondentParams) -> f64 {
    if difficulty <= 0.0 {
        return f64::NAN;
    }
    let b = resp.scale_bias();
    let mean = b * truth + resp.shift_bias;
    let var = b * b * difficulty / resp.competence();
    let z = x - mean;
    -0.5 * (z * z / var + var.ln() + LN_2PI)
}

/// Joint log likelihood of all observed cells under `state`, with each
/// respondent's truths and difficulties taken from their assigned culture.
/// Masked cells contribute exactly zero. Summation order is fixed
/// (respondents outer, items inner) so results are reproducible.
pub fn log_likelihood(data: &ResponseMatrix, state: &ModelState) -> Result<f64> {
    let n = data.n_respondents();
    let k = data.n_items();
    if state.n_respondents() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {} respondents, data has {n}",
            state.n_respondents()
        )));
    }
    if state.n_items() != k {
        return Err(Error::DimensionMismatch(format!(
            "state has {} items, data has {k}",
            state.n_items()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        let culture = state.culture_of(i);
        let resp = &state.respondents[i];
        total += respondent_log_likelihood(data, i, culture.n_items(), |kk| {
            (culture.truths[kk], culture.log_difficulties[kk].exp())
        }, resp);
    }
    Ok(total)
}

/// Log likelihood of respondent `i`'s observed row under the given per-item
/// (truth, difficulty) lookup.
pub(crate) fn respondent_log_likelihood(
    data: &ResponseMatrix,
    i: usize,
    k: usize,
    item_params: impl Fn(usize) -> (f64, f64),
    resp: &RespondentParams,
) -> f64 {
    let mut total = 0.0;
    for kk in 0..k {
        if data.is_observed(i, kk) {
            let (t, lam) = item_params(kk);
            total += log_density_logit(data.logit_value(i, kk), t, lam, resp);
        }
    }
    total
}
