//! Random-walk Metropolis updates of respondent parameters.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::config::{Priors, ProposalSds, RespondentUpdate};
use crate::model::likelihood::log_density_logit;
use crate::model::simulate::draw_respondent_from_prior;
use crate::model::types::{ModelState, RespondentParams, ResponseMatrix};

use super::cultures::BlockStats;

/// Per-coordinate acceptance statistics of the respondent block.
#[derive(Debug, Clone, Copy, Default)]
pub struct RespondentStats {
    pub log_competence: BlockStats,
    pub shift: BlockStats,
    pub log_scale: BlockStats,
    pub joint: BlockStats,
}

/// Updates every respondent's (log competence, shift, log scale), either one
/// coordinate at a time or jointly. Respondents with no observed cells are
/// redrawn from the priors (their exact conditional).
pub fn update_respondent_params(
    data: &ResponseMatrix,
    state: &mut ModelState,
    priors: &Priors,
    sds: &ProposalSds,
    mode: RespondentUpdate,
    rng: &mut impl Rng,
) -> Result<RespondentStats> {
    let n = data.n_respondents();
    let mut stats = RespondentStats::default();
    for i in 0..n {
        let observed = (0..data.n_items()).any(|k| data.is_observed(i, k));
        if !observed {
            state.respondents[i] = draw_respondent_from_prior(priors, rng);
            continue;
        }
        match mode {
            RespondentUpdate::PerCoordinate => {
                update_coordinate(data, state, i, Coordinate::LogCompetence, priors, sds, rng)
                    .map(|a| stats.log_competence.absorb(a))?;
                update_coordinate(data, state, i, Coordinate::Shift, priors, sds, rng)
                    .map(|a| stats.shift.absorb(a))?;
                update_coordinate(data, state, i, Coordinate::LogScale, priors, sds, rng)
                    .map(|a| stats.log_scale.absorb(a))?;
            }
            RespondentUpdate::Joint => {
                update_joint(data, state, i, priors, sds, rng).map(|a| stats.joint.absorb(a))?;
            }
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy)]
enum Coordinate {
    LogCompetence,
    Shift,
    LogScale,
}

fn row_log_likelihood(
    data: &ResponseMatrix,
    state: &ModelState,
    i: usize,
    params: &RespondentParams,
) -> f64 {
    let culture = state.culture_of(i);
    let mut total = 0.0;
    for k in 0..data.n_items() {
        if data.is_observed(i, k) {
            total += log_density_logit(
                data.logit_value(i, k),
                culture.truths[k],
                culture.log_difficulties[k].exp(),
                params,
            );
        }
    }
    total
}

fn log_prior(params: &RespondentParams, priors: &Priors) -> f64 {
    let e = params.log_competence / priors.log_competence_sd;
    let a = params.shift_bias / priors.shift_sd;
    let b = params.log_scale_bias / priors.log_scale_sd;
    -0.5 * (e * e + a * a + b * b)
}

fn update_coordinate(
    data: &ResponseMatrix,
    state: &mut ModelState,
    i: usize,
    coord: Coordinate,
    priors: &Priors,
    sds: &ProposalSds,
    rng: &mut impl Rng,
) -> Result<BlockStats> {
    let current = state.respondents[i];
    let z: f64 = rng.sample(StandardNormal);
    let mut proposed = current;
    match coord {
        Coordinate::LogCompetence => proposed.log_competence += sds.log_competence * z,
        Coordinate::Shift => proposed.shift_bias += sds.shift * z,
        Coordinate::LogScale => proposed.log_scale_bias += sds.log_scale * z,
    }
    accept_or_reject(data, state, i, current, proposed, priors, rng)
}

fn update_joint(
    data: &ResponseMatrix,
    state: &mut ModelState,
    i: usize,
    priors: &Priors,
    sds: &ProposalSds,
    rng: &mut impl Rng,
) -> Result<BlockStats> {
    let current = state.respondents[i];
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let z3: f64 = rng.sample(StandardNormal);
    let proposed = RespondentParams::new(
        current.log_competence + sds.log_competence * z1,
        current.shift_bias + sds.shift * z2,
        current.log_scale_bias + sds.log_scale * z3,
    );
    accept_or_reject(data, state, i, current, proposed, priors, rng)
}

fn accept_or_reject(
    data: &ResponseMatrix,
    state: &mut ModelState,
    i: usize,
    current: RespondentParams,
    proposed: RespondentParams,
    priors: &Priors,
    rng: &mut impl Rng,
) -> Result<BlockStats> {
    let log_accept = row_log_likelihood(data, state, i, &proposed)
        + log_prior(&proposed, priors)
        - row_log_likelihood(data, state, i, &current)
        - log_prior(&current, priors);
    if log_accept.is_nan() {
        return Err(Error::NonFinite(format!(
            "respondent {i} acceptance ratio"
        )));
    }
    let accepted = log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp();
    if accepted {
        state.respondents[i] = proposed;
    }
    Ok(BlockStats {
        proposals: 1,
        accepts: accepted as u64,
    })
}
