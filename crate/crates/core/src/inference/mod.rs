//! Metropolis-within-Gibbs sampler over the mixture posterior.
//!
//! One sweep updates, in order: assignments, stick fractions, concentration,
//! culture parameters (consensus positions then difficulties), respondent
//! parameters. Proposal scales adapt during burn-in only (Robbins-Monro
//! toward 0.44 per-coordinate acceptance) and are frozen afterwards so the
//! retained portion of the chain is a fixed kernel.

pub mod assignments;
pub mod concentration;
pub mod cultures;
pub mod diagnostics;
pub mod geweke;
pub mod relabel;
pub mod respondents;
pub mod sticks;

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::config::{RespondentUpdate, StudyConfig};
use crate::model::likelihood::log_likelihood;
use crate::model::types::{
    CultureParams, MixtureState, ModelState, RespondentParams, ResponseMatrix,
};

pub use assignments::{assignment_log_probs, update_assignments};
pub use concentration::update_concentration;
pub use cultures::{update_culture_params, BlockStats, CultureBlock};
pub use relabel::{modal_assignment, relabel};
pub use respondents::{update_respondent_params, RespondentStats};
pub use sticks::{log_stick_weights, stick_breaking, sticks_from_weights, update_sticks};

/// Ordered retained samples plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub samples: Vec<ModelState>,
    pub config: StudyConfig,
    pub log_likelihood_trace: Vec<f64>,
    pub seed: u64,
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// The number of trailing samples a summary window actually covers: the
/// requested window, clamped to the chain length.
pub fn consensus_window(chain: &PosteriorChain, window: usize) -> usize {
    window.min(chain.samples.len())
}

/// Sampler health report emitted alongside the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Number of occupied components in each retained sample.
    pub occupied_culture_count_trace: Vec<usize>,
    /// Post-burn-in Metropolis acceptance rates per proposal block.
    pub acceptance_rates: BTreeMap<String, f64>,
    /// Split-half potential scale reduction of the log-likelihood trace.
    pub rhat_loglik: f64,
    /// Effective sample size of the log-likelihood trace.
    pub ess_loglik: f64,
    pub warnings: Vec<String>,
}

/// Mutable sweep machinery: RNG, current proposal scales, and acceptance
/// bookkeeping. Exposed so prior-predictive checks can drive single sweeps.
pub struct SweepState {
    pub rng: ChaCha8Rng,
    pub proposal_sds: crate::model::config::ProposalSds,
    pub adapt: bool,
    accumulate: bool,
    totals: SweepTotals,
}

#[derive(Debug, Clone, Copy, Default)]
struct SweepTotals {
    difficulty: BlockStats,
    log_competence: BlockStats,
    shift: BlockStats,
    log_scale: BlockStats,
    joint: BlockStats,
}

impl SweepState {
    pub fn new(config: &StudyConfig) -> Self {
        SweepState {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            proposal_sds: config.proposal_sds,
            adapt: config.adapt_proposals,
            accumulate: false,
            totals: SweepTotals::default(),
        }
    }
}

/// Builds the deterministic initial state: everyone in component 0, all
/// parameters at their prior means, sticks at the prior mean of Beta(1, a).
pub fn initial_state(config: &StudyConfig, n_respondents: usize, n_items: usize) -> ModelState {
    let j = config.truncation_j;
    let alpha = config.priors.concentration.initial_value();
    let mut sticks = vec![1.0 / (1.0 + alpha); j - 1];
    sticks.push(1.0);
    let weights = stick_breaking(&sticks).expect("prior-mean sticks are valid");
    ModelState {
        cultures: vec![
            CultureParams::new(vec![0.0; n_items], vec![0.0; n_items]);
            j
        ],
        respondents: vec![RespondentParams::neutral(); n_respondents],
        mixture: MixtureState {
            sticks,
            weights,
            assignments: vec![0; n_respondents],
            concentration: alpha,
        },
    }
}

/// Runs one full Gibbs sweep in the documented block order.
pub fn gibbs_sweep(
    data: &ResponseMatrix,
    state: &mut ModelState,
    config: &StudyConfig,
    sweep: &mut SweepState,
) -> Result<()> {
    update_assignments(data, state, &mut sweep.rng)?;

    state.mixture.sticks = update_sticks(
        &state.mixture.assignments,
        config.truncation_j,
        state.mixture.concentration,
        &mut sweep.rng,
    );
    state.mixture.weights = stick_breaking(&state.mixture.sticks)?;

    state.mixture.concentration = update_concentration(
        &state.mixture.assignments,
        state.mixture.concentration,
        &config.priors.concentration,
        &mut sweep.rng,
    );

    update_culture_params(
        data,
        state,
        CultureBlock::Truths,
        &config.priors,
        sweep.proposal_sds.difficulty,
        &mut sweep.rng,
    )?;
    let difficulty_stats = update_culture_params(
        data,
        state,
        CultureBlock::Difficulties,
        &config.priors,
        sweep.proposal_sds.difficulty,
        &mut sweep.rng,
    )?;

    let respondent_stats = update_respondent_params(
        data,
        state,
        &config.priors,
        &sweep.proposal_sds,
        config.respondent_update,
        &mut sweep.rng,
    )?;

    if sweep.accumulate {
        sweep.totals.difficulty.absorb(difficulty_stats);
        sweep.totals.log_competence.absorb(respondent_stats.log_competence);
        sweep.totals.shift.absorb(respondent_stats.shift);
        sweep.totals.log_scale.absorb(respondent_stats.log_scale);
        sweep.totals.joint.absorb(respondent_stats.joint);
    }
    Ok(())
}

/// Robbins-Monro step toward a 0.44 acceptance rate, on the log scale.
fn adapt_scale(sd: &mut f64, stats: BlockStats, sweep_index: usize) {
    if stats.proposals == 0 {
        return;
    }
    let gamma = (sweep_index as f64).powf(-0.6);
    let log_sd = (sd.ln() + gamma * (stats.rate() - 0.44)).clamp(-10.0, 3.0);
    *sd = log_sd.exp();
}

/// Runs the full sampler. Identical (data, config, seed) produce an identical
/// chain; the seed enters only through the config.
pub fn fit(data: &ResponseMatrix, config: &StudyConfig) -> Result<(PosteriorChain, FitReport)> {
    config.validate()?;
    let n = data.n_respondents();
    let k = data.n_items();

    let mut state = initial_state(config, n, k);
    let mut sweep_state = SweepState::new(config);

    let retained_target = config.retained_samples();
    let mut samples = Vec::with_capacity(retained_target);
    let mut loglik_trace = Vec::with_capacity(retained_target);
    let mut occupied_trace = Vec::with_capacity(retained_target);
    let mut saturated = 0usize;

    for sweep in 1..=config.iterations {
        let in_burn_in = sweep <= config.burn_in;
        sweep_state.accumulate = true;
        let before = sweep_state.totals;
        gibbs_sweep(data, &mut state, config, &mut sweep_state)
            .map_err(|e| e.at_sweep(sweep))?;

        if in_burn_in {
            if sweep_state.adapt {
                let delta = |now: BlockStats, prev: BlockStats| BlockStats {
                    proposals: now.proposals - prev.proposals,
                    accepts: now.accepts - prev.accepts,
                };
                let totals = sweep_state.totals;
                adapt_scale(
                    &mut sweep_state.proposal_sds.difficulty,
                    delta(totals.difficulty, before.difficulty),
                    sweep,
                );
                adapt_scale(
                    &mut sweep_state.proposal_sds.log_competence,
                    delta(totals.log_competence, before.log_competence),
                    sweep,
                );
                adapt_scale(
                    &mut sweep_state.proposal_sds.shift,
                    delta(totals.shift, before.shift),
                    sweep,
                );
                adapt_scale(
                    &mut sweep_state.proposal_sds.log_scale,
                    delta(totals.log_scale, before.log_scale),
                    sweep,
                );
                if config.respondent_update == RespondentUpdate::Joint {
                    let joint = delta(totals.joint, before.joint);
                    // Joint proposals scale all three respondent blocks together.
                    adapt_scale(&mut sweep_state.proposal_sds.log_competence, joint, sweep);
                    adapt_scale(&mut sweep_state.proposal_sds.shift, joint, sweep);
                    adapt_scale(&mut sweep_state.proposal_sds.log_scale, joint, sweep);
                }
            }
            // Burn-in statistics never enter the report.
            sweep_state.totals = SweepTotals::default();
        }

        let ll = log_likelihood(data, &state).map_err(|e| e.at_sweep(sweep))?;
        if !ll.is_finite() {
            return Err(Error::NonFinite("log likelihood".into()).at_sweep(sweep));
        }

        if !in_burn_in && (sweep - config.burn_in) % config.thin == 0 {
            let occupied = state.mixture.occupied_count();
            if occupied == config.truncation_j {
                saturated += 1;
            }
            occupied_trace.push(occupied);
            loglik_trace.push(ll);
            samples.push(state.clone());
        }
    }

    let totals = sweep_state.totals;
    let mut acceptance_rates = BTreeMap::new();
    let mut push_rate = |name: &str, stats: BlockStats| {
        if stats.proposals > 0 {
            acceptance_rates.insert(name.to_string(), stats.rate());
        }
    };
    push_rate("difficulty", totals.difficulty);
    push_rate("log_competence", totals.log_competence);
    push_rate("shift", totals.shift);
    push_rate("log_scale", totals.log_scale);
    push_rate("respondent_joint", totals.joint);

    let mut warnings = Vec::new();
    if saturated > 0 {
        warnings.push(format!(
            "{saturated} retained sample(s) occupy all {} truncated components; \
             raise truncation_j",
            config.truncation_j
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let report = FitReport {
        occupied_culture_count_trace: occupied_trace,
        acceptance_rates,
        rhat_loglik: diagnostics::split_rhat(&loglik_trace),
        ess_loglik: diagnostics::effective_sample_size(&loglik_trace),
        warnings,
    };
    let chain = PosteriorChain {
        samples,
        config: config.clone(),
        log_likelihood_trace: loglik_trace,
        seed: config.seed,
    };
    Ok((chain, report))
}
