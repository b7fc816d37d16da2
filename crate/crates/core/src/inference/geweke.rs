//! Joint-distribution test of sampler correctness.
//!
//! Two ways of sampling the joint distribution of (parameters, data) must
//! agree if the Gibbs kernel leaves the posterior invariant for every
//! dataset:
//!
//! * forward: draw parameters from the prior, then data given parameters;
//! * successive-conditional: alternate one Gibbs sweep given the current
//!   data with a fresh draw of data given the current parameters.
//!
//! The test compares scalar summaries of the parameter state between the two
//! sample streams, standardizing by Monte Carlo standard errors (the chain
//! stream's error is inflated by its integrated autocorrelation time). A
//! correct sampler keeps every summary within a few standard errors; a broken
//! conditional shows up as a drift that grows past any threshold as rounds
//! increase.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inference::diagnostics::autocorrelation_time;
use crate::inference::{gibbs_sweep, SweepState};
use crate::model::config::StudyConfig;
use crate::model::grid::Grid;
use crate::model::simulate::{draw_state_from_prior, sample_responses};
use crate::model::types::ModelState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeConfig {
    pub n_respondents: usize,
    pub n_items: usize,
    pub rounds: usize,
    /// Priors, truncation, and proposal scales; the schedule fields are
    /// ignored. Adaptation is always off inside the test.
    pub study: StudyConfig,
    pub seed: u64,
}

/// One monitored scalar summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorResult {
    pub name: String,
    pub forward_mean: f64,
    pub chain_mean: f64,
    /// |forward - chain| standardized by the combined standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GewekeSummary {
    pub monitors: Vec<MonitorResult>,
}

impl GewekeSummary {
    pub fn max_z(&self) -> f64 {
        self.monitors.iter().map(|m| m.z_score).fold(0.0, f64::max)
    }

    pub fn monitor(&self, name: &str) -> Option<&MonitorResult> {
        self.monitors.iter().find(|m| m.name == name)
    }
}

const MONITOR_NAMES: [&str; 5] = [
    "truth_mean",
    "competence_mean",
    "occupied_count",
    "shift_mean",
    "first_stick",
];

fn monitors(state: &ModelState) -> [f64; 5] {
    let j = state.truncation();
    let k = state.n_items();
    let n = state.n_respondents();
    let truth_mean = state
        .cultures
        .iter()
        .flat_map(|c| c.truths.iter())
        .sum::<f64>()
        / (j * k) as f64;
    let competence_mean = state
        .respondents
        .iter()
        .map(|r| r.competence())
        .sum::<f64>()
        / n as f64;
    let shift_mean = state.respondents.iter().map(|r| r.shift_bias).sum::<f64>() / n as f64;
    [
        truth_mean,
        competence_mean,
        state.mixture.occupied_count() as f64,
        shift_mean,
        state.mixture.sticks[0],
    ]
}

/// Runs the joint-distribution test and returns per-monitor z-scores.
pub fn run_geweke(config: &GewekeConfig) -> Result<GewekeSummary> {
    let mut study = config.study.clone();
    study.adapt_proposals = false;
    study.seed = config.seed;
    study.validate()?;
    let n = config.n_respondents;
    let k = config.n_items;
    let full_mask = Grid::filled(n, k, true);
    let rounds = config.rounds;

    // Forward stream: iid draws from the prior-predictive joint.
    let mut forward_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x00c0_ffee_f00d_d00d);
    let mut forward = vec![Vec::with_capacity(rounds); MONITOR_NAMES.len()];
    for _ in 0..rounds {
        let state = draw_state_from_prior(&study, n, k, &mut forward_rng);
        for (acc, value) in forward.iter_mut().zip(monitors(&state)) {
            acc.push(value);
        }
    }

    // Successive-conditional stream, started from an exact joint draw.
    let mut sweep_state = SweepState::new(&study);
    let mut state = draw_state_from_prior(&study, n, k, &mut sweep_state.rng);
    let mut data = sample_responses(&state, &full_mask, &mut sweep_state.rng)?;
    let mut chain = vec![Vec::with_capacity(rounds); MONITOR_NAMES.len()];
    for _ in 0..rounds {
        gibbs_sweep(&data, &mut state, &study, &mut sweep_state)?;
        data = sample_responses(&state, &full_mask, &mut sweep_state.rng)?;
        for (acc, value) in chain.iter_mut().zip(monitors(&state)) {
            acc.push(value);
        }
    }

    let monitors = MONITOR_NAMES
        .iter()
        .enumerate()
        .map(|(idx, name)| {
            let f = &forward[idx];
            let c = &chain[idx];
            let (fm, fv) = mean_var(f);
            let (cm, cv) = mean_var(c);
            let f_se2 = fv / rounds as f64;
            let tau = autocorrelation_time(c);
            let c_se2 = cv * tau / rounds as f64;
            let denom = (f_se2 + c_se2).sqrt();
            let z = if denom > 0.0 {
                (fm - cm).abs() / denom
            } else if (fm - cm).abs() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            MonitorResult {
                name: name.to_string(),
                forward_mean: fm,
                chain_mean: cm,
                z_score: z,
            }
        })
        .collect();

    Ok(GewekeSummary { monitors })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
