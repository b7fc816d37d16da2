//! Generative counterpart of the response model.
//!
//! `simulate` draws a full synthetic study (assignments, respondent
//! parameters, responses, missingness) from known ground truth, and is the
//! oracle for every parameter-recovery test. `draw_state_from_prior` and
//! `sample_responses` expose the two halves separately for prior-predictive
//! checks of the sampler.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::stick_breaking;
use crate::model::config::{ConcentrationPrior, StudyConfig};
use crate::model::grid::Grid;
use crate::model::link::inverse_logit;
use crate::model::types::{
    CultureParams, MixtureState, ModelState, RespondentParams, ResponseMatrix, CENTERING_TOL,
};

/// Latent logit-scale responses are clamped to this magnitude so the
/// transformed value stays strictly inside (0, 1) in double precision.
const LOGIT_CLAMP: f64 = 36.0;

/// How many fresh masks to try before giving up on the coverage invariants.
const MASK_RETRIES: usize = 100;

/// A normal hyperprior specification; `sd` may be zero to pin the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalSpec {
    pub mean: f64,
    pub sd: f64,
}

impl NormalSpec {
    pub fn new(mean: f64, sd: f64) -> Self {
        NormalSpec { mean, sd }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        if self.sd == 0.0 {
            self.mean
        } else {
            let z: f64 = rng.sample(StandardNormal);
            self.mean + self.sd * z
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.mean.is_finite() && self.sd >= 0.0 && self.sd.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "hyperparameter {name} must be finite with sd >= 0"
            )))
        }
    }
}

/// Hyperpriors the simulator draws respondent parameters from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RespondentHyper {
    pub log_competence: NormalSpec,
    pub shift: NormalSpec,
    pub log_scale: NormalSpec,
}

impl Default for RespondentHyper {
    fn default() -> Self {
        RespondentHyper {
            log_competence: NormalSpec::new(0.0, 0.5),
            shift: NormalSpec::new(0.0, 0.25),
            log_scale: NormalSpec::new(0.0, 0.25),
        }
    }
}

/// Configuration of one synthetic study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_respondents: usize,
    pub n_items: usize,
    pub true_cultures: Vec<CultureParams>,
    pub true_weights: Vec<f64>,
    #[serde(default)]
    pub respondent_hyperparams: RespondentHyper,
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_respondents < 2 || self.n_items < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 respondents and 2 items, got {}x{}",
                self.n_respondents, self.n_items
            )));
        }
        if self.true_cultures.is_empty() {
            return Err(Error::InvalidInput("no true cultures".into()));
        }
        if self.true_cultures.len() != self.true_weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cultures vs {} weights",
                self.true_cultures.len(),
                self.true_weights.len()
            )));
        }
        for c in &self.true_cultures {
            c.validate(self.n_items)?;
        }
        let sum: f64 = self.true_weights.iter().sum();
        if self.true_weights.iter().any(|&w| w <= 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights must be positive and sum to 1, sum is {sum}"
            )));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::InvalidInput(format!(
                "missing_rate must lie in [0, 1), got {}",
                self.missing_rate
            )));
        }
        self.respondent_hyperparams
            .log_competence
            .validate("log_competence")?;
        self.respondent_hyperparams.shift.validate("shift")?;
        self.respondent_hyperparams.log_scale.validate("log_scale")
    }
}

/// Everything the simulator knows that inference has to recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub state: ModelState,
}

impl GroundTruth {
    pub fn assignments(&self) -> &[usize] {
        &self.state.mixture.assignments
    }
}

/// Draws a synthetic study. Identical configs (including seed) produce
/// bit-identical output.
pub fn simulate(config: &SimConfig) -> Result<(ResponseMatrix, GroundTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_respondents;
    let k = config.n_items;

    let assignments: Vec<usize> = (0..n)
        .map(|_| sample_categorical(&mut rng, &config.true_weights))
        .collect();

    let hyper = &config.respondent_hyperparams;
    let respondents: Vec<RespondentParams> = (0..n)
        .map(|_| {
            RespondentParams::new(
                hyper.log_competence.draw(&mut rng),
                hyper.shift.draw(&mut rng),
                hyper.log_scale.draw(&mut rng),
            )
        })
        .collect();

    let mut values = Grid::filled(n, k, f64::NAN);
    for i in 0..n {
        let culture = &config.true_cultures[assignments[i]];
        for kk in 0..k {
            values[(i, kk)] = draw_response(
                culture.truths[kk],
                culture.log_difficulties[kk].exp(),
                &respondents[i],
                &mut rng,
            );
        }
    }

    let mask = draw_mask(n, k, config.missing_rate, &mut rng)?;

    let respondent_ids = (1..=n).map(|i| format!("r{i}")).collect();
    let item_ids = (1..=k).map(|i| format!("q{i}")).collect();
    let data = ResponseMatrix::new(values, mask, respondent_ids, item_ids)?;

    let sticks = crate::inference::sticks_from_weights(&config.true_weights)?;
    let weights = stick_breaking(&sticks)?;
    let truth = GroundTruth {
        state: ModelState {
            cultures: config.true_cultures.clone(),
            respondents,
            mixture: MixtureState {
                sticks,
                weights,
                assignments,
                concentration: 1.0,
            },
        },
    };
    Ok((data, truth))
}

fn draw_mask(n: usize, k: usize, missing_rate: f64, rng: &mut impl Rng) -> Result<Grid<bool>> {
    if missing_rate == 0.0 {
        return Ok(Grid::filled(n, k, true));
    }
    for _ in 0..MASK_RETRIES {
        let mut mask = Grid::filled(n, k, false);
        let mut col_seen = vec![false; k];
        let mut ok = true;
        for i in 0..n {
            let mut row_seen = false;
            for kk in 0..k {
                let observed = rng.random::<f64>() >= missing_rate;
                mask[(i, kk)] = observed;
                row_seen |= observed;
                col_seen[kk] |= observed;
            }
            ok &= row_seen;
        }
        if ok && col_seen.iter().all(|&c| c) {
            return Ok(mask);
        }
    }
    Err(Error::Simulation(format!(
        "no mask with full respondent/item coverage after {MASK_RETRIES} attempts \
         (missing_rate {missing_rate} too high for this size)"
    )))
}

/// One response draw: latent appraisal, bias transform, inverse link.
fn draw_response(
    truth: f64,
    difficulty: f64,
    resp: &RespondentParams,
    rng: &mut impl Rng,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let appraisal = truth + (difficulty / resp.competence()).sqrt() * z;
    let x = resp.scale_bias() * appraisal + resp.shift_bias;
    inverse_logit(x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP))
}

/// Draws a categorical index from (unnormalized) nonnegative weights.
pub(crate) fn sample_categorical(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.len() - 1
}

/// Draws a full model state from the priors in `config`. Log difficulties are
/// drawn iid and then centered per culture, which is exactly a draw from the
/// mean-zero-constrained prior.
pub fn draw_state_from_prior(
    config: &StudyConfig,
    n_respondents: usize,
    n_items: usize,
    rng: &mut impl Rng,
) -> ModelState {
    let j = config.truncation_j;
    let p = &config.priors;

    let concentration = match p.concentration {
        ConcentrationPrior::Fixed(a) => a,
        ConcentrationPrior::Gamma { shape, rate } => {
            Gamma::new(shape, 1.0 / rate).unwrap().sample(rng)
        }
    };
    let beta = Beta::new(1.0, concentration).unwrap();
    let mut sticks: Vec<f64> = (0..j - 1)
        .map(|_| beta.sample(rng).clamp(1e-12, 1.0 - 1e-12))
        .collect();
    sticks.push(1.0);
    let weights = stick_breaking(&sticks).expect("sticks are valid by construction");

    let assignments: Vec<usize> = (0..n_respondents)
        .map(|_| sample_categorical(rng, &weights))
        .collect();

    let cultures: Vec<CultureParams> = (0..j)
        .map(|_| draw_culture_from_prior(p.truth_sd, p.log_difficulty_sd, n_items, rng))
        .collect();

    let respondents: Vec<RespondentParams> = (0..n_respondents)
        .map(|_| draw_respondent_from_prior(p, rng))
        .collect();

    ModelState {
        cultures,
        respondents,
        mixture: MixtureState {
            sticks,
            weights,
            assignments,
            concentration,
        },
    }
}

pub(crate) fn draw_culture_from_prior(
    truth_sd: f64,
    log_difficulty_sd: f64,
    n_items: usize,
    rng: &mut impl Rng,
) -> CultureParams {
    let truths = (0..n_items)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            truth_sd * z
        })
        .collect();
    let log_difficulties = draw_centered_log_difficulties(log_difficulty_sd, n_items, rng);
    CultureParams::new(truths, log_difficulties)
}

/// Draws iid normals and centers them: an exact draw from the mean-zero
/// constrained prior on log difficulties.
pub(crate) fn draw_centered_log_difficulties(
    log_difficulty_sd: f64,
    n_items: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..n_items)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            log_difficulty_sd * z
        })
        .collect();
    let m = draws.iter().sum::<f64>() / n_items as f64;
    for d in &mut draws {
        *d -= m;
    }
    recenter_residual(&mut draws);
    draws
}

pub(crate) fn draw_respondent_from_prior(
    p: &crate::model::config::Priors,
    rng: &mut impl Rng,
) -> RespondentParams {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let z3: f64 = rng.sample(StandardNormal);
    RespondentParams::new(
        p.log_competence_sd * z1,
        p.shift_sd * z2,
        p.log_scale_sd * z3,
    )
}

/// Removes any floating-point residual from the mean so the centering
/// invariant holds to tight tolerance.
pub(crate) fn recenter_residual(log_difficulties: &mut [f64]) {
    let m = log_difficulties.iter().sum::<f64>() / log_difficulties.len() as f64;
    if m.abs() > CENTERING_TOL / 10.0 {
        for d in log_difficulties.iter_mut() {
            *d -= m;
        }
    }
}

/// Draws responses for every observed cell of `mask` given a fixed state.
pub fn sample_responses(
    state: &ModelState,
    mask: &Grid<bool>,
    rng: &mut impl Rng,
) -> Result<ResponseMatrix> {
    let n = state.n_respondents();
    let k = state.n_items();
    if mask.rows() != n || mask.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "mask is {}x{}, state is {n}x{k}",
            mask.rows(),
            mask.cols()
        )));
    }
    let mut values = Grid::filled(n, k, f64::NAN);
    for i in 0..n {
        let culture = state.culture_of(i);
        for kk in 0..k {
            if mask[(i, kk)] {
                values[(i, kk)] = draw_response(
                    culture.truths[kk],
                    culture.log_difficulties[kk].exp(),
                    &state.respondents[i],
                    rng,
                );
            }
        }
    }
    let respondent_ids = (1..=n).map(|i| format!("r{i}")).collect();
    let item_ids = (1..=k).map(|i| format!("q{i}")).collect();
    ResponseMatrix::new(values, mask.clone(), respondent_ids, item_ids)
}
