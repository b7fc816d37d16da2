//! Study configuration: priors, sampler schedule, proposal scales, and
//! data-handling options. All fields have serde defaults so partial JSON
//! configs work.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior on the Dirichlet-process concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationPrior {
    /// Keep the concentration at a constant.
    Fixed(f64),
    /// Gamma(shape, rate) hyperprior, resampled each sweep.
    Gamma { shape: f64, rate: f64 },
}

impl ConcentrationPrior {
    /// Value used to initialize the chain: the constant, or the prior mean.
    pub fn initial_value(&self) -> f64 {
        match *self {
            ConcentrationPrior::Fixed(a) => a,
            ConcentrationPrior::Gamma { shape, rate } => shape / rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConcentrationPrior::Fixed(a) if a > 0.0 && a.is_finite() => Ok(()),
            ConcentrationPrior::Gamma { shape, rate } if shape > 0.0 && rate > 0.0 => Ok(()),
            _ => Err(Error::InvalidInput(
                "concentration prior parameters must be positive".into(),
            )),
        }
    }
}

/// Prior standard deviations for all parameter blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Priors {
    pub truth_sd: f64,
    pub log_competence_sd: f64,
    pub log_difficulty_sd: f64,
    pub shift_sd: f64,
    pub log_scale_sd: f64,
    pub concentration: ConcentrationPrior,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            truth_sd: 2.0,
            log_competence_sd: 1.0,
            log_difficulty_sd: 1.0,
            shift_sd: 0.5,
            log_scale_sd: 0.5,
            concentration: ConcentrationPrior::Fixed(1.0),
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [
            ("truth_sd", self.truth_sd),
            ("log_competence_sd", self.log_competence_sd),
            ("log_difficulty_sd", self.log_difficulty_sd),
            ("shift_sd", self.shift_sd),
            ("log_scale_sd", self.log_scale_sd),
        ] {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "prior {name} must be positive, got {sd}"
                )));
            }
        }
        self.concentration.validate()
    }
}

/// Random-walk proposal standard deviations per Metropolis block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalSds {
    pub difficulty: f64,
    pub log_competence: f64,
    pub shift: f64,
    pub log_scale: f64,
}

impl Default for ProposalSds {
    fn default() -> Self {
        ProposalSds {
            difficulty: 0.1,
            log_competence: 0.1,
            shift: 0.1,
            log_scale: 0.1,
        }
    }
}

impl ProposalSds {
    pub fn validate(&self) -> Result<()> {
        for (name, sd) in [
            ("difficulty", self.difficulty),
            ("log_competence", self.log_competence),
            ("shift", self.shift),
            ("log_scale", self.log_scale),
        ] {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "proposal sd {name} must be positive, got {sd}"
                )));
            }
        }
        Ok(())
    }
}

/// How ordinal ratings map into the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum RescaleRule {
    /// Rating r of R levels maps to the bin midpoint (r - 0.5) / R.
    Midpoint,
    /// Rating r maps affinely onto [epsilon, 1 - epsilon].
    Affine { epsilon: f64 },
}

impl RescaleRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RescaleRule::Midpoint => Ok(()),
            RescaleRule::Affine { epsilon } if epsilon > 0.0 && epsilon < 0.5 => Ok(()),
            RescaleRule::Affine { epsilon } => Err(Error::InvalidInput(format!(
                "affine rescale epsilon must lie in (0, 0.5), got {epsilon}"
            ))),
        }
    }
}

/// Whether respondent parameters are proposed jointly or one coordinate at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RespondentUpdate {
    PerCoordinate,
    Joint,
}

/// How per-item consensus is summarized from the posterior truth trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusMean {
    /// Average on the logit scale, then inverse-logit (default).
    LogitScale,
    /// Inverse-logit each sample, then average on the (0, 1) scale.
    ResponseScale,
}

/// Full study configuration: truncation, schedule, seed, priors, proposals,
/// and data-handling options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    /// Truncation level of the stick-breaking representation.
    pub truncation_j: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub priors: Priors,
    pub proposal_sds: ProposalSds,
    /// Number of ordinal response levels expected in raw survey files.
    pub ordinal_levels: u32,
    pub rescale: RescaleRule,
    /// Adapt proposal scales during burn-in toward a 0.44 acceptance rate.
    pub adapt_proposals: bool,
    pub respondent_update: RespondentUpdate,
    pub consensus_mean: ConsensusMean,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            truncation_j: 20,
            iterations: 4000,
            burn_in: 2000,
            thin: 10,
            seed: 0,
            priors: Priors::default(),
            proposal_sds: ProposalSds::default(),
            ordinal_levels: 4,
            rescale: RescaleRule::Midpoint,
            adapt_proposals: true,
            respondent_update: RespondentUpdate::PerCoordinate,
            consensus_mean: ConsensusMean::LogitScale,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation_j < 2 {
            return Err(Error::InvalidInput(format!(
                "truncation_j must be at least 2, got {}",
                self.truncation_j
            )));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidInput(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin < 1 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        if self.ordinal_levels < 2 {
            return Err(Error::InvalidInput(format!(
                "ordinal_levels must be at least 2, got {}",
                self.ordinal_levels
            )));
        }
        self.priors.validate()?;
        self.proposal_sds.validate()?;
        self.rescale.validate()
    }

    /// Number of samples the chain will retain.
    pub fn retained_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}
