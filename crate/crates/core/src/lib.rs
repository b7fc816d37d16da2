//! Cultural consensus analysis with an unbounded number of consensus groups.
//!
//! The library fits a mixture of continuous response models to a
//! respondent-by-item survey matrix. Each respondent belongs to a latent
//! "culture" with its own per-item consensus positions and difficulties;
//! respondents carry a competence level and shift/scale response biases.
//! The number of cultures is inferred with a Dirichlet-process prior,
//! represented by a truncated stick-breaking construction and sampled with
//! Metropolis-within-Gibbs.
//!
//! The crate is organized around three layers:
//!
//! * [`model`] — domain types, the response-model likelihood, and a
//!   generative simulator used for parameter-recovery studies.
//! * [`inference`] — the Gibbs sampler ([`inference::fit`]), relabeling of
//!   posterior samples, modal assignments, and convergence diagnostics.
//! * [`analysis`] — posterior summaries: consensus tables, allocation
//!   entropy, controversy and difficulty rankings, covariate crosstabs.

pub mod analysis;
pub mod error;
pub mod inference;
pub mod model;
pub mod recovery;

pub use error::{Error, Result};
pub use model::config::{
    ConcentrationPrior, ConsensusMean, Priors, ProposalSds, RescaleRule, RespondentUpdate,
    StudyConfig,
};
pub use model::simulate::{GroundTruth, NormalSpec, RespondentHyper, SimConfig};
pub use model::types::{
    CultureParams, MixtureState, ModelState, RespondentParams, ResponseMatrix,
};
pub use inference::{FitReport, PosteriorChain};
