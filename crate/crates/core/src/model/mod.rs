//! Domain types, the response-model likelihood, and the generative simulator.

pub mod config;
pub mod grid;
pub mod likelihood;
pub mod link;
pub mod simulate;
pub mod types;

pub use grid::Grid;
pub use likelihood::{cell_log_density, log_likelihood};
pub use link::{inverse_logit, logit};
pub use simulate::simulate;
