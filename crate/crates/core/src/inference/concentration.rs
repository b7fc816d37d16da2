//! Concentration parameter update.
//!
//! In hyperprior mode this is the auxiliary-variable conjugate scheme of
//! Escobar and West: given the number of occupied components k and the sample
//! size n, draw an auxiliary eta ~ Beta(alpha + 1, n), then draw alpha from a
//! two-component mixture of Gammas whose stationary law is
//! p(alpha | k, n) ∝ p(alpha) alpha^k Gamma(alpha) / Gamma(alpha + n).

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::model::config::ConcentrationPrior;

/// Resamples the concentration given the current value and the assignments.
/// Fixed mode returns the constant unchanged.
pub fn update_concentration(
    assignments: &[usize],
    current: f64,
    prior: &ConcentrationPrior,
    rng: &mut impl Rng,
) -> f64 {
    match *prior {
        ConcentrationPrior::Fixed(a) => a,
        ConcentrationPrior::Gamma { shape, rate } => {
            let n = assignments.len();
            if n == 0 {
                return Gamma::new(shape, 1.0 / rate).unwrap().sample(rng);
            }
            let k = occupied_count(assignments) as f64;
            let n = n as f64;

            let eta: f64 = Beta::new(current + 1.0, n).unwrap().sample(rng);
            let rate_post = rate - eta.ln();
            // Odds of the higher-shape mixture component.
            let odds = (shape + k - 1.0) / (n * rate_post);
            let use_upper = rng.random::<f64>() < odds / (1.0 + odds);
            let shape_post = if use_upper {
                shape + k
            } else {
                shape + k - 1.0
            };
            Gamma::new(shape_post, 1.0 / rate_post)
                .expect("posterior Gamma parameters are positive")
                .sample(rng)
        }
    }
}

fn occupied_count(assignments: &[usize]) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    for &a in assignments {
        seen.insert(a);
    }
    seen.len()
}
