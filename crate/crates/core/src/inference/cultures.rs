//! Updates of per-culture parameters: Gaussian-conjugate consensus positions
//! and random-walk Metropolis log difficulties.
//!
//! Log difficulties carry a per-culture mean-zero identifiability constraint.
//! A proposal on item k therefore moves the whole block along a direction
//! that keeps the constraint satisfied: the proposed step delta lands as
//! `+delta (1 - 1/K)` on item k, `-delta / K` on every other item, and
//! `-delta / K` on the log competence of every respondent assigned to the
//! culture. The likelihood only changes through column k (the common shift of
//! log difficulties and log competences cancels cell-by-cell), and the
//! acceptance ratio includes the prior terms of the whole block plus the
//! shifted competences, which makes the move exactly reversible on the
//! constrained space. Empty cultures are refreshed from the (centered) prior.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::config::Priors;
use crate::model::likelihood::log_density_logit;
use crate::model::simulate::{draw_centered_log_difficulties, recenter_residual};
use crate::model::types::{ModelState, ResponseMatrix};

/// Which parameter block of each culture to update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CultureBlock {
    Truths,
    Difficulties,
}

/// Acceptance bookkeeping for one Metropolis block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BlockStats {
    pub proposals: u64,
    pub accepts: u64,
}

impl BlockStats {
    pub fn rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepts as f64 / self.proposals as f64
        }
    }

    pub fn absorb(&mut self, other: BlockStats) {
        self.proposals += other.proposals;
        self.accepts += other.accepts;
    }
}

/// Updates the chosen block for every culture. Returns Metropolis statistics
/// (zero for the conjugate truth block).
pub fn update_culture_params(
    data: &ResponseMatrix,
    state: &mut ModelState,
    block: CultureBlock,
    priors: &Priors,
    difficulty_proposal_sd: f64,
    rng: &mut impl Rng,
) -> Result<BlockStats> {
    let members = members_by_culture(state);
    match block {
        CultureBlock::Truths => {
            update_truths(data, state, &members, priors, rng)?;
            Ok(BlockStats::default())
        }
        CultureBlock::Difficulties => update_difficulties(
            data,
            state,
            &members,
            priors,
            difficulty_proposal_sd,
            rng,
        ),
    }
}

fn members_by_culture(state: &ModelState) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); state.truncation()];
    for (i, &a) in state.mixture.assignments.iter().enumerate() {
        members[a].push(i);
    }
    members
}

/// Gaussian-conjugate draw of every consensus position. Each observation of
/// an assigned respondent contributes the de-biased value (x - a_i) / b_i
/// with precision E_i / lambda_ck; the prior is Normal(0, truth_sd^2).
fn update_truths(
    data: &ResponseMatrix,
    state: &mut ModelState,
    members: &[Vec<usize>],
    priors: &Priors,
    rng: &mut impl Rng,
) -> Result<()> {
    let k = data.n_items();
    let prior_precision = 1.0 / (priors.truth_sd * priors.truth_sd);
    for c in 0..state.truncation() {
        if members[c].is_empty() {
            for t in state.cultures[c].truths.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *t = priors.truth_sd * z;
            }
            continue;
        }
        for kk in 0..k {
            let lam = state.cultures[c].log_difficulties[kk].exp();
            let mut precision = prior_precision;
            let mut weighted_sum = 0.0;
            for &i in &members[c] {
                if data.is_observed(i, kk) {
                    let resp = &state.respondents[i];
                    let w = resp.competence() / lam;
                    let debiased = (data.logit_value(i, kk) - resp.shift_bias) / resp.scale_bias();
                    precision += w;
                    weighted_sum += w * debiased;
                }
            }
            let mean = weighted_sum / precision;
            let sd = precision.recip().sqrt();
            if !(mean.is_finite() && sd.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "truth conditional of culture {c} item {kk}"
                )));
            }
            let z: f64 = rng.sample(StandardNormal);
            state.cultures[c].truths[kk] = mean + sd * z;
        }
    }
    Ok(())
}

fn update_difficulties(
    data: &ResponseMatrix,
    state: &mut ModelState,
    members: &[Vec<usize>],
    priors: &Priors,
    proposal_sd: f64,
    rng: &mut impl Rng,
) -> Result<BlockStats> {
    let k = data.n_items();
    let kf = k as f64;
    let difficulty_var = priors.log_difficulty_sd * priors.log_difficulty_sd;
    let competence_var = priors.log_competence_sd * priors.log_competence_sd;
    let mut stats = BlockStats::default();

    for c in 0..state.truncation() {
        if members[c].is_empty() {
            state.cultures[c].log_difficulties =
                draw_centered_log_difficulties(priors.log_difficulty_sd, k, rng);
            continue;
        }
        let n_c = members[c].len() as f64;
        for kk in 0..k {
            stats.proposals += 1;
            let z: f64 = rng.sample(StandardNormal);
            let delta = proposal_sd * z;

            let current = state.cultures[c].log_difficulties[kk];
            let lam_old = current.exp();
            let lam_new = (current + delta).exp();

            // Likelihood changes only through column kk: the simultaneous
            // -delta/K shift of the whole difficulty block and of assigned
            // competences cancels in every other column.
            let mut delta_loglik = 0.0;
            for &i in &members[c] {
                if data.is_observed(i, kk) {
                    let resp = &state.respondents[i];
                    let x = data.logit_value(i, kk);
                    let t = state.cultures[c].truths[kk];
                    delta_loglik += log_density_logit(x, t, lam_new, resp)
                        - log_density_logit(x, t, lam_old, resp);
                }
            }

            // Prior on the difficulty block: ||u'||^2 - ||u||^2 for the
            // centered move u' = u + delta e_k - (delta/K) 1, with mean(u)=0.
            let delta_sq_u = 2.0 * delta * current + delta * delta * (1.0 - 1.0 / kf);
            // Prior on shifted competences: each assigned log E moves by
            // -delta/K.
            let sum_log_e: f64 = members[c]
                .iter()
                .map(|&i| state.respondents[i].log_competence)
                .sum();
            let delta_sq_e =
                -2.0 * delta / kf * sum_log_e + n_c * delta * delta / (kf * kf);

            let log_accept = delta_loglik
                - delta_sq_u / (2.0 * difficulty_var)
                - delta_sq_e / (2.0 * competence_var);
            if !log_accept.is_finite() {
                return Err(Error::NonFinite(format!(
                    "difficulty acceptance ratio of culture {c} item {kk}"
                )));
            }
            if log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp() {
                stats.accepts += 1;
                let shift = delta / kf;
                for (idx, d) in state.cultures[c].log_difficulties.iter_mut().enumerate() {
                    if idx == kk {
                        *d += delta - shift;
                    } else {
                        *d -= shift;
                    }
                }
                for &i in &members[c] {
                    state.respondents[i].log_competence -= shift;
                }
            }
        }
        recenter_residual(&mut state.cultures[c].log_difficulties);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::Grid;
    use crate::model::likelihood::log_likelihood;
    use crate::model::types::{CultureParams, MixtureState, RespondentParams, ResponseMatrix};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(n: usize, k: usize) -> (ResponseMatrix, ModelState) {
        let mut values = Grid::filled(n, k, 0.0);
        for i in 0..n {
            for kk in 0..k {
                values[(i, kk)] = 0.1 + 0.8 * ((i * k + kk) as f64 + 0.5) / (n * k) as f64;
            }
        }
        let data = ResponseMatrix::new(
            values,
            Grid::filled(n, k, true),
            (1..=n).map(|i| format!("r{i}")).collect(),
            (1..=k).map(|i| format!("q{i}")).collect(),
        )
        .unwrap();
        let state = ModelState {
            cultures: vec![
                CultureParams::centered(vec![0.5; k], vec![0.2; k]),
                CultureParams::centered(vec![-0.5; k], vec![0.0; k]),
            ],
            respondents: (0..n)
                .map(|i| RespondentParams::new(0.1 * (i as f64 % 3.0 - 1.0), 0.05, -0.02))
                .collect(),
            mixture: MixtureState {
                sticks: vec![0.6, 1.0],
                weights: vec![0.6, 0.4],
                assignments: (0..n).map(|i| i % 2).collect(),
                concentration: 1.0,
            },
        };
        (data, state)
    }

    #[test]
    fn truths_follow_flat_prior_conditional() {
        // One respondent, E = 1, lambda = 1, a = 0, b = 1, nearly flat prior:
        // the conditional is Normal(X, 1).
        let data = ResponseMatrix::new(
            Grid::from_vec(2, 2, vec![0.3, 0.3, 0.3, 0.3]),
            Grid::from_vec(2, 2, vec![true, true, true, false]),
            vec!["r1".into(), "r2".into()],
            vec!["q1".into(), "q2".into()],
        )
        .unwrap();
        let mut state = ModelState {
            cultures: vec![
                CultureParams::centered(vec![0.0, 0.0], vec![0.0, 0.0]),
                CultureParams::centered(vec![0.0, 0.0], vec![0.0, 0.0]),
            ],
            respondents: vec![RespondentParams::neutral(), RespondentParams::neutral()],
            mixture: MixtureState {
                sticks: vec![0.5, 1.0],
                weights: vec![0.5, 0.5],
                assignments: vec![0, 1],
                concentration: 1.0,
            },
        };
        let priors = Priors {
            truth_sd: 1e9,
            ..Priors::default()
        };
        let x = data.logit_value(0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 20_000;
        let (mut total, mut total_sq) = (0.0, 0.0);
        for _ in 0..m {
            update_culture_params(
                &data,
                &mut state,
                CultureBlock::Truths,
                &priors,
                0.1,
                &mut rng,
            )
            .unwrap();
            let t = state.cultures[0].truths[0];
            total += t;
            total_sq += t * t;
        }
        let mean = total / m as f64;
        let var = total_sq / m as f64 - mean * mean;
        let se = (1.0 / m as f64).sqrt();
        assert!((mean - x).abs() < 4.0 * se, "mean {mean} vs {x}");
        assert!((var - 1.0).abs() < 0.05, "var {var} vs 1.0");
    }

    #[test]
    fn empty_culture_draws_truths_from_prior() {
        let (data, mut state) = fixture(4, 3);
        state.mixture.assignments = vec![0; 4];
        let priors = Priors::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 20_000;
        let (mut total, mut total_sq) = (0.0, 0.0);
        for _ in 0..m {
            update_culture_params(
                &data,
                &mut state,
                CultureBlock::Truths,
                &priors,
                0.1,
                &mut rng,
            )
            .unwrap();
            let t = state.cultures[1].truths[0];
            total += t;
            total_sq += t * t;
        }
        let mean = total / m as f64;
        let var = total_sq / m as f64 - mean * mean;
        let se = priors.truth_sd / (m as f64).sqrt();
        assert!(mean.abs() < 4.0 * se, "prior mean off: {mean}");
        let sd_expected = priors.truth_sd;
        assert!(
            (var.sqrt() - sd_expected).abs() < 0.05,
            "prior sd off: {}",
            var.sqrt()
        );
    }

    #[test]
    fn difficulties_stay_centered_and_likelihood_matches(
    ) {
        let (data, mut state) = fixture(6, 4);
        let priors = Priors::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            update_culture_params(
                &data,
                &mut state,
                CultureBlock::Difficulties,
                &priors,
                0.3,
                &mut rng,
            )
            .unwrap();
            for c in &state.cultures {
                let m: f64 =
                    c.log_difficulties.iter().sum::<f64>() / c.log_difficulties.len() as f64;
                assert!(m.abs() < 1e-10, "centering drifted: {m}");
            }
            state.validate().unwrap();
        }
        assert!(log_likelihood(&data, &state).unwrap().is_finite());
    }

    #[test]
    fn difficulty_moves_are_accepted_and_rejected() {
        let (data, mut state) = fixture(10, 5);
        let priors = Priors::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut stats = BlockStats::default();
        for _ in 0..100 {
            stats.absorb(
                update_culture_params(
                    &data,
                    &mut state,
                    CultureBlock::Difficulties,
                    &priors,
                    0.8,
                    &mut rng,
                )
                .unwrap(),
            );
        }
        assert!(stats.proposals > 0);
        let rate = stats.rate();
        assert!(rate > 0.05 && rate < 0.999, "degenerate rate {rate}");
    }
}
