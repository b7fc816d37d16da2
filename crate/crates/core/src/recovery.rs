//! Parameter-recovery benchmarks: canned simulation configurations with known
//! ground truth, plus scoring of a fitted chain against that truth.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{adjusted_rand_index, consensus_summary};
use crate::error::Result;
use crate::inference::{fit, modal_assignment, relabel, PosteriorChain};
use crate::model::config::StudyConfig;
use crate::model::link::inverse_logit;
use crate::model::simulate::{simulate, GroundTruth, NormalSpec, RespondentHyper, SimConfig};
use crate::model::types::CultureParams;

/// A simulation plus the study configuration used to fit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverConfig {
    pub sim: SimConfig,
    pub study: StudyConfig,
}

/// Benchmark with a single culture (N = 100, K = 20): the sampler should
/// conclude there is one consensus.
pub fn one_culture_benchmark(seed: u64) -> RecoverConfig {
    let k = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let truths = (0..k)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            1.5 * z
        })
        .collect();
    let log_difficulties = (0..k)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            0.3 * z
        })
        .collect();
    RecoverConfig {
        sim: SimConfig {
            n_respondents: 100,
            n_items: k,
            true_cultures: vec![CultureParams::centered(truths, log_difficulties)],
            true_weights: vec![1.0],
            respondent_hyperparams: benchmark_hyper(),
            missing_rate: 0.1,
            seed,
        },
        study: StudyConfig {
            seed,
            ..StudyConfig::default()
        },
    }
}

/// Benchmark with three well-separated cultures (N = 200, K = 40). Per item,
/// the three consensus positions cycle through {+A, 0, -A} with A chosen so
/// that the RMS per-item gap between any culture pair is at least three prior
/// standard deviations of the truths.
pub fn three_culture_benchmark(seed: u64) -> RecoverConfig {
    let k = 40;
    let amplitude = 4.3;
    let base = [amplitude, 0.0, -amplitude];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d);
    let cultures: Vec<CultureParams> = (0..3)
        .map(|c| {
            let truths = (0..k).map(|kk| base[(kk + c) % 3]).collect();
            let log_difficulties = (0..k)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    0.3 * z
                })
                .collect();
            CultureParams::centered(truths, log_difficulties)
        })
        .collect();
    RecoverConfig {
        sim: SimConfig {
            n_respondents: 200,
            n_items: k,
            true_cultures: cultures,
            true_weights: vec![0.45, 0.35, 0.2],
            respondent_hyperparams: benchmark_hyper(),
            missing_rate: 0.05,
            seed,
        },
        study: StudyConfig {
            seed,
            ..StudyConfig::default()
        },
    }
}

fn benchmark_hyper() -> RespondentHyper {
    RespondentHyper {
        log_competence: NormalSpec::new(0.4, 0.5),
        shift: NormalSpec::new(0.0, 0.3),
        log_scale: NormalSpec::new(0.0, 0.2),
    }
}

/// Outcome of one simulate-fit-score round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    /// Modal number of occupied components over retained samples.
    pub occupied_modal: usize,
    pub expected_cultures: usize,
    pub culture_count_hit: bool,
    /// Adjusted Rand index between true and modal assignments.
    pub ari: f64,
    /// Largest per-culture RMSE between recovered and true consensus on the
    /// (0, 1) scale, over greedily matched culture pairs.
    pub consensus_rmse: f64,
}

/// Runs one benchmark end to end: simulate, fit, relabel, score.
pub fn run_recovery(config: &RecoverConfig, window: usize) -> Result<RecoveryScore> {
    let (data, truth) = simulate(&config.sim)?;
    let (chain, _report) = fit(&data, &config.study)?;
    score_recovery(&chain, &truth, data.item_ids(), window)
}

/// Scores a fitted chain against simulator ground truth.
pub fn score_recovery(
    chain: &PosteriorChain,
    truth: &GroundTruth,
    item_ids: &[String],
    window: usize,
) -> Result<RecoveryScore> {
    let relabeled = relabel(chain)?;
    let modal = modal_assignment(&relabeled, window)?;
    let occupied_modal = modal_count(&relabeled);
    let expected = truth.state.cultures.len();

    let ari = adjusted_rand_index(truth.assignments(), &modal)?;

    let summary = consensus_summary(
        &relabeled,
        item_ids,
        window,
        chain.config.consensus_mean,
    )?;
    let consensus_rmse = matched_consensus_rmse(&summary, &truth.state.cultures);

    Ok(RecoveryScore {
        occupied_modal,
        expected_cultures: expected,
        culture_count_hit: occupied_modal == expected,
        ari,
        consensus_rmse,
    })
}

/// Most frequent occupied-component count across retained samples.
fn modal_count(chain: &PosteriorChain) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for s in &chain.samples {
        *counts.entry(s.mixture.occupied_count()).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(count_value, freq)| (freq, std::cmp::Reverse(count_value)))
        .map(|(count_value, _)| count_value)
        .unwrap_or(0)
}

/// Greedily matches recovered cultures to true cultures by consensus distance
/// and returns the largest per-pair RMSE on the (0, 1) scale.
fn matched_consensus_rmse(
    summary: &crate::analysis::ConsensusSummary,
    true_cultures: &[CultureParams],
) -> f64 {
    let k = summary.n_items();
    let true_consensus: Vec<Vec<f64>> = true_cultures
        .iter()
        .map(|c| c.truths.iter().map(|&t| inverse_logit(t)).collect())
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (r, rec) in summary.cultures.iter().enumerate() {
        for (t, tru) in true_consensus.iter().enumerate() {
            let sq: f64 = rec
                .consensus
                .iter()
                .zip(tru.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            pairs.push((sq, r, t));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut rec_used = vec![false; summary.cultures.len()];
    let mut true_used = vec![false; true_consensus.len()];
    let mut worst: f64 = 0.0;
    let target = summary.cultures.len().min(true_consensus.len());
    let mut matched = 0;
    for (sq, r, t) in pairs {
        if !rec_used[r] && !true_used[t] {
            rec_used[r] = true;
            true_used[t] = true;
            worst = worst.max((sq / k as f64).sqrt());
            matched += 1;
            if matched == target {
                break;
            }
        }
    }
    worst
}
