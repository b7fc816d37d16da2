//! Core domain types: survey data, per-culture and per-respondent parameters,
//! and the joint sampler state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::grid::Grid;
use crate::model::link::logit;

/// Tolerance for the per-culture mean-zero constraint on log difficulties.
pub const CENTERING_TOL: f64 = 1e-9;

/// Tolerance for stick weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A respondent-by-item matrix of responses on the open (0, 1) scale with an
/// observation mask. Construction validates every invariant; the value and the
/// logit of every observed cell are both stored so likelihood code never
/// recomputes the link.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    values: Grid<f64>,
    logits: Grid<f64>,
    mask: Grid<bool>,
    respondent_ids: Vec<String>,
    item_ids: Vec<String>,
}

impl PartialEq for ResponseMatrix {
    /// Bitwise equality of observed values (masked cells are all NaN and
    /// compare equal), plus mask and id equality.
    fn eq(&self, other: &Self) -> bool {
        self.respondent_ids == other.respondent_ids
            && self.item_ids == other.item_ids
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl ResponseMatrix {
    /// Validates and builds a response matrix. Masked cells of `values` are
    /// ignored (and normalized to NaN internally).
    pub fn new(
        values: Grid<f64>,
        mask: Grid<bool>,
        respondent_ids: Vec<String>,
        item_ids: Vec<String>,
    ) -> Result<Self> {
        let n = values.rows();
        let k = values.cols();
        if n < 2 || k < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 respondents and 2 items, got {n}x{k}"
            )));
        }
        if mask.rows() != n || mask.cols() != k {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{}, values are {n}x{k}",
                mask.rows(),
                mask.cols()
            )));
        }
        if respondent_ids.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} respondent ids for {n} rows",
                respondent_ids.len()
            )));
        }
        if item_ids.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} item ids for {k} columns",
                item_ids.len()
            )));
        }

        let mut clean = Grid::filled(n, k, f64::NAN);
        let mut logits = Grid::filled(n, k, f64::NAN);
        let mut col_seen = vec![false; k];
        for i in 0..n {
            let mut row_seen = false;
            for j in 0..k {
                if mask[(i, j)] {
                    let x = values[(i, j)];
                    if !(x > 0.0 && x < 1.0) {
                        return Err(Error::InvalidInput(format!(
                            "observed value {x} at respondent {} item {} is outside (0, 1)",
                            respondent_ids[i], item_ids[j]
                        )));
                    }
                    clean[(i, j)] = x;
                    logits[(i, j)] = logit(x)?;
                    row_seen = true;
                    col_seen[j] = true;
                }
            }
            if !row_seen {
                return Err(Error::InvalidInput(format!(
                    "respondent {} has no observed items",
                    respondent_ids[i]
                )));
            }
        }
        if let Some(j) = col_seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!(
                "item {} has no observing respondents",
                item_ids[j]
            )));
        }

        Ok(ResponseMatrix {
            values: clean,
            logits,
            mask,
            respondent_ids,
            item_ids,
        })
    }

    pub fn n_respondents(&self) -> usize {
        self.values.rows()
    }

    pub fn n_items(&self) -> usize {
        self.values.cols()
    }

    pub fn is_observed(&self, i: usize, k: usize) -> bool {
        self.mask[(i, k)]
    }

    /// Observed value at (i, k); NaN where masked.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[(i, k)]
    }

    /// Logit of the observed value at (i, k); NaN where masked.
    pub fn logit_value(&self, i: usize, k: usize) -> f64 {
        self.logits[(i, k)]
    }

    pub fn mask(&self) -> &Grid<bool> {
        &self.mask
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Test-only constructor that skips the coverage invariants (used to
    /// exercise likelihood edge cases that valid survey data cannot reach).
    #[cfg(test)]
    pub(crate) fn unchecked_for_tests(
        values: Grid<f64>,
        mask: Grid<bool>,
        respondent_ids: Vec<String>,
        item_ids: Vec<String>,
    ) -> Self {
        let n = values.rows();
        let k = values.cols();
        let mut logits = Grid::filled(n, k, f64::NAN);
        for i in 0..n {
            for j in 0..k {
                if mask[(i, j)] {
                    let x = values[(i, j)];
                    logits[(i, j)] = x.ln() - (-x).ln_1p();
                }
            }
        }
        ResponseMatrix {
            values,
            logits,
            mask,
            respondent_ids,
            item_ids,
        }
    }
}

/// Per-culture parameters: consensus positions on the logit scale and log
/// item difficulties, the latter centered to mean zero within the culture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CultureParams {
    pub truths: Vec<f64>,
    pub log_difficulties: Vec<f64>,
}

impl CultureParams {
    pub fn new(truths: Vec<f64>, log_difficulties: Vec<f64>) -> Self {
        CultureParams {
            truths,
            log_difficulties,
        }
    }

    /// Builds params with the log difficulties re-centered to mean zero.
    pub fn centered(truths: Vec<f64>, mut log_difficulties: Vec<f64>) -> Self {
        let m = mean(&log_difficulties);
        for d in &mut log_difficulties {
            *d -= m;
        }
        CultureParams {
            truths,
            log_difficulties,
        }
    }

    pub fn n_items(&self) -> usize {
        self.truths.len()
    }

    pub fn difficulty(&self, k: usize) -> f64 {
        self.log_difficulties[k].exp()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.truths.len() != k || self.log_difficulties.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "culture has {} truths and {} difficulties for {k} items",
                self.truths.len(),
                self.log_difficulties.len()
            )));
        }
        if !self.truths.iter().all(|t| t.is_finite())
            || !self.log_difficulties.iter().all(|d| d.is_finite())
        {
            return Err(Error::NonFinite("culture parameters".into()));
        }
        let m = mean(&self.log_difficulties);
        if m.abs() > CENTERING_TOL {
            return Err(Error::InvalidInput(format!(
                "log difficulties are not centered: mean {m}"
            )));
        }
        Ok(())
    }
}

/// Per-respondent parameters on their unconstrained scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RespondentParams {
    /// log E_i; competence is the precision multiplier E_i = exp(log_competence).
    pub log_competence: f64,
    /// Additive response bias a_i on the logit scale.
    pub shift_bias: f64,
    /// log b_i; the observed response is scaled by b_i = exp(log_scale_bias).
    pub log_scale_bias: f64,
}

impl RespondentParams {
    pub fn new(log_competence: f64, shift_bias: f64, log_scale_bias: f64) -> Self {
        RespondentParams {
            log_competence,
            shift_bias,
            log_scale_bias,
        }
    }

    /// Neutral respondent: unit competence, no shift, unit scale.
    pub fn neutral() -> Self {
        RespondentParams::new(0.0, 0.0, 0.0)
    }

    pub fn competence(&self) -> f64 {
        self.log_competence.exp()
    }

    pub fn scale_bias(&self) -> f64 {
        self.log_scale_bias.exp()
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_competence.is_finite()
            && self.shift_bias.is_finite()
            && self.log_scale_bias.is_finite()
        {
            Ok(())
        } else {
            Err(Error::NonFinite("respondent parameters".into()))
        }
    }
}

/// Truncated stick-breaking mixture state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureState {
    /// Beta stick fractions v_j in (0, 1], with the last fixed to 1.
    pub sticks: Vec<f64>,
    /// Component weights; the stick-breaking transform of `sticks`.
    pub weights: Vec<f64>,
    /// Component index (0-based) per respondent.
    pub assignments: Vec<usize>,
    /// Dirichlet-process concentration.
    pub concentration: f64,
}

impl MixtureState {
    pub fn truncation(&self) -> usize {
        self.sticks.len()
    }

    /// Number of components with at least one assigned respondent.
    pub fn occupied_count(&self) -> usize {
        let mut seen = vec![false; self.truncation()];
        for &a in &self.assignments {
            seen[a] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Sorted indices of occupied components.
    pub fn occupied_components(&self) -> Vec<usize> {
        let mut seen = vec![false; self.truncation()];
        for &a in &self.assignments {
            seen[a] = true;
        }
        (0..self.truncation()).filter(|&j| seen[j]).collect()
    }

    /// Assignment counts per component.
    pub fn counts(&self) -> Vec<usize> {
        let mut n = vec![0usize; self.truncation()];
        for &a in &self.assignments {
            n[a] += 1;
        }
        n
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.truncation();
        if j == 0 || self.weights.len() != j {
            return Err(Error::DimensionMismatch(format!(
                "{} sticks vs {} weights",
                j,
                self.weights.len()
            )));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        for (idx, &v) in self.sticks.iter().enumerate() {
            let last = idx == j - 1;
            if last && v != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "final stick must be exactly 1, got {v}"
                )));
            }
            if !last && !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "stick {idx} must lie in (0, 1), got {v}"
                )));
            }
        }
        let expected = crate::inference::stick_breaking(&self.sticks)?;
        let mut sum = 0.0;
        for (idx, (&w, &e)) in self.weights.iter().zip(expected.iter()).enumerate() {
            if (w - e).abs() > WEIGHT_SUM_TOL {
                return Err(Error::InvalidInput(format!(
                    "weight {idx} is {w}, stick-breaking transform gives {e}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        for (i, &a) in self.assignments.iter().enumerate() {
            if a >= j {
                return Err(Error::InvalidInput(format!(
                    "assignment {a} of respondent {i} exceeds truncation {j}"
                )));
            }
            if !(self.weights[a] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "respondent {i} assigned to component {a} with zero weight"
                )));
            }
        }
        Ok(())
    }
}

/// One full parameter configuration of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub cultures: Vec<CultureParams>,
    pub respondents: Vec<RespondentParams>,
    pub mixture: MixtureState,
}

impl ModelState {
    pub fn truncation(&self) -> usize {
        self.cultures.len()
    }

    pub fn n_respondents(&self) -> usize {
        self.respondents.len()
    }

    pub fn n_items(&self) -> usize {
        self.cultures.first().map_or(0, |c| c.n_items())
    }

    /// Culture parameters of the component respondent `i` is assigned to.
    pub fn culture_of(&self, i: usize) -> &CultureParams {
        &self.cultures[self.mixture.assignments[i]]
    }

    /// Checks structural consistency and all per-field invariants.
    pub fn validate(&self) -> Result<()> {
        let j = self.truncation();
        if j == 0 {
            return Err(Error::InvalidInput("no cultures".into()));
        }
        if self.mixture.truncation() != j {
            return Err(Error::DimensionMismatch(format!(
                "{} cultures vs {} mixture components",
                j,
                self.mixture.truncation()
            )));
        }
        if self.mixture.assignments.len() != self.respondents.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} assignments vs {} respondents",
                self.mixture.assignments.len(),
                self.respondents.len()
            )));
        }
        let k = self.n_items();
        for c in &self.cultures {
            c.validate(k)?;
        }
        for r in &self.respondents {
            r.validate()?;
        }
        self.mixture.validate()
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}
