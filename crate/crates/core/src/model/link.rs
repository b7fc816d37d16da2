//! Logit link between the (0, 1) response scale and the real line.

use crate::error::{Error, Result};

/// Maps `x` in the open interval (0, 1) to the real line: `ln(x / (1 - x))`.
pub fn logit(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "logit requires 0 < x < 1, got {x}"
        )));
    }
    // ln(x) - ln(1 - x), with ln_1p for accuracy near 1.
    Ok(x.ln() - (-x).ln_1p())
}

/// Inverse of [`logit`]; always lands in [0, 1] and is interior for |z| < ~36.
pub fn inverse_logit(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
