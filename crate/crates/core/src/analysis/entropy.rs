//! Entropy of the culture occupancy distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationEntropy {
    /// Shannon entropy of the occupancy distribution, in nats.
    pub entropy_nats: f64,
    /// Entropy divided by ln(number of occupied cultures); 0 when a single
    /// culture holds everyone, 1 when occupied cultures are equally sized.
    pub normalized: f64,
}

/// Computes the allocation entropy from per-culture occupancy counts.
/// Zero counts are skipped; the counts must not all be zero.
pub fn allocation_entropy(counts: &[usize]) -> Result<AllocationEntropy> {
    if counts.is_empty() {
        return Err(Error::InvalidInput("no cultures".into()));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("all occupancy counts are zero".into()));
    }
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    let mut entropy = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            entropy -= p * p.ln();
        }
    }
    let normalized = if occupied == 1 {
        0.0
    } else {
        entropy / (occupied as f64).ln()
    };
    Ok(AllocationEntropy {
        entropy_nats: entropy,
        normalized,
    })
}
