//! Shannon entropy in bits with the `0 · log 0 = 0` convention.

use crate::error::{Error, Result};

/// Entries below this contribute nothing to an entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-15;

/// `−x log₂ x`, zero at (and below) the cutoff.
#[inline]
pub fn plogp(x: f64) -> f64 {
    if x <= ENTROPY_CUTOFF {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy of a probability vector.
///
/// Rejects negative or non-finite entries and vectors whose sum is further
/// than `1e-9` from one.
pub fn shannon(p: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidDistribution(format!("entry {i} is {x}")));
        }
        total += x;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(p.iter().map(|&x| plogp(x)).sum())
}
