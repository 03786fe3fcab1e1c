//! Overlaps of continuum quantum causal states by direct quadrature.

use crate::error::{Error, Result};
use crate::process::RenewalProcess;
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// `⟨S_a|S_b⟩ = ∫₀^∞ √φ(t+a) √φ(t+b) dt / √(Φ(a) Φ(b))`.
pub fn overlap(p: &RenewalProcess, a: f64, b: f64) -> Result<f64> {
    let (sa, sb) = (p.survival(a), p.survival(b));
    if !(sa > 0.0) {
        return Err(Error::UnreachablePast { t: a });
    }
    if !(sb > 0.0) {
        return Err(Error::UnreachablePast { t: b });
    }
    if a == b {
        return Ok(1.0);
    }
    let lo = a.min(b);
    let end = p.truncation_horizon(1e-18).or_else(|_| p.truncation_horizon(1e-12))? - lo;
    let mut pts = vec![0.0, end.max(0.0)];
    for x in p.breakpoints() {
        for shift in [a, b] {
            let t = x - shift;
            if t > 0.0 && t < end {
                pts.push(t);
            }
        }
    }
    let r = integrate_with_breaks(
        |t| (p.density(t + a) * p.density(t + b)).sqrt(),
        &pts,
        Tolerance::default(),
    );
    Ok((r.value / (sa * sb).sqrt()).clamp(0.0, 1.0))
}
