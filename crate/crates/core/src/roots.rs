//! Bracketed scalar root finding: bisection safeguarding a secant step.

use crate::error::{Error, Result};

/// Root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs
/// (or one of them is zero). Converges when the bracket is narrower than
/// `tol · max(1, |x|)`.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::RootNotFound {
            lo,
            hi,
            reason: format!("non-finite endpoint value (f(lo) = {fa}, f(hi) = {fb})"),
        });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {fa:e}, f(hi) = {fb:e})"),
        });
    }
    for _ in 0..400 {
        let width = b - a;
        let mid = a + 0.5 * width;
        if width <= tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        // secant (false position) candidate, accepted only if it lands well
        // inside the bracket; otherwise bisect
        let secant = b - fb * (b - a) / (fb - fa);
        let margin = 0.01 * width;
        let x = if secant.is_finite() && secant > a + margin && secant < b - margin {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(Error::RootNotFound {
                lo,
                hi,
                reason: format!("non-finite value at {x}"),
            });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // a secant step that barely moved the far end is followed by a
        // bisection so the bracket keeps shrinking geometrically
        if x == secant && (b - a) > 0.5 * width {
            let m = a + 0.5 * (b - a);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    Err(Error::RootNotFound {
        lo,
        hi,
        reason: "iteration limit reached".into(),
    })
}
