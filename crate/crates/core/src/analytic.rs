//! Closed-form and semi-analytic references: the uniform-process spectrum
//! and its entropy bracket, the delayed-Poisson wavenumbers and block
//! eigenvalues, and the excess entropy.

use std::f64::consts::{LN_2, LOG2_E, PI};

use serde::Serialize;

use crate::entropy::plogp;
use crate::error::{Error, Result};
use crate::precise::Dd;
use crate::process::{RenewalProcess, Support};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::roots::bracketed_root;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumFamily {
    Uniform,
    DelayedBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSpectrum {
    pub family: SpectrumFamily,
    /// Eigenvalues, strictly decreasing.
    pub eigenvalues: Vec<f64>,
    /// Wavenumbers of the eigenfunctions (1/time).
    pub wavenumbers: Vec<f64>,
    pub n_max: usize,
    /// Upper bound on the entropy carried by the discarded eigenvalues.
    pub tail_bound: f64,
}

impl AnalyticSpectrum {
    pub fn entropy(&self) -> f64 {
        self.eigenvalues.iter().map(|&x| plogp(x)).sum()
    }
}

/// `λ_n = 2 / ((n − ½)² π²)` of the uniform process (independent of τ).
pub fn uniform_eigenvalue(n: usize) -> f64 {
    let y = n as f64 - 0.5;
    2.0 / (y * y * PI * PI)
}

/// The first `n_max` uniform-process eigenvalues, with wavenumbers for τ = 1
/// (`k_n = (n − ½) π`, eigenfunctions `cos(k_n t)`).
pub fn uniform_eigenvalues(n_max: usize) -> Result<AnalyticSpectrum> {
    if n_max < 1 {
        return Err(Error::invalid("n_max", n_max as f64, "must be at least 1"));
    }
    let tail = uniform_tail_bound(n_max + 1)?;
    Ok(AnalyticSpectrum {
        family: SpectrumFamily::Uniform,
        eigenvalues: (1..=n_max).map(uniform_eigenvalue).collect(),
        wavenumbers: (1..=n_max).map(|n| (n as f64 - 0.5) * PI).collect(),
        n_max,
        tail_bound: tail.upper,
    })
}

/// Integral-test bracket on the uniform entropy tail `Σ_{n≥N} ζ(n)`,
/// `ζ(n) = −λ(n) log₂ λ(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBracket {
    pub n: usize,
    /// `I(N) = ∫_N^∞ ζ(x) dx`.
    pub integral: f64,
    /// `ζ(N)`.
    pub first_term: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `I(N) = 2(log₂((N−½)²π²) − 1) / (π²(N−½)) + 4 / (π²(N−½) ln 2)`.
///
/// Requires `N ≥ 2`, where `ζ` is decreasing on `[N, ∞)`.
pub fn uniform_tail_bound(n: usize) -> Result<TailBracket> {
    if n < 2 {
        return Err(Error::invalid("N", n as f64, "the integral test needs N >= 2"));
    }
    let y = n as f64 - 0.5;
    let pi2 = PI * PI;
    let integral = 2.0 * ((y * y * pi2).log2() - 1.0) / (pi2 * y) + 4.0 / (pi2 * y * LN_2);
    let first_term = plogp(uniform_eigenvalue(n));
    Ok(TailBracket {
        n,
        integral,
        first_term,
        lower: integral,
        upper: integral + first_term,
    })
}

/// Entropy estimate with a rigorous bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketedValue {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Half the bracket width.
    pub uncertainty: f64,
}

/// Uniform-process `C_q`: the first `n_terms` entropy terms summed exactly,
/// the rest bracketed by the integral test.
pub fn uniform_cq(n_terms: usize) -> Result<BracketedValue> {
    if n_terms < 1 {
        return Err(Error::invalid("n_terms", n_terms as f64, "must be at least 1"));
    }
    // sum smallest terms first
    let partial: f64 = (1..=n_terms).rev().map(|n| plogp(uniform_eigenvalue(n))).sum();
    let tail = uniform_tail_bound(n_terms + 1)?;
    let lower = partial + tail.lower;
    let upper = partial + tail.upper;
    Ok(BracketedValue {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        uncertainty: 0.5 * (upper - lower),
    })
}

/// A root of the delayed-Poisson consistency condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wavenumber {
    /// Interval index `m`: the root lies in `[mπ/τ_R, (m+1)π/τ_R)`.
    pub interval: usize,
    pub k: f64,
    /// Low-order part of the double-double refined root (`k + k_lo`).
    pub k_lo: f64,
    /// `tan(kτ_R)(4τ_L²k² − 1) − 4τ_L k` at the refined root, evaluated in
    /// double-double arithmetic.
    pub residual: f64,
    /// `|sin(kτ_R + 2 atan(2kτ_L))|` at `k`, in double precision.
    pub normalized_residual: f64,
}

/// Sign-change scan of the interval containing the pole `k = 1/(2τ_L)` of
/// the consistency condition's right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceptionalScan {
    pub interval: usize,
    pub samples: usize,
    pub sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayedRoots {
    pub tau_r: f64,
    pub tau_l: f64,
    pub roots: Vec<Wavenumber>,
    pub exceptional: ExceptionalScan,
}

fn check_delayed(tau_r: f64, tau_l: f64) -> Result<()> {
    if !(tau_r > 0.0 && tau_r.is_finite()) {
        return Err(Error::invalid("tau_r", tau_r, "must be positive and finite"));
    }
    if !(tau_l > 0.0 && tau_l.is_finite()) {
        return Err(Error::invalid("tau_l", tau_l, "must be positive and finite"));
    }
    Ok(())
}

/// Pole-free form of the consistency condition,
/// `sin(kτ_R)(4τ_L²k² − 1) − 4τ_L k cos(kτ_R)`, which equals
/// `−(4τ_L²k² + 1) sin(kτ_R + 2 atan(2kτ_L))`.
fn pole_free(k: f64, tau_r: f64, tau_l: f64) -> f64 {
    let (s, c) = (k * tau_r).sin_cos();
    s * (4.0 * tau_l * tau_l * k * k - 1.0) - 4.0 * tau_l * k * c
}

fn pole_free_dd(k: Dd, tau_r: f64, tau_l: f64) -> Dd {
    let x = k * tau_r;
    let kk = k * k * (4.0 * tau_l * tau_l) - 1.0;
    x.sin() * kk - k * (4.0 * tau_l) * x.cos()
}

/// `tan(kτ_R)(4τ_L²k² − 1) − 4τ_L k` in double-double arithmetic.
pub fn consistency_residual(k: Dd, tau_r: f64, tau_l: f64) -> f64 {
    let x = k * tau_r;
    let r = x.tan() * (k * k * (4.0 * tau_l * tau_l) - 1.0) - k * (4.0 * tau_l);
    r.to_f64()
}

/// Wavenumbers `k` with `tan(kτ_R) = 4τ_L k / (4τ_L²k² − 1)`, one per interval
/// `[mπ/τ_R, (m+1)π/τ_R)` for `m = 0..=m_max`.
///
/// The condition is equivalent to `kτ_R + 2 atan(2kτ_L) = (m+1)π`, whose
/// left side increases strictly, so each interval holds exactly one root
/// (the trivial `k = 0` is excluded). Roots are bracketed on that smooth
/// form, then polished by Newton steps on the pole-free form in
/// double-double precision, so the residual of the tangent form can be
/// certified far below what a double-precision `k` allows at large `k`.
/// The interval containing `k = 1/(2τ_L)` is additionally scanned for sign
/// changes at ten times the base resolution.
pub fn delayed_wavenumbers(tau_r: f64, tau_l: f64, m_max: usize) -> Result<DelayedRoots> {
    check_delayed(tau_r, tau_l)?;
    let phase = |k: f64, n: f64| k * tau_r + 2.0 * (2.0 * k * tau_l).atan() - n * PI;
    let mut roots = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let lo = m as f64 * PI / tau_r;
        let hi = (m + 1) as f64 * PI / tau_r;
        let n = (m + 1) as f64;
        let k = bracketed_root(|k| phase(k, n), lo, hi, 1e-15)?;
        // Newton polish in double-double on the pole-free form
        let mut kd = Dd::from(k);
        for _ in 0..3 {
            let f = pole_free_dd(kd, tau_r, tau_l);
            let df = pole_free_derivative(kd.to_f64(), tau_r, tau_l);
            if df == 0.0 || !df.is_finite() {
                break;
            }
            kd = kd - f / df;
        }
        if !(kd.to_f64() >= lo && kd.to_f64() < hi) {
            return Err(Error::RootNotFound {
                lo,
                hi,
                reason: format!("refined root {} left its interval", kd.to_f64()),
            });
        }
        let k = kd.to_f64();
        roots.push(Wavenumber {
            interval: m,
            k,
            k_lo: (kd - k).to_f64(),
            residual: consistency_residual(kd, tau_r, tau_l),
            normalized_residual: (k * tau_r + 2.0 * (2.0 * k * tau_l).atan()).sin().abs(),
        });
    }
    let exceptional = scan_exceptional(tau_r, tau_l);
    Ok(DelayedRoots {
        tau_r,
        tau_l,
        roots,
        exceptional,
    })
}

fn pole_free_derivative(k: f64, tau_r: f64, tau_l: f64) -> f64 {
    let (s, c) = (k * tau_r).sin_cos();
    let a = 4.0 * tau_l * tau_l;
    tau_r * c * (a * k * k - 1.0) + 2.0 * a * k * s - 4.0 * tau_l * c + 4.0 * tau_l * k * tau_r * s
}

const BASE_SCAN_SAMPLES: usize = 16;

fn scan_exceptional(tau_r: f64, tau_l: f64) -> ExceptionalScan {
    let kc = 1.0 / (2.0 * tau_l);
    let interval = (kc * tau_r / PI).floor() as usize;
    let lo = interval as f64 * PI / tau_r;
    let hi = (interval + 1) as f64 * PI / tau_r;
    let samples = 10 * BASE_SCAN_SAMPLES;
    let mut sign_changes = 0;
    // skip k = 0, where the pole-free form vanishes trivially
    let start = if interval == 0 { 1 } else { 0 };
    let mut prev: Option<f64> = None;
    for i in start..=samples {
        let k = lo + (hi - lo) * i as f64 / samples as f64;
        let v = pole_free(k, tau_r, tau_l);
        if let Some(p) = prev {
            if p != 0.0 && v != 0.0 && p.signum() != v.signum() {
                sign_changes += 1;
            }
        }
        if v != 0.0 {
            prev = Some(v);
        }
    }
    ExceptionalScan {
        interval,
        samples,
        sign_changes,
    }
}

/// `λ(k) = 4τ_L / ((τ_L + τ_R)(4τ_L²k² + 1))`.
pub fn delayed_block_eigenvalue(k: f64, tau_r: f64, tau_l: f64) -> f64 {
    4.0 * tau_l / ((tau_l + tau_r) * (4.0 * tau_l * tau_l * k * k + 1.0))
}

/// Large-`k` approximation taking `k_m ≈ mπ/τ_R`; overestimates the exact
/// eigenvalue of interval `m` because the true root lies above `mπ/τ_R`.
pub fn delayed_block_eigenvalue_approx(m: usize, tau_r: f64, tau_l: f64) -> f64 {
    let x = m as f64 * PI * tau_l / tau_r;
    4.0 / ((tau_r / tau_l + 1.0) * (4.0 * x * x + 1.0))
}

pub fn delayed_block_eigenvalues(k: &[f64], tau_r: f64, tau_l: f64) -> Vec<f64> {
    k.iter().map(|&k| delayed_block_eigenvalue(k, tau_r, tau_l)).collect()
}

/// Continuum-block spectrum of the delayed Poisson process.
pub fn delayed_block_spectrum(tau_r: f64, tau_l: f64, m_max: usize) -> Result<AnalyticSpectrum> {
    let roots = delayed_wavenumbers(tau_r, tau_l, m_max)?;
    let wavenumbers: Vec<f64> = roots.roots.iter().map(|r| r.k).collect();
    Ok(AnalyticSpectrum {
        family: SpectrumFamily::DelayedBlock,
        eigenvalues: delayed_block_eigenvalues(&wavenumbers, tau_r, tau_l),
        wavenumbers,
        n_max: m_max,
        tail_bound: delayed_tail_entropy_bound(tau_r, tau_l, m_max),
    })
}

/// Bound on `Σ_{m > M} −λ_m log₂ λ_m` from `λ_m ≤ A/m²`,
/// `A = τ_R² / (τ_L (τ_L + τ_R) π²)`: `(A/M)(log₂(M²/A) + 2/ln 2)`. Valid
/// while `A/M² ≤ 1/e`; returns infinity otherwise.
pub fn delayed_tail_entropy_bound(tau_r: f64, tau_l: f64, m_max: usize) -> f64 {
    let a = tau_r * tau_r / (tau_l * (tau_l + tau_r) * PI * PI);
    let m = m_max.max(1) as f64;
    if a / (m * m) > (-1.0f64).exp() {
        return f64::INFINITY;
    }
    a / m * ((m * m / a).log2() + 2.0 / LN_2)
}

/// Entropy of the encoding that keeps the continuum states as they are but
/// makes the Poissonian state orthogonal to all of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuboptimalEntropy {
    /// Partial block entropy plus the terminal term.
    pub value: f64,
    /// Bound on the entropy of the discarded eigenvalues.
    pub tail_bound: f64,
    /// `Σ λ_m` over the retained eigenvalues.
    pub block_trace: f64,
    /// Occupation of the Poissonian state, `τ_L / (τ_L + τ_R)`.
    pub terminal_weight: f64,
}

pub fn suboptimal_block_entropy(tau_r: f64, tau_l: f64, m_max: usize) -> Result<SuboptimalEntropy> {
    if tau_r == 0.0 && tau_l > 0.0 {
        return Ok(SuboptimalEntropy {
            value: 0.0,
            tail_bound: 0.0,
            block_trace: 0.0,
            terminal_weight: 1.0,
        });
    }
    let spec = delayed_block_spectrum(tau_r, tau_l, m_max)?;
    let w = tau_l / (tau_l + tau_r);
    Ok(SuboptimalEntropy {
        value: spec.entropy() + plogp(w),
        tail_bound: spec.tail_bound,
        block_trace: spec.eigenvalues.iter().sum(),
        terminal_weight: w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcessEntropy {
    pub quadrature: f64,
    pub error_estimate: f64,
    pub closed_form: Option<f64>,
    pub converged: bool,
}

impl ExcessEntropy {
    /// Closed form when known, quadrature otherwise.
    pub fn value(&self) -> f64 {
        self.closed_form.unwrap_or(self.quadrature)
    }
}

/// `E = log₂e − 1` for the uniform process (any τ).
pub fn excess_entropy_uniform() -> f64 {
    LOG2_E - 1.0
}

/// `E = log₂(τ_R/τ_L + 1) − log₂e / (τ_L/τ_R + 1)`; zero for τ_R = 0.
pub fn excess_entropy_delayed(tau_r: f64, tau_l: f64) -> f64 {
    if tau_r == 0.0 {
        return 0.0;
    }
    (tau_r / tau_l + 1.0).log2() - LOG2_E / (tau_l / tau_r + 1.0)
}

/// `E = μ∫ t φ log₂(μφ) dt − 2μ∫ Φ log₂(μΦ) dt` by adaptive quadrature,
/// alongside the closed form for families that have one.
pub fn excess_entropy(p: &RenewalProcess) -> Result<ExcessEntropy> {
    let mu = p.firing_rate();
    let end = match p.support() {
        Support::Bounded(t) => t,
        Support::Unbounded => p.truncation_horizon(1e-18).or_else(|_| p.truncation_horizon(1e-12))?,
    };
    let mut pts = vec![0.0, end];
    pts.extend(p.breakpoints().into_iter().filter(|&t| t > 0.0 && t < end));
    let tol = Tolerance::default();
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let first = integrate_with_breaks(|t| t * xlogx(mu * p.density(t)) / mu * mu, &pts, tol);
    let second = integrate_with_breaks(|t| xlogx(mu * p.survival(t)), &pts, tol);
    // μ∫ t φ log₂(μφ) = ∫ t · (μφ) log₂(μφ) dt, and μ∫Φ log₂(μΦ) = ∫ (μΦ) log₂(μΦ) dt
    let quadrature = first.value - 2.0 * second.value;
    let closed_form = match p.family_name() {
        "uniform" => Some(excess_entropy_uniform()),
        "delayed_poisson" => {
            let (tau_r, tau_l) = p.delayed_parameters().expect("delayed family");
            Some(excess_entropy_delayed(tau_r, tau_l))
        }
        _ => None,
    };
    Ok(ExcessEntropy {
        quadrature,
        error_estimate: first.error + 2.0 * second.error,
        closed_form,
        converged: first.converged && second.converged && quadrature.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_values() {
        assert_abs_diff_eq!(uniform_eigenvalue(1), 8.0 / (PI * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(uniform_eigenvalue(2), 8.0 / (9.0 * PI * PI), epsilon = 1e-15);
        let s = uniform_eigenvalues(1_000_000).unwrap();
        let total: f64 = s.eigenvalues.iter().rev().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn uniform_bracket_two_terms() {
        let t = uniform_tail_bound(2).unwrap();
        let z1 = plogp(uniform_eigenvalue(1));
        assert_abs_diff_eq!(z1 + t.lower, 1.1046, epsilon = 1e-3);
        assert_abs_diff_eq!(z1 + t.upper, 1.4174, epsilon = 1e-3);
        assert!(uniform_tail_bound(1).is_err());
        assert!(uniform_tail_bound(1_000_000).unwrap().upper < 1e-4);
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        for n in [2usize, 5, 40] {
            let zeta = |x: f64| {
                let y = x - 0.5;
                let l = 2.0 / (y * y * PI * PI);
                -l * l.log2()
            };
            // substitute x = N / s to map [N, ∞) onto (0, 1]
            let nn = n as f64;
            let q = integrate_with_breaks(|s| if s > 0.0 { zeta(nn / s) * nn / (s * s) } else { 0.0 }, &[0.0, 1.0], Tolerance::default());
            assert_abs_diff_eq!(uniform_tail_bound(n).unwrap().integral, q.value, epsilon = 1e-8);
        }
    }

    #[test]
    fn uniform_cq_converges() {
        let c = uniform_cq(1_000_000).unwrap();
        assert_abs_diff_eq!(c.value, 1.2809, epsilon = 1e-4);
        assert!(c.uncertainty < 1e-4);
        let one = uniform_cq(1).unwrap();
        assert_abs_diff_eq!(one.lower, 1.1046, epsilon = 1e-3);
        let mut prev = f64::INFINITY;
        for n in [1, 10, 100, 1000] {
            let w = uniform_cq(n).unwrap().uncertainty;
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn first_delayed_roots() {
        let r = delayed_wavenumbers(1.0, 1.0, 5).unwrap();
        let k1 = r.roots[1].k;
        assert!(k1 > PI && k1 < 1.5 * PI);
        assert_abs_diff_eq!(k1, 3.43, epsilon = 0.01);
        for w in &r.roots {
            assert!(w.residual.abs() < 1e-10, "{w:?}");
            assert!(w.normalized_residual < 1e-12, "{w:?}");
        }
        assert_eq!(r.exceptional.sign_changes, 1);
    }

    #[test]
    fn tangent_form_residual_holds_for_large_k() {
        let r = delayed_wavenumbers(1.0, 1.0, 10_000).unwrap();
        assert_eq!(r.roots.len(), 10_001);
        let worst = r.roots.iter().map(|w| w.residual.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst:e}");
        // the same form evaluated in plain f64 at the rounded root cannot
        // get there once k is large
        let k = r.roots[10_000].k;
        let plain = (k.tan() * (4.0 * k * k - 1.0) - 4.0 * k).abs();
        assert!(plain > 1e-10);
        for (tr, tl) in [(0.25, 1.0), (4.0, 1.0), (1.0, 3.0)] {
            let r = delayed_wavenumbers(tr, tl, 2000).unwrap();
            assert!(r.roots.iter().all(|w| w.residual.abs() < 1e-10));
            assert_eq!(r.exceptional.sign_changes, 1);
        }
    }

    #[test]
    fn delayed_roots_approach_multiples_of_pi() {
        let r = delayed_wavenumbers(1.0, 1.0, 2000).unwrap();
        let mut prev = f64::INFINITY;
        for m in [10usize, 100, 1000, 2000] {
            let err = r.roots[m].k - m as f64 * PI;
            assert!(err > 0.0 && err < prev);
            prev = err;
        }
    }

    #[test]
    fn block_eigenvalues_properties() {
        let r = delayed_block_spectrum(1.0, 1.0, 10_000).unwrap();
        let trace: f64 = r.eigenvalues.iter().sum();
        assert_abs_diff_eq!(trace, 0.5, epsilon = 1e-3);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] > w[1]));
        for m in 5..200 {
            assert!(delayed_block_eigenvalue_approx(m, 1.0, 1.0) >= r.eigenvalues[m]);
        }
    }

    #[test]
    fn suboptimal_values() {
        let s = suboptimal_block_entropy(1.0, 1.0, 10_000).unwrap();
        assert_abs_diff_eq!(s.value, 1.488, epsilon = 2e-3);
        assert!(s.tail_bound < 1e-2);
        let s0 = suboptimal_block_entropy(0.0, 1.0, 10).unwrap();
        assert_eq!(s0.value, 0.0);
        let small = suboptimal_block_entropy(1e-4, 1.0, 1000).unwrap();
        assert!(small.value < 1e-2);
    }

    #[test]
    fn excess_entropy_closed_forms() {
        let u = excess_entropy(&RenewalProcess::uniform(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(u.quadrature, 0.442_695_040_888_963_4, epsilon = 1e-6);
        assert_abs_diff_eq!(u.quadrature, u.closed_form.unwrap(), epsilon = 1e-6);
        for (tr, tl) in [(0.25, 1.0), (1.0, 1.0), (4.0, 1.0), (2.0, 0.5)] {
            let e = excess_entropy(&RenewalProcess::delayed_poisson(tr, tl).unwrap()).unwrap();
            assert_abs_diff_eq!(e.quadrature, e.closed_form.unwrap(), epsilon = 1e-6);
        }
        assert_abs_diff_eq!(excess_entropy_delayed(1.0, 1.0), 1.0 - LOG2_E / 2.0, epsilon = 1e-15);
        let p = excess_entropy(&RenewalProcess::poisson(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p.quadrature, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn excess_entropy_is_timescale_invariant() {
        for p in [RenewalProcess::uniform(1.0).unwrap(), RenewalProcess::delayed_poisson(1.0, 2.0).unwrap()] {
            let e = excess_entropy(&p).unwrap().quadrature;
            for alpha in [0.5, 3.0] {
                let q = excess_entropy(&p.rescale(alpha).unwrap()).unwrap().quadrature;
                assert_abs_diff_eq!(q, e, epsilon = 1e-6);
            }
        }
    }
}
