//! One-shot analysis of a process on one grid.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{excess_entropy, suboptimal_block_entropy, uniform_cq};
use crate::classical::{differential_complexity, ClassicalMachine};
use crate::error::Result;
use crate::grid::{Grid, GridOptions, Layout, Sampling, Tail};
use crate::process::{CausalClass, RenewalProcess};
use crate::quantum::{spectrum, von_neumann_entropy, GramOptions, QuantumEnsemble, Spectrum};
use crate::SCHEMA_VERSION;

/// Grids at least this fine are expected to satisfy `E ≤ C_q + 0.01`.
pub const CONVERGENCE_THRESHOLD_N: usize = 1024;

/// Slack allowed in `E ≤ C_q` once the grid is converged.
pub const EXCESS_TOLERANCE: f64 = 0.01;

/// Number of block wavenumbers used for the suboptimal bound.
pub const SUBOPTIMAL_M_MAX: usize = 10_000;

/// Terms of the analytic uniform series used as a reference value.
pub const UNIFORM_REFERENCE_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessDescriptor {
    pub family: String,
    pub class: CausalClass,
    pub mean_interval: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_l: Option<f64>,
}

impl ProcessDescriptor {
    pub fn of(p: &RenewalProcess) -> Self {
        let (tau_r, tau_l) = match p.delayed_parameters() {
            Some((r, l)) => (Some(r), Some(l)),
            None => (None, None),
        };
        Self {
            family: p.family_name().to_string(),
            class: p.causal_class(),
            mean_interval: p.mean_interval(),
            tau: p.uniform_width(),
            tau_r,
            tau_l,
        }
    }
}

/// Reference values from closed forms, where the family has them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReferences {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_q: Option<f64>,
    /// Error bound on `c_q` from truncating the series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_q_uncertainty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excess_entropy: Option<f64>,
    /// Entropy of the non-orthogonal-block machine, an upper bound on `C_q`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suboptimal_block_entropy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub dimension: usize,
    pub trace_error: f64,
    pub negative_mass: f64,
    pub min_eigenvalue: f64,
    pub clipped: usize,
    pub largest: f64,
}

/// `C_q ≤ C_μ` always, and `E ≤ C_q + 0.01` once `N` reaches the
/// convergence threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub convergence_threshold: usize,
    pub cq_le_cmu: bool,
    pub excess_checked: bool,
    pub e_le_cq: bool,
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        self.cq_le_cmu && (!self.excess_checked || self.e_le_cq)
    }
}

/// Wall-clock time per stage, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub classical: f64,
    pub gram: f64,
    pub eigen: f64,
    pub analytic: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub schema_version: u32,
    pub process: ProcessDescriptor,
    pub n: usize,
    pub n_states: usize,
    pub delta_t: f64,
    pub tail_mass: f64,
    pub sampling: Sampling,
    pub layout: Layout,
    pub tail: Tail,
    /// `1 / (μ δt Z)`: how far the discrete steady state is from `μΦ(t)δt`.
    pub renormalization: f64,
    pub c_mu: f64,
    /// Differential complexity; `None` when the integral diverges.
    pub c_mu_differential: Option<f64>,
    pub c_q: f64,
    pub e: f64,
    pub e_quadrature_error: f64,
    pub spectrum: SpectrumSummary,
    pub analytic: AnalyticReferences,
    pub ordering: OrderingCheck,
    pub timing: Timing,
}

/// A report together with the full spectrum it was computed from.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: ComplexityReport,
    pub spectrum: Spectrum,
}

/// Builds both machines on one grid and reports every entropy.
pub fn analyze(p: &RenewalProcess, opts: &GridOptions) -> Result<ComplexityReport> {
    analyze_detailed(p, opts, GramOptions::default()).map(|a| a.report)
}

/// [`analyze`] with control over the Gram construction, returning the
/// spectrum as well.
pub fn analyze_detailed(p: &RenewalProcess, opts: &GridOptions, gram: GramOptions) -> Result<Analysis> {
    let start = Instant::now();
    let grid = Grid::for_process(p, opts)?;

    let t0 = Instant::now();
    let classical = ClassicalMachine::from_grid(grid.clone());
    let c_mu = classical.statistical_complexity();
    let renormalization = classical.renormalization_factor(p.firing_rate());
    let t_classical = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let ensemble = QuantumEnsemble::from_grid(grid.clone());
    let m = ensemble.gram_density_with(gram);
    let t_gram = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let spec = spectrum(&m)?;
    drop(m);
    let c_q = von_neumann_entropy(&spec);
    let t_eigen = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let excess = excess_entropy(p)?;
    let differential = differential_complexity(p).ok().filter(|d| d.converged).map(|d| d.total);
    let analytic = references(p, excess.closed_form)?;
    let t_analytic = t0.elapsed().as_secs_f64();

    let e = excess.value();
    let excess_checked = opts.n >= CONVERGENCE_THRESHOLD_N;
    let ordering = OrderingCheck {
        convergence_threshold: CONVERGENCE_THRESHOLD_N,
        cq_le_cmu: c_q <= c_mu + 1e-9,
        excess_checked,
        e_le_cq: e <= c_q + EXCESS_TOLERANCE,
    };

    let report = ComplexityReport {
        schema_version: SCHEMA_VERSION,
        process: ProcessDescriptor::of(p),
        n: opts.n,
        n_states: grid.n_states,
        delta_t: grid.delta_t,
        tail_mass: grid.tail_mass,
        sampling: grid.sampling,
        layout: grid.layout,
        tail: grid.tail,
        renormalization,
        c_mu,
        c_mu_differential: differential,
        c_q,
        e,
        e_quadrature_error: excess.error_estimate,
        spectrum: SpectrumSummary {
            dimension: spec.len(),
            trace_error: spec.trace_error,
            negative_mass: spec.negative_mass,
            min_eigenvalue: spec.min_eigenvalue,
            clipped: spec.clipped,
            largest: spec.eigenvalues.first().copied().unwrap_or(0.0),
        },
        analytic,
        ordering,
        timing: Timing {
            classical: t_classical,
            gram: t_gram,
            eigen: t_eigen,
            analytic: t_analytic,
            total: start.elapsed().as_secs_f64(),
        },
    };
    Ok(Analysis {
        report,
        spectrum: spec,
    })
}

fn references(p: &RenewalProcess, excess_closed: Option<f64>) -> Result<AnalyticReferences> {
    let mut refs = AnalyticReferences {
        excess_entropy: excess_closed,
        ..Default::default()
    };
    if matches!(p.causal_class(), CausalClass::Poisson { .. }) {
        refs.c_q = Some(0.0);
        refs.c_q_uncertainty = Some(0.0);
        refs.excess_entropy = Some(0.0);
        return Ok(refs);
    }
    if p.uniform_width().is_some() {
        let v = uniform_cq(UNIFORM_REFERENCE_TERMS)?;
        refs.c_q = Some(v.value);
        refs.c_q_uncertainty = Some(v.uncertainty);
    }
    if let Some((tau_r, tau_l)) = p.delayed_parameters() {
        if tau_r > 0.0 {
            refs.suboptimal_block_entropy = Some(suboptimal_block_entropy(tau_r, tau_l, SUBOPTIMAL_M_MAX)?.value);
        }
    }
    Ok(refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_report_is_all_zero() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let r = analyze(&p, &GridOptions::new(256)).unwrap();
        assert_eq!(r.n_states, 1);
        assert!(r.c_mu.abs() < 1e-12);
        assert!(r.c_q.abs() < 1e-12);
        assert!(r.e.abs() < 1e-12);
        assert!(r.ordering.holds());
        assert_eq!(r.schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn uniform_small_grid_report() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let r = analyze(&p, &GridOptions::new(256)).unwrap();
        assert!(r.c_q < r.c_mu);
        assert!((r.e - 0.442695).abs() < 1e-6);
        assert!((r.analytic.c_q.unwrap() - 1.2809).abs() < 1e-3);
        assert!(!r.ordering.excess_checked);
        assert!(r.c_mu_differential.is_some());
        let json = serde_json::to_string(&r).unwrap();
        let back: ComplexityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.c_q, r.c_q);
    }

    #[test]
    fn delayed_report_has_suboptimal_bound() {
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let r = analyze(&p, &GridOptions::new(128)).unwrap();
        let bound = r.analytic.suboptimal_block_entropy.unwrap();
        assert!(r.c_q <= bound, "{} > {bound}", r.c_q);
        assert_eq!(r.n_states, 129);
    }
}
