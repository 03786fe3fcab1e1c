//! The discretized classical predictive machine (ε-machine).
//!
//! State `a` is "`a` bins since the last emission". Each step either emits
//! (returning to state 0) or advances to the next state, so every column of
//! the transition matrix has at most two nonzeros. The steady state is the
//! closed form `π ∝ S` (folded over the loop for block states); the
//! transition matrix is only used to confirm it is a fixed point.

use std::io::Write;

use serde::Serialize;

use crate::entropy::{plogp, shannon};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridOptions, Tail};
use crate::process::{CausalClass, RenewalProcess, Support};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::quantum::QuantumEnsemble;

/// One sparse column: `(row, probability)` pairs, at most two.
pub type Column = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct ClassicalMachine {
    grid: Grid,
    pi: Vec<f64>,
    /// Sum of the unnormalized occupation weights.
    normalization: f64,
    columns: Vec<Column>,
}

impl ClassicalMachine {
    pub fn build(p: &RenewalProcess, opts: &GridOptions) -> Result<Self> {
        Ok(Self::from_grid(Grid::for_process(p, opts)?))
    }

    pub fn from_grid(grid: Grid) -> Self {
        let columns = transition_columns(&grid);
        let (pi, normalization) = grid.steady_state();
        Self {
            grid,
            pi,
            normalization,
            columns,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn steady_state(&self) -> &[f64] {
        &self.pi
    }

    /// Sum of the unnormalized weights `S_a` (block states folded).
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Factor relating the normalized steady state to the continuum weights
    /// `μ Φ(t) δt`; tends to 1 as the grid refines.
    pub fn renormalization_factor(&self, firing_rate: f64) -> f64 {
        1.0 / (firing_rate * self.grid.delta_t * self.normalization)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_states(&self) -> usize {
        self.columns.len()
    }

    /// `T v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (col, entries) in self.columns.iter().enumerate() {
            for &(row, t) in entries {
                out[row] += t * v[col];
            }
        }
        out
    }

    /// `‖T π − π‖_∞`.
    pub fn stationarity_residual(&self) -> f64 {
        self.apply(&self.pi)
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of a column sum from 1.
    pub fn column_sum_error(&self) -> f64 {
        self.columns
            .iter()
            .map(|c| (c.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn transition_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let mut t = vec![vec![0.0; n]; n];
        for (col, entries) in self.columns.iter().enumerate() {
            for &(row, v) in entries {
                t[row][col] += v;
            }
        }
        t
    }

    /// Shannon entropy of the steady state, in bits.
    pub fn statistical_complexity(&self) -> f64 {
        statistical_complexity(&self.pi).expect("steady state is a distribution")
    }

    /// Writes the transition matrix as `row,col,value` triples.
    pub fn write_coo_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "value"])?;
        for (col, entries) in self.columns.iter().enumerate() {
            for &(row, v) in entries {
                w.serialize((row, col, v))?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: "<transition csv>".into(),
            source,
        })
    }
}

fn transition_columns(grid: &Grid) -> Vec<Column> {
    let s = grid.survival();
    (0..grid.n_states)
        .map(|a| {
            let next = grid.state_of_bin(a + 1).filter(|_| {
                !(grid.tail == Tail::Absorbed && a + 1 >= grid.continuum)
            });
            match next {
                None => vec![(0, 1.0)],
                Some(b) => {
                    let stay = grid.survival_at(a + 1) / s[a];
                    if b == 0 {
                        vec![(0, 1.0)]
                    } else {
                        vec![(b, stay), (0, 1.0 - stay)]
                    }
                }
            }
        })
        .collect()
}

/// `−Σ π log₂ π`.
pub fn statistical_complexity(pi: &[f64]) -> Result<f64> {
    shannon(pi)
}

/// Measurement-basis diagonal of the quantum steady state on the same grid.
pub fn decohered_distribution(p: &RenewalProcess, opts: &GridOptions) -> Result<Vec<f64>> {
    let ens = QuantumEnsemble::build(p, opts)?;
    Ok(ens.measurement_diagonal())
}

/// Continuous-limit memory measure built from the differential entropy of
/// the steady-state density `μΦ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialComplexity {
    /// `−∫ μΦ log₂ μΦ` over the continuum `[0, τ)`.
    pub continuum: f64,
    /// Differential entropy of the folded periodic block, if any.
    pub block: f64,
    /// Shannon term `−w log₂ w` of a terminal Poissonian state, if any.
    pub atom: f64,
    pub total: f64,
    /// `−∫₀^∞ μΦ log₂ μΦ` ignoring the causal architecture.
    pub architecture_free: f64,
    pub converged: bool,
}

fn neg_f_log_f(f: f64) -> f64 {
    plogp(f)
}

/// Differential complexity, split by causal-state architecture.
///
/// Divergent integrals are reported as non-finite values with
/// `converged = false` rather than as errors.
pub fn differential_complexity(p: &RenewalProcess) -> Result<DifferentialComplexity> {
    let mu = p.firing_rate();
    let tol = Tolerance::default();
    let end = match p.support() {
        Support::Bounded(t) => t,
        Support::Unbounded => p.truncation_horizon(1e-18).or_else(|_| p.truncation_horizon(1e-12))?,
    };
    let breaks_in = |lo: f64, hi: f64| {
        let mut pts = vec![lo, hi];
        pts.extend(p.breakpoints().into_iter().filter(|&t| t > lo && t < hi));
        pts
    };
    let density = |t: f64| neg_f_log_f(mu * p.survival(t));

    let full = integrate_with_breaks(density, &breaks_in(0.0, end), tol);
    let mut converged = full.converged;
    let architecture_free = full.value;

    let (continuum, block, atom) = match p.causal_class() {
        CausalClass::NotEventuallyDeltaPoisson => (architecture_free, 0.0, 0.0),
        CausalClass::Poisson { .. } => (0.0, 0.0, 0.0),
        CausalClass::EventuallyPoisson { tau, tau_l } => {
            let c = integrate_with_breaks(density, &breaks_in(0.0, tau), tol);
            converged &= c.converged;
            let w = mu * p.survival(tau) * tau_l;
            (c.value, 0.0, plogp(w))
        }
        CausalClass::EventuallyDeltaPoisson { tau, delta, tau_l } => {
            let c = integrate_with_breaks(density, &breaks_in(0.0, tau), tol);
            let fold = 1.0 / (1.0 - (-delta / tau_l).exp());
            let b = integrate_with_breaks(
                |t| neg_f_log_f(mu * p.survival(t) * fold),
                &breaks_in(tau, tau + delta),
                tol,
            );
            converged &= c.converged && b.converged;
            (c.value, b.value, 0.0)
        }
    };
    let total = continuum + block + atom;
    converged &= total.is_finite();
    Ok(DifferentialComplexity {
        continuum,
        block,
        atom,
        total,
        architecture_free,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Sampling;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LOG2_E;

    #[test]
    fn uniform_left_sampling_column() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let m = ClassicalMachine::build(&p, &GridOptions::new(2).sampling(Sampling::Left)).unwrap();
        assert_eq!(m.columns()[0], vec![(1, 0.5), (0, 0.5)]);
        assert_eq!(m.columns()[1], vec![(0, 1.0)]);
    }

    #[test]
    fn uniform_midpoint_steady_state() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let m = ClassicalMachine::build(&p, &GridOptions::new(2)).unwrap();
        assert_eq!(m.steady_state(), &[0.75, 0.25]);
        assert_abs_diff_eq!(m.statistical_complexity(), 0.811_278_124_459_132_8, epsilon = 1e-12);
    }

    #[test]
    fn poisson_single_state() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let m = ClassicalMachine::build(&p, &GridOptions::new(1000)).unwrap();
        assert_eq!(m.n_states(), 1);
        let t = m.transition_dense();
        assert_abs_diff_eq!(t[0][0], 1.0, epsilon = 1e-15);
        assert_eq!(m.statistical_complexity(), 0.0);
        // self-loop and emission both return to the single state
        let g = m.grid();
        let stay = g.survival_at(1) / g.survival_at(0);
        assert_abs_diff_eq!(stay, (-g.delta_t).exp(), epsilon = 1e-15);
    }

    #[test]
    fn stationarity_and_column_sums() {
        for p in [
            RenewalProcess::uniform(1.0).unwrap(),
            RenewalProcess::delayed_poisson(1.0, 1.0).unwrap(),
            RenewalProcess::delayed_poisson(0.3, 2.0).unwrap(),
            RenewalProcess::poisson(1.0).unwrap(),
        ] {
            for n in [16, 256, 4096] {
                let m = ClassicalMachine::build(&p, &GridOptions::new(n)).unwrap();
                assert!(m.column_sum_error() < 1e-12);
                assert!(m.stationarity_residual() < 1e-10);
                assert_abs_diff_eq!(m.steady_state().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn terminal_mass_approaches_ratio() {
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let m = ClassicalMachine::build(&p, &GridOptions::new(4096)).unwrap();
        assert_abs_diff_eq!(*m.steady_state().last().unwrap(), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(m.steady_state()[0], p.firing_rate() * m.grid().delta_t, epsilon = 1e-4);
    }

    #[test]
    fn periodic_block_is_stationary() {
        // synthetic Δ-Poisson: flat head on [0, 1), then a sawtooth repeated
        // every 0.5 under an exponential envelope
        let tau_l = 0.8;
        let surv = move |t: f64| -> f64 {
            if t < 1.0 {
                1.0 - 0.3 * t
            } else {
                let x = t - 1.0;
                let m = (x / 0.5).floor();
                let r = x - 0.5 * m;
                0.7 * (-(0.5 * m) / tau_l).exp() * (1.0 - (1.0 - (-0.5 / tau_l).exp()) * r / 0.5)
            }
        };
        let g = Grid::from_survival(
            surv,
            0.05,
            20,
            Tail::Periodic { period: 10, decay: (-0.5 / tau_l).exp() },
            Sampling::Midpoint,
        )
        .unwrap();
        let m = ClassicalMachine::from_grid(g);
        assert_eq!(m.n_states(), 30);
        assert!(m.column_sum_error() < 1e-12);
        assert!(m.stationarity_residual() < 1e-12);
    }

    #[test]
    fn coo_dump() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let m = ClassicalMachine::build(&p, &GridOptions::new(2).sampling(Sampling::Left)).unwrap();
        let mut buf = Vec::new();
        m.write_coo_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row,col,value\n1,0,0.5\n0,0,0.5\n0,1,1.0\n");
    }

    #[test]
    fn uniform_complexity_grows_one_bit_per_doubling() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let c: Vec<f64> = (8..=14)
            .map(|k| {
                ClassicalMachine::build(&p, &GridOptions::new(1 << k).allow_large_n(true))
                    .unwrap()
                    .statistical_complexity()
            })
            .collect();
        for w in c.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 1.0, epsilon = 2e-3);
        }
    }

    #[test]
    fn differential_uniform() {
        let d = differential_complexity(&RenewalProcess::uniform(1.0).unwrap()).unwrap();
        assert!(d.converged);
        assert_abs_diff_eq!(d.total, LOG2_E / 2.0 - 1.0, epsilon = 1e-9);
        let d2 = differential_complexity(&RenewalProcess::uniform(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(d2.total - d.total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn differential_poisson_and_delayed() {
        let d = differential_complexity(&RenewalProcess::poisson(1.0).unwrap()).unwrap();
        assert_eq!(d.total, 0.0);
        assert_abs_diff_eq!(d.architecture_free, LOG2_E, epsilon = 1e-9);
        let d = differential_complexity(&RenewalProcess::delayed_poisson(1.0, 1.0).unwrap()).unwrap();
        // continuum: μ = ½ flat over [0, 1) → −½ log₂ ½ = ½; atom: w = ½ → ½
        assert_abs_diff_eq!(d.continuum, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(d.atom, 0.5, epsilon = 1e-12);
    }
}
