//! Time discretization shared by the classical and quantum constructions.
//!
//! A grid samples the survival function at `S_k = Φ((k + off) δt)` where the
//! offset is `0` for left-endpoint sampling and `½` for midpoints. Emission in
//! bin `k` has probability `S_k − S_{k+1}`. Everything downstream — transition
//! columns, steady state, quantum amplitudes, the Gram matrix — is a function
//! of this one sequence, which keeps the classical and quantum machines
//! exactly consistent with each other.
//!
//! States `0..K` form the continuum. What happens past `K` depends on the tail:
//!
//! * [`Tail::Absorbed`]: the sequence is cut at `K`; whatever mass remains is
//!   forced out in the last bin and reported as `tail_mass`.
//! * [`Tail::Periodic`]: `S_{K+j+mP} = d^m S_{K+j}`, and the `P` states
//!   `K..K+P` form a loop that absorbs every later time exactly (a single
//!   self-looping state when `P = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{CausalClass, RenewalProcess, Support};

/// Largest grid accepted without an explicit opt-in.
pub const DEFAULT_MAX_STATES: usize = 1 << 13;

/// Default survival threshold for truncating unbounded supports.
pub const DEFAULT_EPS_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `Φ` sampled at bin starts `k δt`.
    Left,
    /// `Φ` sampled at bin midpoints `(k + ½) δt`.
    #[default]
    Midpoint,
}

impl Sampling {
    pub fn offset(self) -> f64 {
        match self {
            Sampling::Left => 0.0,
            Sampling::Midpoint => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Follow the causal class: continuum up to the class boundary `τ`, then
    /// the exact Poissonian / periodic block.
    #[default]
    Architecture,
    /// Ignore the class and cut the continuum at the truncation horizon.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Number of continuum bins `N`.
    pub n: usize,
    pub sampling: Sampling,
    pub layout: Layout,
    pub eps_tail: f64,
    pub allow_large_n: bool,
}

impl GridOptions {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            sampling: Sampling::default(),
            layout: Layout::default(),
            eps_tail: DEFAULT_EPS_TAIL,
            allow_large_n: false,
        }
    }

    pub fn sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn eps_tail(mut self, eps_tail: f64) -> Self {
        self.eps_tail = eps_tail;
        self
    }

    pub fn allow_large_n(mut self, allow: bool) -> Self {
        self.allow_large_n = allow;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    Absorbed,
    Periodic { period: usize, decay: f64 },
}

/// A discretized process: bin width, state layout and sampled survival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub delta_t: f64,
    /// Total number of machine states, continuum plus block.
    pub n_states: usize,
    /// Number of continuum states `K`.
    pub continuum: usize,
    /// End of the continuum, `K δt`.
    pub horizon: f64,
    /// Survival mass discarded by an absorbed tail (0 for exact blocks).
    pub tail_mass: f64,
    pub sampling: Sampling,
    pub layout: Layout,
    pub tail: Tail,
    /// `S_k` for every machine state.
    #[serde(skip)]
    survival: Vec<f64>,
}

fn check_cap(n: usize, opts: &GridOptions) -> Result<()> {
    if n < 1 {
        return Err(Error::Validation("grid needs at least one bin".into()));
    }
    if n > DEFAULT_MAX_STATES && !opts.allow_large_n {
        return Err(Error::GridTooLarge {
            n,
            cap: DEFAULT_MAX_STATES,
        });
    }
    Ok(())
}

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let k = r.round();
    if (r - k).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::GridMisaligned(format!(
            "{what} = {num} is not a whole number of bins of width {den}"
        )));
    }
    Ok(k as usize)
}

impl Grid {
    /// Discretizes `p` with `opts.n` continuum bins.
    ///
    /// With the architecture layout the bin width is the class boundary over
    /// `N` (or the support over `N` for bounded processes); the truncated
    /// layout spreads `N` bins over the truncation horizon.
    pub fn for_process(p: &RenewalProcess, opts: &GridOptions) -> Result<Self> {
        check_cap(opts.n, opts)?;
        let n = opts.n as f64;
        let (delta_t, continuum, tail) = match (opts.layout, p.causal_class()) {
            (Layout::Truncated, _) | (Layout::Architecture, CausalClass::NotEventuallyDeltaPoisson) => {
                let t_max = match p.support() {
                    Support::Bounded(t) => t,
                    Support::Unbounded => p.truncation_horizon(opts.eps_tail)?,
                };
                (t_max / n, opts.n, Tail::Absorbed)
            }
            (Layout::Architecture, CausalClass::Poisson { tau_l }) => {
                let dt = tau_l / n;
                (dt, 0, Tail::Periodic { period: 1, decay: (-dt / tau_l).exp() })
            }
            (Layout::Architecture, CausalClass::EventuallyPoisson { tau, tau_l }) => {
                let dt = tau / n;
                (dt, opts.n, Tail::Periodic { period: 1, decay: (-dt / tau_l).exp() })
            }
            (Layout::Architecture, CausalClass::EventuallyDeltaPoisson { tau, delta, tau_l }) => {
                if !(delta > 0.0) {
                    return Err(Error::invalid("delta", delta, "must be positive"));
                }
                let dt = if tau > 0.0 { tau / n } else { delta / n };
                let k = if tau > 0.0 { opts.n } else { 0 };
                let period = integer_ratio(delta, dt, "period")?;
                check_cap(k + period, opts)?;
                (dt, k, Tail::Periodic { period, decay: (-delta / tau_l).exp() })
            }
        };
        Self::from_survival(|t| p.survival(t), delta_t, continuum, tail, opts.sampling)
            .map(|mut g| {
                g.layout = opts.layout;
                g
            })
    }

    /// Builds a grid directly from a survival function. Useful for synthetic
    /// processes whose class parameters are known.
    pub fn from_survival<F: Fn(f64) -> f64>(
        survival: F,
        delta_t: f64,
        continuum: usize,
        tail: Tail,
        sampling: Sampling,
    ) -> Result<Self> {
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::invalid("delta_t", delta_t, "must be positive and finite"));
        }
        let off = sampling.offset();
        let block = match tail {
            Tail::Absorbed => 0,
            Tail::Periodic { period, decay } => {
                if period == 0 {
                    return Err(Error::Validation("periodic block needs period >= 1".into()));
                }
                if !(decay >= 0.0 && decay < 1.0) {
                    return Err(Error::invalid("decay", decay, "must lie in [0, 1)"));
                }
                period
            }
        };
        if continuum + block == 0 {
            return Err(Error::Validation("grid has no states".into()));
        }
        let survival_at = |k: usize| survival((k as f64 + off) * delta_t);
        let values: Vec<f64> = (0..continuum + block).map(survival_at).collect();
        for (k, &s) in values.iter().enumerate() {
            if !(s > 0.0) {
                return Err(Error::ZeroSurvival {
                    state: k,
                    t: (k as f64 + off) * delta_t,
                });
            }
        }
        let tail_mass = match tail {
            Tail::Absorbed => survival_at(continuum).max(0.0),
            Tail::Periodic { .. } => 0.0,
        };
        Ok(Self {
            delta_t,
            n_states: values.len(),
            continuum,
            horizon: continuum as f64 * delta_t,
            tail_mass,
            sampling,
            layout: Layout::Architecture,
            tail,
            survival: values,
        })
    }

    /// Time since the last emission represented by state `a`.
    pub fn state_time(&self, a: usize) -> f64 {
        (a as f64 + self.sampling.offset()) * self.delta_t
    }

    /// `S_a` for the stored machine states.
    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn decay(&self) -> f64 {
        match self.tail {
            Tail::Absorbed => 0.0,
            Tail::Periodic { decay, .. } => decay,
        }
    }

    pub fn period(&self) -> usize {
        match self.tail {
            Tail::Absorbed => 0,
            Tail::Periodic { period, .. } => period,
        }
    }

    /// `S_k` for any bin index, extended past the stored states by the tail
    /// rule (zero past an absorbed cut).
    pub fn survival_at(&self, k: usize) -> f64 {
        if k < self.survival.len() {
            return self.survival[k];
        }
        match self.tail {
            Tail::Absorbed => 0.0,
            Tail::Periodic { period, decay } => {
                let j = k - self.continuum;
                let m = j / period;
                self.survival[self.continuum + j % period] * decay.powi(m as i32)
            }
        }
    }

    /// Probability of emitting in bin `k` counted from the last emission.
    /// With an absorbed tail the last continuum bin takes all remaining mass.
    pub fn emission_mass(&self, k: usize) -> f64 {
        match self.tail {
            Tail::Absorbed if k + 1 == self.continuum => self.survival[k],
            Tail::Absorbed if k >= self.continuum => 0.0,
            _ => (self.survival_at(k) - self.survival_at(k + 1)).max(0.0),
        }
    }

    /// Machine state reached after `k` bins without emission, if any.
    pub fn state_of_bin(&self, k: usize) -> Option<usize> {
        if k < self.continuum {
            return Some(k);
        }
        match self.tail {
            Tail::Absorbed => None,
            Tail::Periodic { period, .. } => Some(self.continuum + (k - self.continuum) % period),
        }
    }

    /// Stationary occupation weight of each machine state before
    /// normalization: `S_a` on the continuum, `S_a / (1 − d)` on the block
    /// (the geometric sum over all later circuits of the loop).
    pub fn occupation_weights(&self) -> Vec<f64> {
        let fold = 1.0 / (1.0 - self.decay());
        self.survival
            .iter()
            .enumerate()
            .map(|(a, &s)| if a < self.continuum { s } else { s * fold })
            .collect()
    }

    /// Normalized steady state and the normalization constant `Z`.
    pub fn steady_state(&self) -> (Vec<f64>, f64) {
        let mut w = self.occupation_weights();
        let z: f64 = w.iter().sum();
        for x in &mut w {
            *x /= z;
        }
        (w, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_grid_layout() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let g = Grid::for_process(&p, &GridOptions::new(4)).unwrap();
        assert_eq!(g.n_states, 4);
        assert_eq!(g.delta_t, 0.25);
        assert_eq!(g.horizon, 1.0);
        assert_eq!(g.tail_mass, 0.0);
        assert_eq!(g.survival(), &[0.875, 0.625, 0.375, 0.125]);
        let total: f64 = (0..4).map(|k| g.emission_mass(k)).sum();
        assert_abs_diff_eq!(total, g.survival()[0], epsilon = 1e-15);
    }

    #[test]
    fn delayed_poisson_grid_block() {
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let g = Grid::for_process(&p, &GridOptions::new(8)).unwrap();
        assert_eq!(g.n_states, 9);
        assert_eq!(g.continuum, 8);
        assert_eq!(g.period(), 1);
        // tail rule reproduces the exact survival
        for k in 0..40 {
            assert_abs_diff_eq!(g.survival_at(k), p.survival(g.state_time(k)), epsilon = 1e-14);
        }
        assert_eq!(g.state_of_bin(20), Some(8));
    }

    #[test]
    fn poisson_grid_single_state() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let g = Grid::for_process(&p, &GridOptions::new(1000)).unwrap();
        assert_eq!(g.n_states, 1);
        assert_eq!(g.state_of_bin(17), Some(0));
        let (pi, _) = g.steady_state();
        assert_eq!(pi, vec![1.0]);
    }

    #[test]
    fn truncated_layout_reports_tail() {
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let g = Grid::for_process(&p, &GridOptions::new(64).layout(Layout::Truncated)).unwrap();
        assert_eq!(g.tail, Tail::Absorbed);
        assert!(g.tail_mass < DEFAULT_EPS_TAIL);
        let total: f64 = (0..g.continuum).map(|k| g.emission_mass(k)).sum();
        assert_abs_diff_eq!(total, g.survival()[0], epsilon = 1e-15);
    }

    #[test]
    fn cap_and_misalignment() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        assert!(matches!(
            Grid::for_process(&p, &GridOptions::new(8193)),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(Grid::for_process(&p, &GridOptions::new(8193).allow_large_n(true)).is_ok());
        let r = Grid::from_survival(|t| (1.0 - t).max(0.0), 0.25, 5, Tail::Absorbed, Sampling::Left);
        assert!(matches!(r, Err(Error::ZeroSurvival { state: 4, .. })));
    }

    #[test]
    fn steady_state_sums_to_one() {
        let p = RenewalProcess::delayed_poisson(0.5, 2.0).unwrap();
        let g = Grid::for_process(&p, &GridOptions::new(100)).unwrap();
        let (pi, z) = g.steady_state();
        assert_abs_diff_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // Z δt μ → 1 as the grid refines
        assert_abs_diff_eq!(z * g.delta_t * p.firing_rate(), 1.0, epsilon = 1e-3);
    }
}
