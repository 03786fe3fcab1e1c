//! The quantum predictive machine.
//!
//! Causal state `a` is encoded as the pure state whose amplitude on outcome
//! bin `j` (time to the next emission) is `√(q_{a+j} / S_a)`, with
//! `q_k = S_k − S_{k+1}` the emission mass of bin `k`. The steady-state
//! density matrix `ρ = Σ p_a |σ_a⟩⟨σ_a|` shares its nonzero spectrum with the
//! weighted Gram matrix `M_ab = √(p_a p_b) ⟨σ_a|σ_b⟩`, which is what gets
//! diagonalized.

mod gram;
mod overlap;
mod spectrum;
mod state;

pub use gram::GramOptions;
pub use overlap::overlap;
pub use spectrum::{eigenpairs, spectrum, von_neumann_entropy, Spectrum, CLIP_THRESHOLD};
pub use state::{SweepOutcome, StateVector};

use faer::Mat;

use crate::error::Result;
use crate::grid::{Grid, GridOptions, Tail};
use crate::process::RenewalProcess;

/// Quantum causal states on a grid together with their steady-state weights.
#[derive(Debug, Clone)]
pub struct QuantumEnsemble {
    grid: Grid,
    weights: Vec<f64>,
    normalization: f64,
    /// `√q_k` for every bin touched by the Gram recurrence.
    root_mass: Vec<f64>,
}

impl QuantumEnsemble {
    pub fn build(p: &RenewalProcess, opts: &GridOptions) -> Result<Self> {
        Ok(Self::from_grid(Grid::for_process(p, opts)?))
    }

    pub fn from_grid(grid: Grid) -> Self {
        let (weights, normalization) = grid.steady_state();
        let len = grid.n_states + 2 * grid.period() + 1;
        let root_mass = (0..len).map(|k| grid.emission_mass(k).sqrt()).collect();
        Self {
            grid,
            weights,
            normalization,
            root_mass,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Steady-state probabilities `p_a`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn n_states(&self) -> usize {
        self.grid.n_states
    }

    /// `√q_k` for any bin.
    pub(crate) fn root_mass(&self, k: usize) -> f64 {
        match self.root_mass.get(k) {
            Some(&u) => u,
            None => self.grid.emission_mass(k).sqrt(),
        }
    }

    /// Amplitude of state `a` on outcome bin `j`.
    pub fn amplitude(&self, a: usize, j: usize) -> f64 {
        self.root_mass(a + j) / self.grid.survival()[a].sqrt()
    }

    /// Squared norm of row `a`, summed in closed form over a periodic tail.
    pub fn row_norm_squared(&self, a: usize) -> f64 {
        self.row(a).norm_squared()
    }

    /// Quantum causal state `a` as an outcome-bin amplitude vector.
    pub fn row(&self, a: usize) -> StateVector {
        let g = &self.grid;
        let period = g.period();
        let head_len = g.continuum.saturating_sub(a) + period;
        let head = (0..head_len).map(|j| self.amplitude(a, j)).collect();
        let tail = match g.tail {
            Tail::Absorbed => None,
            Tail::Periodic { period, decay } => Some((period, decay.sqrt())),
        };
        StateVector::new(head, tail, g.delta_t)
    }

    /// Amplitude matrix `B` truncated to `width` outcome bins.
    pub fn amplitudes_dense(&self, width: usize) -> Vec<Vec<f64>> {
        (0..self.n_states())
            .map(|a| (0..width).map(|j| self.amplitude(a, j)).collect())
            .collect()
    }

    /// Diagonal of `ρ` in the outcome basis, `Σ_a p_a |amp_a(j)|²`. Outcome
    /// bins past the continuum are folded onto the block state they
    /// correspond to, so the result is indexed like the machine states.
    pub fn measurement_diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        let n = g.n_states;
        let fold = 1.0 / (1.0 - g.decay());
        let mut diag = vec![0.0; n];
        for (a, &p) in self.weights.iter().enumerate() {
            let s = g.survival()[a];
            for (j, d) in diag.iter_mut().enumerate() {
                let w = if j < g.continuum { 1.0 } else { fold };
                let u = self.root_mass(a + j);
                *d += p * u * u / s * w;
            }
        }
        diag
    }

    /// Weighted Gram matrix `M`.
    pub fn gram_density(&self) -> Mat<f64> {
        gram::gram_density(self, GramOptions::default())
    }

    pub fn gram_density_with(&self, opts: GramOptions) -> Mat<f64> {
        gram::gram_density(self, opts)
    }

    /// `√(p_a / S_a)`: maps eigenvectors of `M` to eigenfunctions and back.
    pub fn eigenfunction_scale(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(self.grid.survival())
            .map(|(p, s)| (p / s).sqrt())
            .collect()
    }

    /// Converts an eigenvector `g` of `M` into a sampled eigenfunction
    /// `f = g / √(p/S)` of the integral operator.
    pub fn eigenfunction_from_vector(&self, g: &[f64]) -> Vec<f64> {
        g.iter()
            .zip(self.eigenfunction_scale())
            .map(|(x, d)| x / d)
            .collect()
    }

    /// Max-norm residual `‖K f − λ f‖_∞` of the discretized integral operator
    /// `(K f)(a) = Σ_b G_ab (p_b / S_b) f_b`, where `G` is the unnormalized
    /// overlap matrix (`G_ab ≈ ∫ ψ(t+a) ψ(t+b) dt`). `f` is rescaled to unit
    /// norm `Σ_b (p_b / μ S_b) f_b² = 1`, which is `∫ f² = 1` on the
    /// continuum.
    pub fn characteristic_residual(&self, firing_rate: f64, lambda: f64, f: &[f64]) -> f64 {
        let n = self.n_states();
        assert_eq!(f.len(), n, "eigenfunction length must match the grid");
        let scale = self.eigenfunction_scale();
        let w: Vec<f64> = scale.iter().map(|d| d * d).collect();
        let norm: f64 = f
            .iter()
            .zip(&w)
            .map(|(x, w)| w / firing_rate * x * x)
            .sum::<f64>()
            .sqrt();
        if !(norm > 0.0) {
            return f64::INFINITY;
        }
        let f: Vec<f64> = f.iter().map(|x| x / norm).collect();
        let g = gram::overlap_matrix(self);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let kf: f64 = (0..n).map(|b| g[(a, b)] * w[b] * f[b]).sum();
            worst = worst.max((kf - lambda * f[a]).abs());
        }
        worst
    }
}
