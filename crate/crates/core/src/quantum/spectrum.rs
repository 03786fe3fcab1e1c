//! Dense symmetric eigendecomposition and von Neumann entropy.

use faer::{Mat, Side};
use serde::Serialize;

use crate::entropy::plogp;
use crate::error::{Error, Result};

/// Roundoff allowance for negative eigenvalues of a PSD matrix.
pub const CLIP_THRESHOLD: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Eigenvalues in descending order, negatives clipped to zero.
    pub eigenvalues: Vec<f64>,
    /// `|Σ λ − 1|` before clipping.
    pub trace_error: f64,
    /// `Σ |min(λ, 0)|`, the mass removed by clipping.
    pub negative_mass: f64,
    pub min_eigenvalue: f64,
    pub clipped: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Builds a spectrum from eigenvalues in any order.
    pub fn from_eigenvalues(mut raw: Vec<f64>) -> Result<Self> {
        raw.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = raw.iter().sum();
        let negative_mass: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum::<f64>() + 0.0;
        let min_eigenvalue = raw.last().copied().unwrap_or(0.0);
        if negative_mass > CLIP_THRESHOLD {
            return Err(Error::NegativeSpectrum {
                negative_mass,
                min_eigenvalue,
                dim: raw.len(),
            });
        }
        let clipped = raw.iter().filter(|&&x| x < 0.0).count();
        let eigenvalues = raw.into_iter().map(|x| x.max(0.0)).collect();
        Ok(Self {
            eigenvalues,
            trace_error: (total - 1.0).abs(),
            negative_mass,
            min_eigenvalue,
            clipped,
        })
    }
}

fn check_density(m: &Mat<f64>) -> Result<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "density matrix must be square");
    let mut asym: f64 = 0.0;
    let mut trace = 0.0;
    for j in 0..n {
        trace += m[(j, j)];
        for i in j + 1..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    if !((trace - 1.0).abs() <= TRACE_TOLERANCE) {
        return Err(Error::TraceViolation {
            trace,
            tolerance: TRACE_TOLERANCE,
        });
    }
    Ok(trace)
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut x: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            x = x.max(m[(i, j)].abs());
        }
    }
    x
}

/// Full spectrum of a unit-trace symmetric PSD matrix.
pub fn spectrum(m: &Mat<f64>) -> Result<Spectrum> {
    let trace = check_density(m)?;
    let raw = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure {
            dim: m.nrows(),
            trace,
            max_abs: max_abs(m),
        })?;
    Spectrum::from_eigenvalues(raw)
}

/// The `count` largest eigenpairs, eigenvalues descending and eigenvectors
/// of unit Euclidean norm.
pub fn eigenpairs(m: &Mat<f64>, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let trace = check_density(m)?;
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure {
        dim: m.nrows(),
        trace,
        max_abs: max_abs(m),
    })?;
    let n = m.nrows();
    let (u, s) = (evd.U(), evd.S());
    Ok((0..count.min(n))
        .map(|r| {
            let c = n - 1 - r;
            let v = (0..n).map(|i| u[(i, c)]).collect();
            (s[c], v)
        })
        .collect())
}

/// `−Σ λ log₂ λ`, skipping eigenvalues below the entropy cutoff.
pub fn von_neumann_entropy(s: &Spectrum) -> f64 {
    s.eigenvalues.iter().map(|&x| plogp(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_half_half() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 0.5 } else { 0.0 });
        let s = spectrum(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.5]);
        assert_abs_diff_eq!(von_neumann_entropy(&s), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let p = [0.2, 0.3, 0.5];
        let m = Mat::from_fn(3, 3, |i, j| (p[i] * p[j] as f64).sqrt());
        let s = spectrum(&m).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert!(von_neumann_entropy(&s) < 1e-12);
    }

    #[test]
    fn contract_violations() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 0.1 } else if i == j { 0.5 } else { 0.0 });
        assert!(matches!(spectrum(&m), Err(Error::NotSymmetric { .. })));
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 0.6 } else { 0.0 });
        assert!(matches!(spectrum(&m), Err(Error::TraceViolation { .. })));
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 0.5 } else { 0.9 });
        assert!(matches!(spectrum(&m), Err(Error::NegativeSpectrum { .. })));
    }

    #[test]
    fn eigenpairs_are_consistent() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { [0.5, 0.3, 0.2][i] } else { 0.05 });
        let pairs = eigenpairs(&m, 3).unwrap();
        for (lambda, v) in &pairs {
            for i in 0..3 {
                let mv: f64 = (0..3).map(|j| m[(i, j)] * v[j]).sum();
                assert_abs_diff_eq!(mv, lambda * v[i], epsilon = 1e-14);
            }
        }
        assert!(pairs[0].0 >= pairs[1].0 && pairs[1].0 >= pairs[2].0);
    }
}
