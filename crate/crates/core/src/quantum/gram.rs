//! Overlap (Gram) matrices in `O(n²)` via the Hankel recurrence
//! `G(x, y) = u_x u_y + G(x+1, y+1)`, where `G(x, y) = Σ_j u_{x+j} u_{y+j}`
//! is the unnormalized overlap of the states at bins `x` and `y`.
//!
//! With an absorbed tail `G` vanishes past the cut. With a periodic tail
//! (`u_{k+P} = √d u_k` for `k >= K`) the block rows are geometric sums that
//! close the recurrence exactly.

use faer::Mat;

use super::QuantumEnsemble;
use crate::grid::Tail;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GramOptions {
    /// Drop overlaps between continuum and block states, encoding the block
    /// orthogonally to everything else.
    pub orthogonal_block: bool,
    /// Negate every off-diagonal overlap. Only meant for checking that the
    /// verification suite notices a broken construction.
    pub flip_overlap_sign: bool,
}

/// Unnormalized overlaps `G(a, b)` between machine states (symmetric).
pub(crate) fn overlap_matrix(e: &QuantumEnsemble) -> Mat<f64> {
    let g = e.grid();
    let n = g.n_states;
    let k = g.continuum;
    let u = |x: usize| e.root_mass(x);
    // stored in the lower triangle: entry (b, a) with b >= a
    let mut m = Mat::<f64>::zeros(n, n);

    match g.tail {
        Tail::Absorbed => {
            for a in (0..k).rev() {
                for b in a..k {
                    let next = if b + 1 < k { m[(b + 1, a + 1)] } else { 0.0 };
                    m[(b, a)] = u(a) * u(b) + next;
                }
            }
        }
        Tail::Periodic { period: p, decay: d } => {
            let r = d.sqrt();
            // table[i][s] = G(K + i, K + i + s) for i < P, s <= P
            let mut table = vec![vec![0.0; p + 1]; p + 1];
            for s in 0..=p {
                let sum: f64 = (0..p).map(|j| u(k + j) * u(k + s + j)).sum();
                table[p][s] = d * sum / (1.0 - d); // G(K + P, K + P + s)
            }
            for i in (0..p).rev() {
                for s in 0..=p {
                    table[i][s] = u(k + i) * u(k + i + s) + table[i + 1][s];
                }
            }
            for i in 0..p {
                for s in 0..p - i {
                    m[(k + i + s, k + i)] = table[i][s];
                }
            }
            // continuum–block: col[i] = G(a, K + i), built for a = K-1 down to 0
            let mut col: Vec<f64> = (0..p).map(|i| table[0][i]).collect(); // G(K, K+i)
            let mut col_next = vec![0.0; p];
            let g_kk = table[0][0];
            let g_k_kp = table[0][p];
            for a in (0..k).rev() {
                for i in 0..p {
                    let next = if a + 1 == k {
                        if i + 1 < p {
                            table[0][i + 1]
                        } else {
                            g_k_kp
                        }
                    } else if i + 1 < p {
                        col[i + 1]
                    } else {
                        r * col[0]
                    };
                    col_next[i] = u(a) * u(k + i) + next;
                }
                std::mem::swap(&mut col, &mut col_next);
                for i in 0..p {
                    m[(k + i, a)] = col[i];
                }
            }
            // continuum–continuum
            for a in (0..k).rev() {
                for b in a..k {
                    let next = if b + 1 < k {
                        m[(b + 1, a + 1)]
                    } else if a + 1 < k {
                        m[(k, a + 1)] // G(a+1, K)
                    } else {
                        g_kk // a = b = K - 1
                    };
                    m[(b, a)] = u(a) * u(b) + next;
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            m[(a, b)] = m[(b, a)];
        }
    }
    m
}

/// Weighted Gram matrix `M_ab = √(p_a p_b) G_ab / √(S_a S_b)`.
pub(crate) fn gram_density(e: &QuantumEnsemble, opts: GramOptions) -> Mat<f64> {
    let mut m = overlap_matrix(e);
    let scale = e.eigenfunction_scale();
    let n = e.n_states();
    let k = e.grid().continuum;
    for a in 0..n {
        for b in a..n {
            let mut v = m[(b, a)] * scale[a] * scale[b];
            if a != b {
                if opts.orthogonal_block && ((a < k) != (b < k)) {
                    v = 0.0;
                }
                if opts.flip_overlap_sign {
                    v = -v;
                }
            }
            m[(b, a)] = v;
            m[(a, b)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridOptions, Sampling};
    use crate::process::RenewalProcess;
    use approx::assert_abs_diff_eq;

    /// Brute-force overlaps from explicitly expanded amplitude rows.
    fn brute(e: &QuantumEnsemble, width: usize) -> Vec<Vec<f64>> {
        let n = e.n_states();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..width).map(|j| e.root_mass(a + j) * e.root_mass(b + j)).sum())
                    .collect()
            })
            .collect()
    }

    fn assert_matches_brute(e: &QuantumEnsemble, width: usize, tol: f64) {
        let g = overlap_matrix(e);
        let b = brute(e, width);
        for (i, row) in b.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_abs_diff_eq!(g[(i, j)], x, epsilon = tol);
            }
        }
    }

    #[test]
    fn absorbed_matches_brute_force() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let e = QuantumEnsemble::build(&p, &GridOptions::new(37)).unwrap();
        assert_matches_brute(&e, 40, 1e-14);
    }

    #[test]
    fn terminal_state_matches_brute_force() {
        let p = RenewalProcess::delayed_poisson(1.0, 0.7).unwrap();
        let e = QuantumEnsemble::build(&p, &GridOptions::new(12)).unwrap();
        assert_matches_brute(&e, 4000, 1e-13);
    }

    #[test]
    fn periodic_block_matches_brute_force() {
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
            0.1,
            10,
            Tail::Periodic { period: 5, decay: (-0.5 / tau_l).exp() },
            Sampling::Midpoint,
        )
        .unwrap();
        let e = QuantumEnsemble::from_grid(g);
        assert_matches_brute(&e, 3000, 1e-13);
        // the same with no continuum at all
        let g = Grid::from_survival(
            move |t| surv(t + 1.0) / 0.7,
            0.1,
            0,
            Tail::Periodic { period: 5, decay: (-0.5 / tau_l).exp() },
            Sampling::Left,
        )
        .unwrap();
        assert_matches_brute(&QuantumEnsemble::from_grid(g), 3000, 1e-13);
    }

    #[test]
    fn density_has_unit_trace_and_symmetry() {
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let e = QuantumEnsemble::build(&p, &GridOptions::new(50)).unwrap();
        let m = e.gram_density();
        let trace: f64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-12);
        for a in 0..m.nrows() {
            for b in 0..m.nrows() {
                assert_eq!(m[(a, b)], m[(b, a)]);
            }
        }
    }
}
