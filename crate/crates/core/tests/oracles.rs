//! End-to-end values checked against hand or closed-form computations.

use std::f64::consts::{LOG2_E, PI};

use approx::assert_abs_diff_eq;
use qrenew_core::analytic::{delayed_block_eigenvalue, delayed_wavenumbers, uniform_eigenvalue};
use qrenew_core::quantum::{spectrum, von_neumann_entropy};
use qrenew_core::{analyze, ClassicalMachine, GridOptions, ProcessConfig, QuantumEnsemble, RenewalProcess, Sampling};

#[test]
fn two_state_uniform_by_hand() {
    // Left sampling, N = 2: S = (1, ½), π = (⅔, ⅓), ⟨σ0|σ1⟩ = 1/√2, so the
    // weighted Gram matrix is [[⅔, ⅓], [⅓, ⅓]] with eigenvalues (1 ± √5/3)/2.
    let p = RenewalProcess::uniform(1.0).unwrap();
    let opts = GridOptions::new(2).sampling(Sampling::Left);
    let c = ClassicalMachine::build(&p, &opts).unwrap();
    assert_abs_diff_eq!(c.steady_state()[0], 2.0 / 3.0, epsilon = 1e-15);
    let q = QuantumEnsemble::build(&p, &opts).unwrap();
    let m = q.gram_density();
    assert_abs_diff_eq!(m[(0, 0)], 2.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(m[(0, 1)], 1.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(m[(1, 1)], 1.0 / 3.0, epsilon = 1e-15);
    let s = spectrum(&m).unwrap();
    assert_abs_diff_eq!(s.eigenvalues[0], (1.0 + 5f64.sqrt() / 3.0) / 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(von_neumann_entropy(&s), 0.550_047_759_582_757_5, epsilon = 1e-13);
}

#[test]
fn three_state_classical_by_hand() {
    let p = RenewalProcess::uniform(3.0).unwrap();
    let c = ClassicalMachine::build(&p, &GridOptions::new(3).sampling(Sampling::Left)).unwrap();
    assert_abs_diff_eq!(c.statistical_complexity(), 1.459_147_917_027_244_8, epsilon = 1e-14);
}

#[test]
fn uniform_report_tracks_analytic_limit() {
    let r = analyze(&RenewalProcess::uniform(2.0).unwrap(), &GridOptions::new(1024)).unwrap();
    assert!((r.c_q - 1.2809).abs() < 0.01);
    assert_abs_diff_eq!(r.e, LOG2_E - 1.0, epsilon = 1e-9);
    // C_μ = log₂ N + log₂e/2 − 1 + o(1) for the uniform grid
    assert_abs_diff_eq!(r.c_mu, 10.0 + LOG2_E / 2.0 - 1.0, epsilon = 1e-3);
}

#[test]
fn uniform_leading_eigenvalues() {
    let q = QuantumEnsemble::build(&RenewalProcess::uniform(1.0).unwrap(), &GridOptions::new(1024)).unwrap();
    let s = spectrum(&q.gram_density()).unwrap();
    assert_abs_diff_eq!(uniform_eigenvalue(1), 8.0 / (PI * PI), epsilon = 1e-15);
    for n in 1..=5 {
        let want = uniform_eigenvalue(n);
        assert!(((s.eigenvalues[n - 1] - want) / want).abs() < 1e-3, "λ_{n}");
    }
}

#[test]
fn delayed_first_root() {
    // sin(k)(4k² − 1) = 4k cos(k) at τ_R = τ_L = 1: first positive root by
    // plain bisection on [0.6, 1.5]
    let roots = delayed_wavenumbers(1.0, 1.0, 3).unwrap();
    let k = roots.roots[0].k;
    assert_abs_diff_eq!(k, 0.960_188_873_914_782_8, epsilon = 1e-12);
    assert!(roots.roots[1].k > PI && roots.roots[1].k < 2.0 * PI);
    let lambda = delayed_block_eigenvalue(k, 1.0, 1.0);
    assert_abs_diff_eq!(lambda, 4.0 / (2.0 * (4.0 * k * k + 1.0)), epsilon = 1e-15);
}

#[test]
fn config_to_report_pipeline() {
    let cfg = ProcessConfig::from_json_str(r#"{"family": "delayed_poisson", "tau_r": 2.0, "tau_l": 2.0}"#).unwrap();
    let p = cfg.build().unwrap();
    let a = analyze(&p, &GridOptions::new(256)).unwrap();
    let b = analyze(&RenewalProcess::delayed_poisson(1.0, 1.0).unwrap(), &GridOptions::new(256)).unwrap();
    assert_abs_diff_eq!(a.c_q, b.c_q, epsilon = 1e-9);
    assert_abs_diff_eq!(a.c_mu, b.c_mu, epsilon = 1e-9);
    assert!(a.ordering.holds());
}

#[test]
fn tabulated_csv_process() {
    let dir = std::env::temp_dir().join(format!("qrenew-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    // uniform density on [0, 1) as a table
    std::fs::write(dir.join("phi.csv"), "t,phi\n0,1\n0.5,1\n1,1\n").unwrap();
    std::fs::write(dir.join("cfg.json"), r#"{"family": "tabulated", "csv": "phi.csv"}"#).unwrap();
    let p = ProcessConfig::from_path(&dir.join("cfg.json")).unwrap().build().unwrap();
    let tab = analyze(&p, &GridOptions::new(256)).unwrap();
    let exact = analyze(&RenewalProcess::uniform(1.0).unwrap(), &GridOptions::new(256)).unwrap();
    assert_abs_diff_eq!(tab.c_q, exact.c_q, epsilon = 1e-9);
    assert_abs_diff_eq!(tab.e, exact.e, epsilon = 1e-6);
    std::fs::remove_dir_all(&dir).ok();
}
