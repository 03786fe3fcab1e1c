//! Cross-module invariant suite behind `qrenew verify`.

use std::time::Instant;

use qrenew_core::analytic::{delayed_wavenumbers, excess_entropy, suboptimal_block_entropy, uniform_eigenvalue};
use qrenew_core::quantum::GramOptions;
use qrenew_core::report::{analyze_detailed, SUBOPTIMAL_M_MAX};
use qrenew_core::sim::{
    chi_square_intervals, ks_two_sample, sample_interval, simulate_protocol, SimRng,
};
use qrenew_core::{
    CausalClass, ClassicalMachine, GridOptions, ProcessConfig, QuantumEnsemble, RenewalProcess,
    SCHEMA_VERSION,
};
use serde::Serialize;

use crate::args::VerifyArgs;
use crate::commands::load_process;
use crate::error::CliError;
use crate::output::write_json;

/// Grid size for the steady-state identity check.
pub const IDENTITY_N: usize = 512;
/// Grid size for the timescale-invariance check.
pub const INVARIANCE_N: usize = 1024;
/// Rescaling applied in the invariance check.
pub const INVARIANCE_SCALE: f64 = 3.0;
pub const SAMPLE_COUNT: usize = 100_000;
pub const SWEEP_PAIRS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    pub expected: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn value(name: impl Into<String>, measured: f64, expected: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed: passed && measured.is_finite(),
            measured: Some(measured),
            expected: expected.into(),
            error: None,
        }
    }

    fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::value(name, measured, format!("<= {limit:e}"), measured <= limit)
    }

    fn failed(name: impl Into<String>, expected: impl Into<String>, err: impl ToString) -> Self {
        Self {
            name: name.into(),
            passed: false,
            measured: None,
            expected: expected.into(),
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub n: usize,
    pub fault_injection: bool,
    pub passed: bool,
    pub failed: usize,
    pub elapsed_seconds: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub n: usize,
    pub allow_large_n: bool,
    pub gram: GramOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: 2048,
            allow_large_n: false,
            gram: GramOptions::default(),
        }
    }
}

/// The processes checked when no config is given.
pub fn builtin_processes() -> Vec<(String, ProcessConfig)> {
    vec![
        ("uniform".into(), ProcessConfig::uniform(1.0)),
        ("delayed_poisson(1,1)".into(), ProcessConfig::delayed_poisson(1.0, 1.0)),
        ("delayed_poisson(0.5,2)".into(), ProcessConfig::delayed_poisson(0.5, 2.0)),
        ("poisson".into(), ProcessConfig::poisson(1.0)),
    ]
}

/// Largest `|⟨j|ρ|j⟩ − π_j|` over the measurement-basis diagonal.
pub fn identity_error(p: &RenewalProcess, n: usize) -> qrenew_core::Result<f64> {
    let opts = GridOptions::new(n);
    let classical = ClassicalMachine::build(p, &opts)?;
    let diag = QuantumEnsemble::build(p, &opts)?.measurement_diagonal();
    Ok(diag
        .iter()
        .zip(classical.steady_state())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Sweeps `pairs` random (state, window) pairs and returns the largest
/// amplitude mismatch between the surviving state and the causal state the
/// classical machine moves to.
pub fn sweep_update_error(p: &RenewalProcess, n: usize, pairs: usize, seed: u64) -> qrenew_core::Result<f64> {
    let q = QuantumEnsemble::build(p, &GridOptions::new(n))?;
    let grid = q.grid().clone();
    let mut rng = SimRng::new(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < pairs {
        let a = (rng.open_unit() * grid.n_states as f64) as usize;
        let bins = 1 + (rng.open_unit() * grid.n_states.max(2) as f64) as usize;
        let Some(target) = grid.state_of_bin(a + bins) else {
            continue;
        };
        let (_, survived) = q.row(a).project_no_emission(bins);
        let Some(survived) = survived else {
            continue;
        };
        let want = q.row(target);
        let span = grid.n_states + 2 * grid.period() + 8;
        for j in 0..span {
            worst = worst.max((survived.amplitude(j) - want.amplitude(j)).abs());
        }
        done += 1;
    }
    Ok(worst)
}

fn run_process_checks(
    name: &str,
    p: &RenewalProcess,
    opts: &VerifyOptions,
    seed: u64,
    checks: &mut Vec<Check>,
) {
    match identity_error(p, IDENTITY_N) {
        Ok(e) => checks.push(Check::below(format!("steady-state-identity/{name}"), e, 1e-10)),
        Err(e) => checks.push(Check::failed(format!("steady-state-identity/{name}"), "<= 1e-10", e)),
    }

    let grid = GridOptions::new(opts.n).allow_large_n(opts.allow_large_n);
    match analyze_detailed(p, &grid, opts.gram) {
        Ok(a) => {
            let r = &a.report;
            checks.push(Check::value(
                format!("cq-le-cmu/{name}"),
                r.c_q - r.c_mu,
                "C_q - C_mu <= 1e-9",
                r.ordering.cq_le_cmu,
            ));
            if r.ordering.excess_checked {
                checks.push(Check::value(
                    format!("e-le-cq/{name}"),
                    r.e - r.c_q,
                    "E - C_q <= 0.01",
                    r.ordering.e_le_cq,
                ));
            }
            if let Some(bound) = r.analytic.suboptimal_block_entropy {
                checks.push(Check::value(
                    format!("cq-le-suboptimal/{name}"),
                    r.c_q - bound,
                    "C_q - suboptimal block entropy <= 0",
                    r.c_q <= bound,
                ));
            }
            if let Some(reference) = r.analytic.c_q {
                checks.push(Check::below(format!("cq-analytic/{name}"), (r.c_q - reference).abs(), 0.01));
            }
            if p.uniform_width().is_some() {
                let rel = a
                    .spectrum
                    .eigenvalues
                    .iter()
                    .take(20)
                    .enumerate()
                    .map(|(i, &l)| ((l - uniform_eigenvalue(i + 1)) / uniform_eigenvalue(i + 1)).abs())
                    .fold(0.0, f64::max);
                checks.push(Check::below(format!("analytic-spectrum/{name}"), rel, 1e-3));
            }
            if matches!(p.causal_class(), CausalClass::Poisson { .. }) {
                let worst = r.c_mu.abs().max(r.c_q.abs()).max(r.e.abs());
                checks.push(Check::below(format!("zero-entropy/{name}"), worst, 1e-12));
            }
        }
        Err(e) => checks.push(Check::failed(format!("cq-le-cmu/{name}"), "analysis succeeds", e)),
    }

    let invariance = (|| {
        let g = GridOptions::new(INVARIANCE_N);
        let base = analyze_detailed(p, &g, opts.gram)?.report.c_q;
        let scaled = analyze_detailed(&p.rescale(INVARIANCE_SCALE)?, &g, opts.gram)?.report.c_q;
        Ok::<_, qrenew_core::Error>((base - scaled).abs())
    })();
    match invariance {
        Ok(d) => checks.push(Check::below(format!("timescale-invariance/{name}"), d, 1e-6)),
        Err(e) => checks.push(Check::failed(format!("timescale-invariance/{name}"), "<= 1e-6", e)),
    }

    match excess_entropy(p) {
        Ok(e) => {
            if let Some(closed) = e.closed_form {
                checks.push(Check::below(
                    format!("excess-closed-form/{name}"),
                    (e.quadrature - closed).abs(),
                    1e-6,
                ));
            }
        }
        Err(e) => checks.push(Check::failed(format!("excess-closed-form/{name}"), "quadrature converges", e)),
    }

    let mut rng = SimRng::new(seed);
    let samples: Vec<f64> = (0..SAMPLE_COUNT).map(|_| sample_interval(p, &mut rng)).collect();
    match chi_square_intervals(p, &samples, 50, 0.01) {
        Ok(t) => checks.push(Check::value(
            format!("sampling-chi-square/{name}"),
            t.statistic,
            format!("<= {:.3} (1% level, {} dof)", t.critical, t.dof),
            t.passed,
        )),
        Err(e) => checks.push(Check::failed(format!("sampling-chi-square/{name}"), "test runs", e)),
    }

    match sweep_update_error(p, 256, SWEEP_PAIRS, seed) {
        Ok(e) => checks.push(Check::below(format!("sweep-update/{name}"), e, 1e-12)),
        Err(e) => checks.push(Check::failed(format!("sweep-update/{name}"), "<= 1e-12", e)),
    }
}

fn run_global_checks(checks: &mut Vec<Check>) {
    match delayed_wavenumbers(1.0, 1.0, SUBOPTIMAL_M_MAX) {
        Ok(roots) => {
            let worst = roots.roots.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
            checks.push(Check::below("transcendental-roots/residual", worst, 1e-10));
        }
        Err(e) => checks.push(Check::failed("transcendental-roots/residual", "<= 1e-10", e)),
    }
    match suboptimal_block_entropy(1.0, 1.0, SUBOPTIMAL_M_MAX) {
        Ok(s) => checks.push(Check::below("transcendental-roots/trace", (s.block_trace - 0.5).abs(), 1e-3)),
        Err(e) => checks.push(Check::failed("transcendental-roots/trace", "<= 1e-3", e)),
    }

    let protocol = (|| {
        let p = RenewalProcess::uniform(1.0)?;
        let grid = qrenew_core::Grid::for_process(&p, &GridOptions::new(1024))?;
        let proto = simulate_protocol(&grid, SAMPLE_COUNT, &mut SimRng::new(9))?;
        let mut rng = SimRng::new(9);
        let direct: Vec<f64> = (0..SAMPLE_COUNT).map(|_| sample_interval(&p, &mut rng)).collect();
        Ok::<_, qrenew_core::Error>((ks_two_sample(&proto.intervals(), &direct), grid.delta_t))
    })();
    match protocol {
        Ok((d, dt)) => checks.push(Check::below("protocol-vs-direct-ks/uniform", d, 2.0 * dt)),
        Err(e) => checks.push(Check::failed("protocol-vs-direct-ks/uniform", "< 2 dt", e)),
    }
}

/// Runs the suite over the built-in processes, or over `process` alone.
pub fn run_suite(process: Option<(String, RenewalProcess)>, opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    match process {
        Some((name, p)) => run_process_checks(&name, &p, opts, 0, &mut checks),
        None => {
            for (i, (name, config)) in builtin_processes().into_iter().enumerate() {
                match config.build() {
                    Ok(p) => run_process_checks(&name, &p, opts, i as u64 + 1, &mut checks),
                    Err(e) => checks.push(Check::failed(format!("build/{name}"), "process builds", e)),
                }
            }
            run_global_checks(&mut checks);
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        n: opts.n,
        fault_injection: opts.gram.flip_overlap_sign,
        passed: failed == 0,
        failed,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        checks,
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let process = match &args.process {
        Some(path) => Some((path.display().to_string(), load_process(path)?.1)),
        None => None,
    };
    let opts = VerifyOptions {
        n: args.n,
        allow_large_n: args.allow_large_n,
        gram: GramOptions {
            flip_overlap_sign: args.inject_overlap_sign_error,
            ..GramOptions::default()
        },
    };
    let report = run_suite(process, &opts);
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAIL {}: measured {:?}, expected {}{}",
            c.name,
            c.measured,
            c.expected,
            c.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    write_json(&report, args.out.as_deref())?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification {
            failed: report.failed,
            total: report.checks.len(),
        })
    }
}
