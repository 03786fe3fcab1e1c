//! The non-verification subcommands, split into computation (usable as a
//! library) and output.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use qrenew_core::analytic::uniform_eigenvalue;
use qrenew_core::report::{analyze_detailed, Analysis};
use qrenew_core::sim::{simulate_protocol, simulate_trajectory, SimRng, Trajectory, RNG_ALGORITHM};
use qrenew_core::{
    analyze, ComplexityReport, Grid, GridOptions, ProcessConfig, RenewalProcess, SCHEMA_VERSION,
};
use serde::{Deserialize, Serialize};

use crate::args::{
    AnalyzeArgs, EigenspectrumArgs, Format, SampleArgs, SweepDiscretizationArgs, SweepRatioArgs,
};
use crate::error::{CliError, Context};
use crate::output::{emit_table, write_json};

/// Reads and builds a process definition.
pub fn load_process(path: &Path) -> Result<(ProcessConfig, RenewalProcess), CliError> {
    let what = || format!("{}", path.display());
    let config = ProcessConfig::from_path(path).map_err(|e| match e {
        qrenew_core::Error::Io { path, source } => CliError::Io { path, source },
        source => CliError::Core {
            context: what(),
            source,
        },
    })?;
    let process = config.build().context(what())?;
    Ok((config, process))
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
pub fn parallel_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

/// Metadata shared by every table sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct TableMetadata<E: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process_file: Option<PathBuf>,
    pub grid_options: Vec<GridOptions>,
    #[serde(flatten)]
    pub extra: E,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeExtra {
    pub report: ComplexityReport,
}

/// One row of a discretization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub delta_t: f64,
    #[serde(rename = "C_mu")]
    pub c_mu: f64,
    #[serde(rename = "C_q")]
    pub c_q: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl From<&ComplexityReport> for SweepRow {
    fn from(r: &ComplexityReport) -> Self {
        Self {
            n: r.n,
            delta_t: r.delta_t,
            c_mu: r.c_mu,
            c_q: r.c_q,
            e: r.e,
        }
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let (config, p) = load_process(&args.process)?;
    let report = analyze(&p, &args.grid.options(args.n)).context("analysis")?;
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&report, args.output.out.as_deref()),
        Format::Csv => emit_table(
            &[SweepRow::from(&report)],
            &TableMetadata {
                schema_version: SCHEMA_VERSION,
                command: "analyze",
                process: Some(config),
                process_file: Some(args.process.clone()),
                grid_options: vec![args.grid.options(args.n)],
                extra: AnalyzeExtra { report: report.clone() },
            },
            &args.output,
            Format::Csv,
        ),
    }
}

/// Full reports at every grid size, in the order given.
pub fn sweep_discretization(
    p: &RenewalProcess,
    options: &[GridOptions],
    jobs: usize,
) -> Result<Vec<ComplexityReport>, CliError> {
    parallel_map(options, jobs, |o| analyze(p, o).context(format!("analysis at N = {}", o.n)))
        .into_iter()
        .collect()
}

pub fn cmd_sweep_discretization(args: &SweepDiscretizationArgs) -> Result<(), CliError> {
    if args.n_list.is_empty() {
        return Err(CliError::Usage("--n needs at least one grid size".into()));
    }
    let (config, p) = load_process(&args.process)?;
    let options: Vec<GridOptions> = args.n_list.iter().map(|&n| args.grid.options(n)).collect();
    let reports = sweep_discretization(&p, &options, args.jobs)?;
    let rows: Vec<SweepRow> = reports.iter().map(SweepRow::from).collect();
    emit_table(
        &rows,
        &TableMetadata {
            schema_version: SCHEMA_VERSION,
            command: "sweep-discretization",
            process: Some(config),
            process_file: Some(args.process.clone()),
            grid_options: options,
            extra: SweepExtra {
                tail_mass: reports.iter().map(|r| r.tail_mass).collect(),
                renormalization: reports.iter().map(|r| r.renormalization).collect(),
            },
        },
        &args.output,
        Format::Csv,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepExtra {
    pub tail_mass: Vec<f64>,
    pub renormalization: Vec<f64>,
}

/// One row of the ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub ratio: f64,
    #[serde(rename = "C_q")]
    pub c_q: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub suboptimal_bound: Option<f64>,
    /// `C_q` with both timescales multiplied by the check scale.
    #[serde(rename = "C_q_rescaled")]
    pub c_q_rescaled: f64,
    pub scale_deviation: f64,
}

/// Reports for delayed Poisson processes `τ_R = ratio·τ_L`, each paired
/// with the same process with both timescales multiplied by `scale`.
pub fn sweep_ratio_reports(
    ratios: &[f64],
    tau_l: f64,
    scale: f64,
    opts: &GridOptions,
    jobs: usize,
) -> Result<Vec<(ComplexityReport, ComplexityReport)>, CliError> {
    // every (ratio, scale) pair is an independent job
    let points: Vec<(f64, f64)> = ratios.iter().flat_map(|&r| [(r, 1.0), (r, scale)]).collect();
    let reports = parallel_map(&points, jobs, |&(ratio, s)| {
        let what = format!("ratio {ratio} at timescale {s}");
        let p = RenewalProcess::delayed_poisson(ratio * tau_l * s, tau_l * s).context(what.clone())?;
        analyze(&p, opts).context(what)
    });
    let mut pairs = Vec::with_capacity(ratios.len());
    let mut it = reports.into_iter();
    while let (Some(base), Some(scaled)) = (it.next(), it.next()) {
        pairs.push((base?, scaled?));
    }
    Ok(pairs)
}

impl RatioRow {
    pub fn from_pair(ratio: f64, base: &ComplexityReport, scaled: &ComplexityReport) -> Self {
        Self {
            ratio,
            c_q: base.c_q,
            e: base.e,
            suboptimal_bound: base.analytic.suboptimal_block_entropy,
            c_q_rescaled: scaled.c_q,
            scale_deviation: (scaled.c_q - base.c_q).abs(),
        }
    }
}

/// Rows of the ratio sweep; see [`sweep_ratio_reports`].
pub fn sweep_ratio(
    ratios: &[f64],
    tau_l: f64,
    scale: f64,
    opts: &GridOptions,
    jobs: usize,
) -> Result<Vec<RatioRow>, CliError> {
    let pairs = sweep_ratio_reports(ratios, tau_l, scale, opts, jobs)?;
    Ok(ratios
        .iter()
        .zip(&pairs)
        .map(|(&r, (base, scaled))| RatioRow::from_pair(r, base, scaled))
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioExtra {
    pub tau_l: f64,
    pub scale: f64,
}

pub fn cmd_sweep_ratio(args: &SweepRatioArgs) -> Result<(), CliError> {
    if args.ratios.is_empty() {
        return Err(CliError::Usage("--ratios needs at least one value".into()));
    }
    let opts = args.grid.options(args.n);
    let rows = sweep_ratio(&args.ratios, args.tau_l, args.scale, &opts, args.jobs)?;
    emit_table(
        &rows,
        &TableMetadata {
            schema_version: SCHEMA_VERSION,
            command: "sweep-ratio",
            process: None,
            process_file: None,
            grid_options: vec![opts],
            extra: RatioExtra {
                tau_l: args.tau_l,
                scale: args.scale,
            },
        },
        &args.output,
        Format::Csv,
    )
}

/// First index of the eigenvalue tail used to fix `β`.
pub const BETA_START: usize = 101;

/// `Σ_{n ≥ n0} 1/n²`: direct sum to 20 terms, then the asymptotic series
/// of the trigamma function.
pub fn inverse_square_tail(n0: usize) -> f64 {
    let n0 = n0.max(1);
    let head_end = n0.max(20);
    let head: f64 = (n0..head_end).map(|n| 1.0 / (n as f64 * n as f64)).sum();
    let x = head_end as f64;
    let x2 = x * x;
    head + 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
        - 1.0 / (30.0 * x2 * x2 * x2 * x2 * x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub n: usize,
    pub lambda_numeric: f64,
    pub lambda_analytic: Option<f64>,
    pub beta_over_n2: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenDump {
    pub rows: Vec<EigenRow>,
    /// `β` with `Σ_{n≥101} β/n²` equal to the numeric tail sum.
    pub beta: Option<f64>,
    pub tail_sum: f64,
    pub dumped_trace: f64,
    /// Mass added by clipping negative eigenvalues to zero.
    pub clip_mass: f64,
    pub clipped: usize,
    pub trace_error: f64,
    pub dimension: usize,
    pub c_q: f64,
}

pub fn eigenspectrum(analysis: &Analysis, p: &RenewalProcess, n_dump: usize) -> EigenDump {
    let ev = &analysis.spectrum.eigenvalues;
    let tail_sum: f64 = ev.iter().skip(BETA_START - 1).sum();
    let beta = (ev.len() >= BETA_START).then(|| tail_sum / inverse_square_tail(BETA_START));
    let uniform = p.uniform_width().is_some();
    let rows: Vec<EigenRow> = ev
        .iter()
        .take(n_dump)
        .enumerate()
        .map(|(i, &lambda)| {
            let n = i + 1;
            EigenRow {
                n,
                lambda_numeric: lambda,
                lambda_analytic: uniform.then(|| uniform_eigenvalue(n)),
                beta_over_n2: beta.map(|b| b / (n as f64 * n as f64)),
            }
        })
        .collect();
    EigenDump {
        dumped_trace: rows.iter().map(|r| r.lambda_numeric).sum(),
        rows,
        beta,
        tail_sum,
        clip_mass: analysis.spectrum.negative_mass,
        clipped: analysis.spectrum.clipped,
        trace_error: analysis.spectrum.trace_error,
        dimension: ev.len(),
        c_q: analysis.report.c_q,
    }
}

pub fn cmd_eigenspectrum(args: &EigenspectrumArgs) -> Result<(), CliError> {
    let (config, p) = load_process(&args.process)?;
    let opts = args.grid.options(args.n);
    let analysis = analyze_detailed(&p, &opts, Default::default()).context("analysis")?;
    let dump = eigenspectrum(&analysis, &p, args.n_dump);
    #[derive(Serialize)]
    struct Extra {
        beta: Option<f64>,
        beta_start: usize,
        tail_sum: f64,
        dumped: usize,
        dumped_trace: f64,
        clip_mass: f64,
        clipped: usize,
        trace_error: f64,
        dimension: usize,
        c_q: f64,
    }
    emit_table(
        &dump.rows,
        &TableMetadata {
            schema_version: SCHEMA_VERSION,
            command: "eigenspectrum",
            process: Some(config),
            process_file: Some(args.process.clone()),
            grid_options: vec![opts],
            extra: Extra {
                beta: dump.beta,
                beta_start: BETA_START,
                tail_sum: dump.tail_sum,
                dumped: dump.rows.len(),
                dumped_trace: dump.dumped_trace,
                clip_mass: dump.clip_mass,
                clipped: dump.clipped,
                trace_error: dump.trace_error,
                dimension: dump.dimension,
                c_q: dump.c_q,
            },
        },
        &args.output,
        Format::Csv,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleMetadata {
    pub schema_version: u32,
    pub command: &'static str,
    pub process: ProcessConfig,
    pub process_file: PathBuf,
    pub mode: &'static str,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub count: usize,
    pub origin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    pub truncation_events: usize,
}

/// Direct or protocol trajectory for the `sample` command.
pub fn sample(p: &RenewalProcess, args: &SampleArgs) -> Result<(Trajectory, Option<Grid>), CliError> {
    let mut rng = SimRng::new(args.seed);
    if args.protocol {
        if args.origin != 0.0 {
            return Err(CliError::Usage("--origin is not supported with --protocol".into()));
        }
        let grid = Grid::for_process(p, &args.grid.options(args.n)).context("grid")?;
        let t = simulate_protocol(&grid, args.count, &mut rng).context("protocol simulation")?;
        Ok((t, Some(grid)))
    } else {
        let t = simulate_trajectory(p, args.count, args.origin, &mut rng).context("sampling")?;
        Ok((t, None))
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    index: usize,
    event_time: f64,
}

pub fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let (config, p) = load_process(&args.process)?;
    let (traj, grid) = sample(&p, args)?;
    let meta = SampleMetadata {
        schema_version: SCHEMA_VERSION,
        command: "sample",
        process: config,
        process_file: args.process.clone(),
        mode: if args.protocol { "protocol" } else { "direct" },
        seed: args.seed,
        rng_algorithm: RNG_ALGORITHM,
        count: args.count,
        origin: args.origin,
        grid,
        truncation_events: traj.truncation_events,
    };
    let rows: Vec<TrajectoryRow> = traj
        .event_times
        .iter()
        .enumerate()
        .map(|(index, &event_time)| TrajectoryRow { index, event_time })
        .collect();
    emit_table(&rows, &meta, &args.output, Format::Csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_tail_matches_direct_sum() {
        let direct: f64 = (101..10_000_000u64).map(|n| 1.0 / (n as f64).powi(2)).sum::<f64>() + 1.0 / 9_999_999.5;
        assert!((inverse_square_tail(101) - direct).abs() < 1e-13);
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        assert!((inverse_square_tail(1) - basel).abs() < 1e-13);
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        let out = parallel_map(&items, 4, |&i| i * i);
        assert_eq!(out, items.iter().map(|i| i * i).collect::<Vec<_>>());
    }
}
