//! Monte-Carlo sampling of renewal processes and of the discretized
//! step-by-step emission protocol.
//!
//! Every sampler draws from [`SimRng`], a seeded ChaCha8 stream. Parallel
//! batches split a master seed into independent streams (`child(i)` uses the
//! same key with stream id `i + 1`), so output never depends on how many
//! threads ran it.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::{Grid, Tail};
use crate::process::RenewalProcess;

/// Identifier of the random source, embedded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9/seed_from_u64;child-stream=index+1";

/// Seeded, reproducible random source.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            seed,
            stream: 0,
        }
    }

    /// Independent generator for the `index`-th parallel task.
    pub fn child(&self, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(index + 1);
        Self {
            inner,
            seed: self.seed,
            stream: index + 1,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on the open interval `(0, 1)`.
    pub fn open_unit(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One inter-event interval drawn from `φ` by inverse transform.
pub fn sample_interval(p: &RenewalProcess, rng: &mut SimRng) -> f64 {
    p.inverse_survival(rng.open_unit())
}

/// Time to the next emission given `t_since` since the last one.
///
/// Draws `y = u Φ(t_since)` and returns `Φ⁻¹(y) − t_since`.
pub fn sample_conditional(p: &RenewalProcess, t_since: f64, rng: &mut SimRng) -> Result<f64> {
    let s = p.survival(t_since);
    if !(s > 0.0) {
        return Err(Error::UnreachablePast { t: t_since });
    }
    let y = rng.open_unit() * s;
    Ok((p.inverse_survival(y) - t_since).max(0.0))
}

/// A run of emissions measured from time zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub event_times: Vec<f64>,
    /// Time since the last emission at time zero.
    pub origin: f64,
    pub seed: u64,
    pub stream: u64,
    /// Emissions forced in the last bin because the grid was cut (protocol
    /// runs only).
    #[serde(default)]
    pub truncation_events: usize,
}

impl Trajectory {
    /// Waiting times between consecutive emissions; the first is measured
    /// from time zero.
    pub fn intervals(&self) -> Vec<f64> {
        let mut last = 0.0;
        self.event_times
            .iter()
            .map(|&t| {
                let dt = t - last;
                last = t;
                dt
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }

    /// Writes `index,event_time` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "event_time"])?;
        for (i, t) in self.event_times.iter().enumerate() {
            w.serialize((i, t))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `count` emissions: the first conditioned on `origin`, the rest IID.
pub fn simulate_trajectory(
    p: &RenewalProcess,
    count: usize,
    origin: f64,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    if count == 0 {
        return Err(Error::Validation("trajectory needs at least one emission".into()));
    }
    let mut times = Vec::with_capacity(count);
    let mut t = sample_conditional(p, origin, rng)?;
    times.push(t);
    for _ in 1..count {
        t += sample_interval(p, rng);
        times.push(t);
    }
    Ok(Trajectory {
        event_times: times,
        origin,
        seed: rng.seed(),
        stream: rng.stream(),
        truncation_events: 0,
    })
}

/// Runs `batches` independent trajectories of `count` emissions each, the
/// `i`-th on `master.child(i)`, using up to `jobs` threads. Results are in
/// batch order.
pub fn simulate_batch(
    p: &RenewalProcess,
    count: usize,
    origin: f64,
    batches: usize,
    master: &SimRng,
    jobs: usize,
) -> Result<Vec<Trajectory>> {
    let jobs = jobs.max(1).min(batches.max(1));
    let mut slots: Vec<Option<Result<Trajectory>>> = (0..batches).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (worker, chunk) in slots.chunks_mut(batches.div_ceil(jobs).max(1)).enumerate() {
            let first = worker * batches.div_ceil(jobs).max(1);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let mut rng = master.child((first + k) as u64);
                    *slot = Some(simulate_trajectory(p, count, origin, &mut rng));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every batch slot is filled")).collect()
}

/// Step-by-step emission protocol on a grid.
///
/// From state `n` the step emits with probability `1 − S_{n+1}/S_n`,
/// otherwise the state advances. Each emission is simulated in one go by
/// drawing `y = u S_0` and walking until `S_{n+1} < y ≤ S_n`, which has the
/// same law as the per-step coin flips and consumes one draw per emission.
/// Emissions are recorded at the midpoint of their bin,
/// `(n + off + ½) δt`. A run that reaches the end of an absorbed grid emits
/// in the last bin; if it got there only because the grid was cut
/// (`y ≤ Φ(cut)`) the emission counts as a truncation event.
pub fn simulate_protocol(grid: &Grid, emissions: usize, rng: &mut SimRng) -> Result<Trajectory> {
    if emissions == 0 {
        return Err(Error::Validation("protocol run needs at least one emission".into()));
    }
    let off = grid.sampling.offset();
    let s0 = grid.survival_at(0);
    let mut times = Vec::with_capacity(emissions);
    let mut truncations = 0;
    let mut t = 0.0;
    for _ in 0..emissions {
        let y = rng.open_unit() * s0;
        let mut n = 0usize;
        while y <= grid.survival_at(n + 1) {
            n += 1;
        }
        if matches!(grid.tail, Tail::Absorbed) && n + 1 == grid.continuum && y <= grid.tail_mass {
            truncations += 1;
        }
        t += (n as f64 + off + 0.5) * grid.delta_t;
        times.push(t);
    }
    Ok(Trajectory {
        event_times: times,
        origin: 0.0,
        seed: rng.seed(),
        stream: rng.stream(),
        truncation_events: truncations,
    })
}

/// Bin index of a protocol interval recorded at a bin midpoint.
pub fn protocol_bin(grid: &Grid, interval: f64) -> usize {
    let k = interval / grid.delta_t - grid.sampling.offset() - 0.5;
    k.round().max(0.0) as usize
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic 1%-level critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    /// Critical value at the chosen level.
    pub critical: f64,
    pub passed: bool,
}

/// Pearson χ² test of observed counts against expected probabilities.
/// Adjacent cells are pooled until each expects at least 5 counts.
pub fn chi_square_gof(observed: &[u64], expected_prob: &[f64], level: f64) -> Result<ChiSquareTest> {
    if observed.len() != expected_prob.len() || observed.is_empty() {
        return Err(Error::Validation("observed and expected cells differ in length".into()));
    }
    let total: u64 = observed.iter().sum();
    let psum: f64 = expected_prob.iter().sum();
    if total == 0 || !(psum > 0.0) {
        return Err(Error::DegenerateInput("empty χ² test".into()));
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(expected_prob) {
        o += obs as f64;
        e += n * p / psum;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::DegenerateInput("χ² test needs at least two cells".into()));
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Validation(e.to_string()))?
        .inverse_cdf(1.0 - level);
    Ok(ChiSquareTest {
        statistic,
        dof,
        critical,
        passed: statistic <= critical,
    })
}

/// `sup { t : Φ(t) >= y }` by bisection on `Φ` alone, so the χ² cells do not
/// share code with the sampler under test.
fn survival_quantile(p: &RenewalProcess, y: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = p.mean_interval();
    while p.survival(hi) >= y {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p.survival(mid) >= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// χ² test of continuous samples against `φ` using `bins` equiprobable cells
/// cut where `Φ = 1 − i/bins`.
pub fn chi_square_intervals(
    p: &RenewalProcess,
    samples: &[f64],
    bins: usize,
    level: f64,
) -> Result<ChiSquareTest> {
    if bins < 2 {
        return Err(Error::Validation("need at least two χ² cells".into()));
    }
    // interior edges, increasing in time
    let edges: Vec<f64> = (1..bins)
        .map(|i| survival_quantile(p, 1.0 - i as f64 / bins as f64))
        .collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        counts[edges.partition_point(|&e| e < x)] += 1;
    }
    chi_square_gof(&counts, &vec![1.0 / bins as f64; bins], level)
}

/// χ² test of protocol intervals against the discretized law `q_n / S_0`.
pub fn chi_square_protocol(grid: &Grid, intervals: &[f64], level: f64) -> Result<ChiSquareTest> {
    let s0 = grid.survival_at(0);
    let mut probs = Vec::new();
    let mut mass = 0.0;
    let mut k = 0;
    // enumerate bins until the residual mass is negligible
    while mass < s0 * (1.0 - 1e-12) && (grid.emission_mass(k) > 0.0 || k < grid.n_states) {
        let q = grid.emission_mass(k);
        probs.push(q / s0);
        mass += q;
        k += 1;
        if k > 1 << 24 {
            break;
        }
    }
    let mut counts = vec![0u64; probs.len()];
    for &x in intervals {
        let b = protocol_bin(grid, x).min(probs.len() - 1);
        counts[b] += 1;
    }
    chi_square_gof(&counts, &probs, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridOptions;
    use crate::quantum::QuantumEnsemble;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn uniform_mean_within_three_sigma() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let mut rng = SimRng::new(11);
        let x: Vec<f64> = (0..1_000_000).map(|_| sample_interval(&p, &mut rng)).collect();
        let (m, _) = mean_var(&x);
        let sigma = 1.0 / (12f64.sqrt() * 1e3);
        assert!((m - 0.5).abs() < 3.0 * sigma, "mean {m}");
    }

    #[test]
    fn poisson_variance_near_one() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let mut rng = SimRng::new(12);
        let x: Vec<f64> = (0..1_000_000).map(|_| sample_interval(&p, &mut rng)).collect();
        let (_, v) = mean_var(&x);
        // Var of the sample variance of Exp(1) is (μ4 − σ⁴)/n = 8/n
        assert!((v - 1.0).abs() < 3.0 * (8.0f64 / 1e6).sqrt(), "variance {v}");
    }

    #[test]
    fn delayed_never_inside_rest_period() {
        let p = RenewalProcess::delayed_poisson(1.0, 0.5).unwrap();
        let mut rng = SimRng::new(13);
        assert!((0..100_000).all(|_| sample_interval(&p, &mut rng) >= 1.0));
    }

    #[test]
    fn conditional_uniform_half() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let mut rng = SimRng::new(14);
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|_| sample_conditional(&p, 0.5, &mut rng).unwrap()).collect();
        let (m, _) = mean_var(&x);
        assert!(x.iter().all(|&t| (0.0..0.5).contains(&t)));
        let sigma = 0.5 / (12f64.sqrt() * (n as f64).sqrt());
        assert!((m - 0.25).abs() < 3.0 * sigma, "mean {m}");
        assert!(matches!(
            sample_conditional(&p, 1.0, &mut rng),
            Err(Error::UnreachablePast { .. })
        ));
    }

    #[test]
    fn conditional_at_zero_is_interval() {
        let p = RenewalProcess::delayed_poisson(0.3, 1.0).unwrap();
        let mut a = SimRng::new(5);
        let mut b = SimRng::new(5);
        for _ in 0..1000 {
            assert_eq!(sample_interval(&p, &mut a), sample_conditional(&p, 0.0, &mut b).unwrap());
        }
    }

    #[test]
    fn poisson_memoryless_ks() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let n = 100_000;
        let draws: Vec<Vec<f64>> = [0.0, 1.0, 5.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut rng = SimRng::new(20).child(i as u64);
                (0..n).map(|_| sample_conditional(&p, s, &mut rng).unwrap()).collect()
            })
            .collect();
        let crit = ks_critical_1pct(n, n);
        for i in 0..3 {
            for j in i + 1..3 {
                let d = ks_two_sample(&draws[i], &draws[j]);
                assert!(d < crit, "KS {d} >= {crit}");
            }
        }
    }

    #[test]
    fn self_update_matches_conditional() {
        // conditioning direct intervals on survival past w gives the
        // conditional law at w
        let p = RenewalProcess::delayed_poisson(1.0, 1.0).unwrap();
        let w = 1.3;
        let mut rng = SimRng::new(31);
        let mut survivors = Vec::new();
        while survivors.len() < 50_000 {
            let t = sample_interval(&p, &mut rng);
            if t > w {
                survivors.push(t - w);
            }
        }
        let mut rng = SimRng::new(32);
        let cond: Vec<f64> = (0..50_000).map(|_| sample_conditional(&p, w, &mut rng).unwrap()).collect();
        assert!(ks_two_sample(&survivors, &cond) < ks_critical_1pct(50_000, 50_000));
    }

    #[test]
    fn trajectory_rate_and_determinism() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let count = 100_000;
        let a = simulate_trajectory(&p, count, 0.0, &mut SimRng::new(7)).unwrap();
        let b = simulate_trajectory(&p, count, 0.0, &mut SimRng::new(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.event_times.windows(2).all(|w| w[1] > w[0]));
        let rate = count as f64 / a.event_times[count - 1];
        // duration has sd √count · σ_interval
        let sigma_rate = 2.0 * (1.0 / 12f64).sqrt() / (count as f64).sqrt() * 2.0;
        assert!((rate - 2.0).abs() < 3.0 * sigma_rate, "rate {rate}");
        assert!(simulate_trajectory(&p, 0, 0.0, &mut SimRng::new(7)).is_err());
    }

    #[test]
    fn batch_independent_of_jobs() {
        let p = RenewalProcess::delayed_poisson(1.0, 2.0).unwrap();
        let master = SimRng::new(99);
        let one = simulate_batch(&p, 50, 0.0, 7, &master, 1).unwrap();
        let four = simulate_batch(&p, 50, 0.0, 7, &master, 4).unwrap();
        assert_eq!(one, four);
        assert_ne!(one[0].event_times, one[1].event_times);
    }

    #[test]
    fn poisson_step_probability_constant() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let grid = Grid::for_process(&p, &GridOptions::new(1000)).unwrap();
        let want = 1.0 - (-1e-3f64).exp();
        for n in [0usize, 1, 10, 999, 5000] {
            let step = 1.0 - grid.survival_at(n + 1) / grid.survival_at(n);
            assert!((step - want).abs() < 1e-15);
        }
    }

    #[test]
    fn protocol_step_matches_single_bin_sweep() {
        let p = RenewalProcess::delayed_poisson(0.5, 1.0).unwrap();
        let q = QuantumEnsemble::build(&p, &GridOptions::new(64)).unwrap();
        let g = q.grid().clone();
        for a in [0usize, 10, 63, 64] {
            let step = 1.0 - g.survival_at(a + 1) / g.survival_at(a);
            let sweep = q.row(a).emission_probability(1);
            assert!((step - sweep).abs() < 1e-13, "state {a}: {step} vs {sweep}");
        }
    }

    #[test]
    fn uniform_protocol_chi_square() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let grid = Grid::for_process(&p, &GridOptions::new(1024)).unwrap();
        let run = simulate_protocol(&grid, 100_000, &mut SimRng::new(41)).unwrap();
        let test = chi_square_protocol(&grid, &run.intervals(), 0.01).unwrap();
        assert!(test.passed, "{test:?}");
        assert_eq!(run.truncation_events, 0);
    }

    #[test]
    fn protocol_direct_coupled_ks() {
        let p = RenewalProcess::uniform(1.0).unwrap();
        let grid = Grid::for_process(&p, &GridOptions::new(1024)).unwrap();
        let n = 100_000;
        let proto = simulate_protocol(&grid, n, &mut SimRng::new(42)).unwrap();
        let mut rng = SimRng::new(42);
        let direct: Vec<f64> = (0..n).map(|_| sample_interval(&p, &mut rng)).collect();
        let d = ks_two_sample(&proto.intervals(), &direct);
        assert!(d < 2.0 * grid.delta_t, "KS {d}");
    }

    #[test]
    fn truncated_poisson_counts_cut() {
        let p = RenewalProcess::poisson(1.0).unwrap();
        let opts = GridOptions::new(16).layout(crate::grid::Layout::Truncated).eps_tail(0.2);
        let grid = Grid::for_process(&p, &opts).unwrap();
        let run = simulate_protocol(&grid, 20_000, &mut SimRng::new(3)).unwrap();
        let frac = run.truncation_events as f64 / 20_000.0;
        assert!((frac - grid.tail_mass / grid.survival_at(0)).abs() < 0.015, "{frac}");
    }

    #[test]
    fn chi_square_detects_wrong_law() {
        let uniform = RenewalProcess::uniform(1.0).unwrap();
        let delayed = RenewalProcess::delayed_poisson(0.2, 0.3).unwrap();
        let mut rng = SimRng::new(8);
        let x: Vec<f64> = (0..100_000).map(|_| sample_interval(&delayed, &mut rng)).collect();
        assert!(chi_square_intervals(&delayed, &x, 50, 0.01).unwrap().passed);
        assert!(!chi_square_intervals(&uniform, &x, 50, 0.01).unwrap().passed);
        // a 1% stretch of the time axis is visible at this sample size
        let stretched: Vec<f64> = x.iter().map(|t| t * 1.01).collect();
        assert!(!chi_square_intervals(&delayed, &stretched, 50, 0.01).unwrap().passed);
    }

    #[test]
    fn ks_statistic_known_values() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        assert!((ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_square_critical_value() {
        // χ²_{0.99}(49) = 74.919
        let t = chi_square_gof(&[100; 50], &[0.02; 50], 0.01).unwrap();
        assert_eq!(t.dof, 49);
        assert!((t.critical - 74.919).abs() < 1e-2);
        assert!(t.statistic < 1e-20);
    }

    #[test]
    fn csv_layout() {
        let t = Trajectory {
            event_times: vec![0.5, 1.25],
            origin: 0.0,
            seed: 1,
            stream: 0,
            truncation_events: 0,
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,event_time\n0,0.5\n1,1.25\n");
    }
}
