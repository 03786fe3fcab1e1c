//! Renewal processes: emission density, survival, firing rate and the causal
//! class that fixes the shape of the causal-state architecture.
//!
//! A renewal process emits identical symbols separated by IID waiting times
//! with density `φ(t)`. Everything else is derived from `φ`:
//!
//! * survival `Φ(t) = ∫_t^∞ φ`,
//! * firing rate `μ = 1 / ∫ t φ(t) dt`,
//! * conditional density of the time to the next emission given the time
//!   since the last one, `φ(t_since + t_to) / Φ(t_since)`.
//!
//! The causal class is always declared (by the family constructor or by the
//! caller) and never inferred from `φ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Causal class of a renewal process together with its class parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum CausalClass {
    /// Memoryless: a single causal state.
    Poisson { tau_l: f64 },
    /// A continuum of states on `[0, tau)` ending in one Poissonian state.
    EventuallyPoisson { tau: f64, tau_l: f64 },
    /// A continuum on `[0, tau)` feeding a periodic loop of length `delta`
    /// under an exponential envelope with lifetime `tau_l`.
    EventuallyDeltaPoisson { tau: f64, delta: f64, tau_l: f64 },
    /// An unbroken continuum of causal states.
    NotEventuallyDeltaPoisson,
}

impl CausalClass {
    fn scaled(self, alpha: f64) -> Self {
        match self {
            CausalClass::Poisson { tau_l } => CausalClass::Poisson { tau_l: alpha * tau_l },
            CausalClass::EventuallyPoisson { tau, tau_l } => CausalClass::EventuallyPoisson {
                tau: alpha * tau,
                tau_l: alpha * tau_l,
            },
            CausalClass::EventuallyDeltaPoisson { tau, delta, tau_l } => {
                CausalClass::EventuallyDeltaPoisson {
                    tau: alpha * tau,
                    delta: alpha * delta,
                    tau_l: alpha * tau_l,
                }
            }
            CausalClass::NotEventuallyDeltaPoisson => CausalClass::NotEventuallyDeltaPoisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// `φ(t) = 0` for `t >= t_max`.
    Bounded(f64),
    Unbounded,
}

/// A user-supplied density with closed-form survival, used for synthetic
/// processes that no built-in family covers.
pub trait DensityModel: Send + Sync + fmt::Debug {
    fn density(&self, t: f64) -> f64;
    fn survival(&self, t: f64) -> f64;
    fn mean_interval(&self) -> f64;

    /// Points where the density has kinks or jumps.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `sup { t : Φ(t) >= y }` when available in closed form.
    fn inverse_survival(&self, _y: f64) -> Option<f64> {
        None
    }
}

/// Piecewise-linear density through `(t, φ)` nodes, optionally continued past
/// the last node by an exponential tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    times: Vec<f64>,
    values: Vec<f64>,
    /// `∫_{t_i}^∞ φ` for every node, accumulated back to front.
    tail_mass: Vec<f64>,
    exp_tail: Option<f64>,
    normalization: f64,
    mean: f64,
}

impl Tabulated {
    fn new(points: &[(f64, f64)], exp_tail: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(
                "tabulated density needs at least two points".into(),
            ));
        }
        if points[0].0 != 0.0 {
            return Err(Error::Validation(format!(
                "tabulated density must start at t = 0, got {}",
                points[0].0
            )));
        }
        for (i, &(t, phi)) in points.iter().enumerate() {
            if !t.is_finite() || !phi.is_finite() {
                return Err(Error::Validation(format!("non-finite sample at row {i}")));
            }
            if phi < 0.0 {
                return Err(Error::Validation(format!(
                    "negative density {phi} at row {i} (t = {t})"
                )));
            }
            if i > 0 && t <= points[i - 1].0 {
                return Err(Error::Validation(format!(
                    "sample times must be strictly increasing (row {i}: {t} after {})",
                    points[i - 1].0
                )));
            }
        }
        if let Some(tau_l) = exp_tail {
            if !(tau_l > 0.0) {
                return Err(Error::invalid("tau_l", tau_l, "must be positive"));
            }
        }

        let times: Vec<f64> = points.iter().map(|p| p.0).collect();
        let raw: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = times.len();

        let tail_beyond = |f_last: f64| exp_tail.map_or(0.0, |tau_l| f_last * tau_l);
        let mut mass = tail_beyond(raw[n - 1]);
        for i in 0..n - 1 {
            mass += 0.5 * (times[i + 1] - times[i]) * (raw[i] + raw[i + 1]);
        }
        if !(mass > 0.0) {
            return Err(Error::DegenerateInput(
                "tabulated density integrates to zero".into(),
            ));
        }
        let normalization = 1.0 / mass;
        let values: Vec<f64> = raw.iter().map(|v| v * normalization).collect();

        let mut tail_mass = vec![0.0; n];
        tail_mass[n - 1] = tail_beyond(values[n - 1]);
        for i in (0..n - 1).rev() {
            tail_mass[i] =
                tail_mass[i + 1] + 0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]);
        }

        let mut mean = exp_tail.map_or(0.0, |tau_l| values[n - 1] * tau_l * (times[n - 1] + tau_l));
        for i in 0..n - 1 {
            let (a, b) = (times[i], times[i + 1]);
            let (fa, fb) = (values[i], values[i + 1]);
            mean += (b - a) / 6.0 * (a * (2.0 * fa + fb) + b * (fa + 2.0 * fb));
        }

        Ok(Self {
            times,
            values,
            tail_mass,
            exp_tail,
            normalization,
            mean,
        })
    }

    /// Factor the raw samples were multiplied by to reach unit mass.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    fn last(&self) -> usize {
        self.times.len() - 1
    }

    fn segment(&self, t: f64) -> usize {
        // index i with times[i] <= t < times[i + 1]
        self.times.partition_point(|&x| x <= t).saturating_sub(1).min(self.last() - 1)
    }

    fn density(&self, t: f64) -> f64 {
        let last = self.last();
        if t < 0.0 {
            return 0.0;
        }
        if t >= self.times[last] {
            return match self.exp_tail {
                Some(tau_l) => self.values[last] * (-(t - self.times[last]) / tau_l).exp(),
                None if t == self.times[last] => self.values[last],
                None => 0.0,
            };
        }
        let i = self.segment(t);
        let (a, b) = (self.times[i], self.times[i + 1]);
        let w = (t - a) / (b - a);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    fn survival(&self, t: f64) -> f64 {
        let last = self.last();
        if t <= 0.0 {
            return 1.0;
        }
        if t >= self.times[last] {
            return match self.exp_tail {
                Some(tau_l) => {
                    self.values[last] * tau_l * (-(t - self.times[last]) / tau_l).exp()
                }
                None => 0.0,
            };
        }
        let i = self.segment(t);
        let b = self.times[i + 1];
        self.tail_mass[i + 1] + 0.5 * (b - t) * (self.density(t) + self.values[i + 1])
    }

    fn inverse_survival(&self, y: f64) -> f64 {
        let last = self.last();
        if y >= 1.0 {
            // right end of any leading zero-density plateau
            let i = self.tail_mass.partition_point(|&s| s >= 1.0);
            if i == 0 {
                return 0.0;
            }
            return self.plateau_end(i - 1, y);
        }
        if y <= self.tail_mass[last] {
            if let Some(tau_l) = self.exp_tail {
                let s_last = self.tail_mass[last];
                return self.times[last] + tau_l * (s_last / y).ln();
            }
            return self.times[last];
        }
        // largest node index with Φ(t_i) >= y
        let i = self.tail_mass.partition_point(|&s| s >= y) - 1;
        self.plateau_end(i, y)
    }

    fn plateau_end(&self, i: usize, y: f64) -> f64 {
        if i >= self.last() {
            return self.times[self.last()];
        }
        let (mut lo, mut hi) = (self.times[i], self.times[i + 1]);
        if self.survival(hi) >= y {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) >= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn scaled(&self, alpha: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t * alpha).collect(),
            values: self.values.iter().map(|v| v / alpha).collect(),
            tail_mass: self.tail_mass.clone(),
            exp_tail: self.exp_tail.map(|tau_l| tau_l * alpha),
            normalization: self.normalization / alpha,
            mean: self.mean * alpha,
        }
    }
}

#[derive(Clone)]
enum Family {
    Uniform { tau: f64 },
    DelayedPoisson { tau_r: f64, tau_l: f64 },
    Tabulated(Arc<Tabulated>),
    Custom { model: Arc<dyn DensityModel>, time_scale: f64 },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Uniform { tau } => write!(f, "Uniform {{ tau: {tau} }}"),
            Family::DelayedPoisson { tau_r, tau_l } => {
                write!(f, "DelayedPoisson {{ tau_r: {tau_r}, tau_l: {tau_l} }}")
            }
            Family::Tabulated(t) => write!(f, "Tabulated({} points)", t.times.len()),
            Family::Custom { model, time_scale } => {
                write!(f, "Custom {{ model: {model:?}, time_scale: {time_scale} }}")
            }
        }
    }
}

/// An immutable renewal process.
#[derive(Debug, Clone)]
pub struct RenewalProcess {
    family: Family,
    class: CausalClass,
    support: Support,
    mean_interval: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, value, "must be positive and finite"))
    }
}

impl RenewalProcess {
    /// Uniform emission probability on `[0, tau)`.
    pub fn uniform(tau: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        Ok(Self {
            family: Family::Uniform { tau },
            class: CausalClass::NotEventuallyDeltaPoisson,
            support: Support::Bounded(tau),
            mean_interval: 0.5 * tau,
        })
    }

    /// Exponential emission with lifetime `tau_l` after a rest period `tau_r`.
    pub fn delayed_poisson(tau_r: f64, tau_l: f64) -> Result<Self> {
        if !(tau_r.is_finite() && tau_r >= 0.0) {
            return Err(Error::invalid("tau_r", tau_r, "must be non-negative and finite"));
        }
        check_positive("tau_l", tau_l)?;
        let class = if tau_r == 0.0 {
            CausalClass::Poisson { tau_l }
        } else {
            CausalClass::EventuallyPoisson { tau: tau_r, tau_l }
        };
        Ok(Self {
            family: Family::DelayedPoisson { tau_r, tau_l },
            class,
            support: Support::Unbounded,
            mean_interval: tau_r + tau_l,
        })
    }

    pub fn poisson(tau_l: f64) -> Result<Self> {
        Self::delayed_poisson(0.0, tau_l)
    }

    /// Piecewise-linear density through the samples, renormalized to unit
    /// mass. The support ends at the last sample.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        let table = Tabulated::new(samples, None)?;
        let t_max = *table.times.last().unwrap();
        Ok(Self {
            mean_interval: table.mean,
            family: Family::Tabulated(Arc::new(table)),
            class: CausalClass::NotEventuallyDeltaPoisson,
            support: Support::Bounded(t_max),
        })
    }

    /// Tabulated head on `[0, tau]` (the last sample must sit at `tau`)
    /// continued by `φ(tau) e^{-(t - tau)/tau_l}`; declared eventually Poisson.
    pub fn tabulated_eventually_poisson(samples: &[(f64, f64)], tau_l: f64) -> Result<Self> {
        let table = Tabulated::new(samples, Some(tau_l))?;
        let tau = *table.times.last().unwrap();
        if table.values[table.last()] <= 0.0 {
            return Err(Error::Validation(
                "eventually Poisson tabulated density needs φ(tau) > 0".into(),
            ));
        }
        Ok(Self {
            mean_interval: table.mean,
            family: Family::Tabulated(Arc::new(table)),
            class: CausalClass::EventuallyPoisson { tau, tau_l },
            support: Support::Unbounded,
        })
    }

    /// Wraps an arbitrary density model with a caller-declared class.
    pub fn custom(model: Arc<dyn DensityModel>, class: CausalClass, support: Support) -> Result<Self> {
        let mean_interval = model.mean_interval();
        check_positive("mean_interval", mean_interval)?;
        Ok(Self {
            family: Family::Custom {
                model,
                time_scale: 1.0,
            },
            class,
            support,
            mean_interval,
        })
    }

    pub fn causal_class(&self) -> CausalClass {
        self.class
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// `∫ t φ(t) dt`.
    pub fn mean_interval(&self) -> f64 {
        self.mean_interval
    }

    /// Mean firing rate `μ`.
    pub fn firing_rate(&self) -> f64 {
        1.0 / self.mean_interval
    }

    pub fn tabulation(&self) -> Option<&Tabulated> {
        match &self.family {
            Family::Tabulated(t) => Some(t),
            _ => None,
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Uniform { tau } => {
                if t < *tau {
                    1.0 / tau
                } else {
                    0.0
                }
            }
            Family::DelayedPoisson { tau_r, tau_l } => {
                if t <= *tau_r && *tau_r > 0.0 {
                    0.0
                } else {
                    (-(t - tau_r) / tau_l).exp() / tau_l
                }
            }
            Family::Tabulated(table) => table.density(t),
            Family::Custom { model, time_scale } => model.density(t / time_scale) / time_scale,
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Uniform { tau } => (1.0 - t / tau).max(0.0),
            Family::DelayedPoisson { tau_r, tau_l } => {
                if t <= *tau_r {
                    1.0
                } else {
                    (-(t - tau_r) / tau_l).exp()
                }
            }
            Family::Tabulated(table) => table.survival(t),
            Family::Custom { model, time_scale } => model.survival(t / time_scale),
        }
    }

    /// `sup { t : Φ(t) >= y }` for `y` in `(0, 1]`.
    pub fn inverse_survival(&self, y: f64) -> f64 {
        debug_assert!(y > 0.0 && y <= 1.0, "inverse_survival({y})");
        match &self.family {
            Family::Uniform { tau } => tau * (1.0 - y),
            Family::DelayedPoisson { tau_r, tau_l } => tau_r - tau_l * y.min(1.0).ln(),
            Family::Tabulated(table) => table.inverse_survival(y),
            Family::Custom { model, time_scale } => {
                let t = match model.inverse_survival(y) {
                    Some(t) => t,
                    None => invert_monotone(|t| model.survival(t), y, 1.0 / model.mean_interval()),
                };
                t * time_scale
            }
        }
    }

    /// Short family name: `uniform`, `delayed_poisson`, `tabulated` or `custom`.
    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Uniform { .. } => "uniform",
            Family::DelayedPoisson { .. } => "delayed_poisson",
            Family::Tabulated(_) => "tabulated",
            Family::Custom { .. } => "custom",
        }
    }

    /// `(τ_R, τ_L)` of a delayed Poisson process.
    pub fn delayed_parameters(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::DelayedPoisson { tau_r, tau_l } => Some((tau_r, tau_l)),
            _ => None,
        }
    }

    /// `τ` of a uniform process.
    pub fn uniform_width(&self) -> Option<f64> {
        match self.family {
            Family::Uniform { tau } => Some(tau),
            _ => None,
        }
    }

    /// Points where `φ` has kinks or jumps (support edges, class boundaries,
    /// tabulation nodes).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.family {
            Family::Uniform { tau } => vec![*tau],
            Family::DelayedPoisson { tau_r, .. } => vec![*tau_r],
            Family::Tabulated(table) => table.times.clone(),
            Family::Custom { model, time_scale } => {
                model.breakpoints().into_iter().map(|t| t * time_scale).collect()
            }
        };
        match self.class {
            CausalClass::EventuallyPoisson { tau, .. } => pts.push(tau),
            CausalClass::EventuallyDeltaPoisson { tau, .. } => pts.push(tau),
            _ => {}
        }
        if let Support::Bounded(t) = self.support {
            pts.push(t);
        }
        pts.retain(|t| t.is_finite() && *t > 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Density of the time to the next emission, `t_to`, given `t_since`
    /// since the last one.
    pub fn conditional_density(&self, t_since: f64, t_to: f64) -> Result<f64> {
        let s = self.survival(t_since);
        if !(s > 0.0) {
            return Err(Error::UnreachablePast { t: t_since });
        }
        Ok(self.density(t_since + t_to) / s)
    }

    /// Dilates time by `alpha`: `φ'(z) = φ(z / α) / α`, so `μ' = μ / α`.
    pub fn rescale(&self, alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        let family = match &self.family {
            Family::Uniform { tau } => Family::Uniform { tau: tau * alpha },
            Family::DelayedPoisson { tau_r, tau_l } => Family::DelayedPoisson {
                tau_r: tau_r * alpha,
                tau_l: tau_l * alpha,
            },
            Family::Tabulated(table) => Family::Tabulated(Arc::new(table.scaled(alpha))),
            Family::Custom { model, time_scale } => Family::Custom {
                model: model.clone(),
                time_scale: time_scale * alpha,
            },
        };
        Ok(Self {
            family,
            class: self.class.scaled(alpha),
            support: match self.support {
                Support::Bounded(t) => Support::Bounded(t * alpha),
                Support::Unbounded => Support::Unbounded,
            },
            mean_interval: self.mean_interval * alpha,
        })
    }

    /// Smallest `t` with `Φ(t) <= eps_tail`; the support bound for bounded
    /// processes.
    pub fn truncation_horizon(&self, eps_tail: f64) -> Result<f64> {
        if !(eps_tail > 0.0 && eps_tail < 1.0) {
            return Err(Error::invalid("eps_tail", eps_tail, "must lie in (0, 1)"));
        }
        if let Support::Bounded(t) = self.support {
            return Ok(t);
        }
        let t = self.inverse_survival(eps_tail);
        let cap = HORIZON_CAP_MULTIPLE * self.mean_interval;
        if !t.is_finite() || t > cap || self.survival(t) > eps_tail * (1.0 + 1e-9) {
            return Err(Error::TailNotReached { eps_tail, cap });
        }
        Ok(t)
    }
}

/// Search limit for unbounded tails, in units of the mean interval.
pub const HORIZON_CAP_MULTIPLE: f64 = 1e4;

/// `sup { t : survival(t) >= y }` by doubling then bisection.
fn invert_monotone<F: Fn(f64) -> f64>(survival: F, y: f64, rate: f64) -> f64 {
    let cap = HORIZON_CAP_MULTIPLE / rate;
    let mut lo = 0.0;
    let mut hi = 1.0 / rate;
    while survival(hi) >= y {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if survival(mid) >= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
