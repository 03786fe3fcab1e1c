//! Outcome-bin amplitude vectors and the no-emission sweep update.

use rand::Rng;

use crate::error::{Error, Result};

/// Amplitudes over outcome bins `j = 0, 1, …` (time to next emission in
/// units of `δt`).
///
/// Past the stored head the vector may continue periodically: with
/// `tail = Some((P, r))`, `amp(j + P) = r · amp(j)` for every
/// `j >= head.len() - P`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    head: Vec<f64>,
    tail: Option<(usize, f64)>,
    delta_t: f64,
}

/// Result of sweeping a window over a state.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    /// Emission in outcome bin `bin`, reported at the bin midpoint `time`.
    Emitted { bin: usize, time: f64 },
    /// No emission inside the window; the state has advanced.
    Survived(StateVector),
}

impl StateVector {
    pub fn new(head: Vec<f64>, tail: Option<(usize, f64)>, delta_t: f64) -> Self {
        if let Some((period, factor)) = tail {
            assert!(period >= 1 && period <= head.len(), "tail period must fit in the head");
            assert!((0.0..1.0).contains(&factor), "tail factor must lie in [0, 1)");
        }
        Self {
            head,
            tail,
            delta_t,
        }
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> Option<(usize, f64)> {
        self.tail
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// Amplitude on outcome bin `j`, following the tail rule if needed.
    pub fn amplitude(&self, j: usize) -> f64 {
        if j < self.head.len() {
            return self.head[j];
        }
        match self.tail {
            None => 0.0,
            Some((period, factor)) => {
                let start = self.head.len() - period;
                let k = j - start;
                self.head[start + k % period] * factor.powi((k / period) as i32)
            }
        }
    }

    /// `Σ_j |amp(j)|²`, with the periodic tail summed geometrically.
    pub fn norm_squared(&self) -> f64 {
        match self.tail {
            None => self.head.iter().map(|x| x * x).sum(),
            Some((period, factor)) => {
                let start = self.head.len() - period;
                let body: f64 = self.head[..start].iter().map(|x| x * x).sum();
                let block: f64 = self.head[start..].iter().map(|x| x * x).sum();
                body + block / (1.0 - factor * factor)
            }
        }
    }

    /// Probability of an emission in the first `bins` outcome bins.
    pub fn emission_probability(&self, bins: usize) -> f64 {
        let p: f64 = (0..bins).map(|j| self.amplitude(j).powi(2)).sum();
        p.min(1.0)
    }

    /// Projects onto "no emission in the first `bins` bins", shifts the
    /// remaining amplitudes left and renormalizes. Returns the emission
    /// probability and the surviving state (`None` when emission is
    /// certain).
    pub fn project_no_emission(&self, bins: usize) -> (f64, Option<StateVector>) {
        let p_emit = self.emission_probability(bins);
        let (head_len, tail) = match self.tail {
            None => (self.head.len().saturating_sub(bins), None),
            Some((period, factor)) => (
                self.head.len().saturating_sub(bins).max(period),
                Some((period, factor)),
            ),
        };
        let head: Vec<f64> = (0..head_len).map(|j| self.amplitude(bins + j)).collect();
        let shifted = StateVector {
            head,
            tail,
            delta_t: self.delta_t,
        };
        let norm = shifted.norm_squared();
        if !(norm > 0.0) {
            return (1.0, None);
        }
        let scale = norm.sqrt().recip();
        let head = shifted.head.iter().map(|x| x * scale).collect();
        (
            p_emit,
            Some(StateVector {
                head,
                tail,
                delta_t: self.delta_t,
            }),
        )
    }

    /// Converts a window length to a whole number of bins.
    pub fn window_bins(&self, window: f64) -> Result<usize> {
        let r = window / self.delta_t;
        let k = r.round();
        if !(window >= 0.0) || (r - k).abs() > 1e-9 * r.max(1.0) {
            return Err(Error::GridMisaligned(format!(
                "window {window} is not a whole number of bins of width {}",
                self.delta_t
            )));
        }
        Ok(k as usize)
    }

    /// Measures whether an emission happens within `window`; on emission
    /// the bin is drawn from the in-window amplitudes, otherwise the state
    /// advances by the window.
    pub fn sweep_update<R: Rng + ?Sized>(&self, window: f64, rng: &mut R) -> Result<SweepOutcome> {
        let bins = self.window_bins(window)?;
        let (p_emit, survived) = self.project_no_emission(bins);
        let u: f64 = rng.random();
        match survived {
            Some(state) if u >= p_emit => Ok(SweepOutcome::Survived(state)),
            _ => {
                // draw the emission bin proportionally to |amp|² within the window
                let target = rng.random::<f64>() * p_emit;
                let mut acc = 0.0;
                let mut bin = bins.saturating_sub(1);
                for j in 0..bins {
                    acc += self.amplitude(j).powi(2);
                    if target < acc {
                        bin = j;
                        break;
                    }
                }
                // a state with nothing left past the window emits in its last live bin
                if bins == 0 || p_emit == 0.0 {
                    bin = (0..self.head.len()).rev().find(|&j| self.head[j] > 0.0).unwrap_or(0);
                }
                Ok(SweepOutcome::Emitted {
                    bin,
                    time: (bin as f64 + 0.5) * self.delta_t,
                })
            }
        }
    }
}
