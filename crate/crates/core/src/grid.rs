//! Uniform time grids and sampled trajectories.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{trace_of_product, Operator};

/// Integration step ceilings: `ω·dt ≤ 0.01` and `rate·dt ≤ 0.001`.
pub const MAX_PHASE_PER_STEP: f64 = 0.01;
pub const MAX_DECAY_PER_STEP: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t1 <= t0 {
            return Err(Error::InvalidGrid(format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    /// The smallest even step count meeting the default step ceilings for
    /// the given fastest frequency and largest total rate.
    pub fn auto(t0: f64, t1: f64, max_frequency: f64, max_rate: f64) -> Result<Self> {
        let span = t1 - t0;
        let by_phase = (span * max_frequency.abs() / MAX_PHASE_PER_STEP).ceil();
        let by_rate = (span * max_rate.abs() / MAX_DECAY_PER_STEP).ceil();
        let mut steps = by_phase.max(by_rate).max(2.0) as usize;
        steps += steps % 2;
        Self::new(t0, t1, steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of samples, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Same interval with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            steps: self.steps * factor.max(1),
            ..*self
        }
    }
}

/// One sample per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    grid: TimeGrid,
    samples: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn new(grid: TimeGrid, samples: Vec<S>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &S {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(|(k, s)| (self.grid.time(k), s))
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Trajectory<T> {
        Trajectory {
            grid: self.grid,
            samples: self.samples.iter().map(f).collect(),
        }
    }
}

impl Trajectory<Complex64> {
    pub fn re(&self) -> Trajectory<f64> {
        self.map(|z| z.re)
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

impl Trajectory<f64> {
    pub fn max_abs_diff(&self, other: &Trajectory<f64>) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Imaginary parts allowed in `Tr(ρA)` for Hermitian `A` before the value
/// is no longer reported as real.
pub const TOL_REAL_EXPECTATION: f64 = 1e-9;

impl Trajectory<Operator> {
    /// Pointwise `Tr(ρ(t_k) A)`.
    pub fn expectation(&self, a: &Operator) -> Result<Trajectory<Complex64>> {
        expectation_trajectory(self, a)
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|r| (r.trace() - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|r| r.hermiticity_error())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(|r| r.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest entrywise deviation between two matrix trajectories.
    pub fn max_deviation(&self, other: &Trajectory<Operator>) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// Pointwise `Tr(ρ(t_k) A)`. When `A` is Hermitian and the imaginary parts
/// stay below [`TOL_REAL_EXPECTATION`], they are dropped.
pub fn expectation_trajectory(traj: &Trajectory<Operator>, a: &Operator) -> Result<Trajectory<Complex64>> {
    let Some(first) = traj.samples.first() else {
        return Err(Error::InvalidGrid("empty trajectory".into()));
    };
    if first.space() != a.space() {
        return Err(Error::SpaceMismatch {
            left: first.space().to_string(),
            right: a.space().to_string(),
        });
    }
    let mut out: Vec<Complex64> = traj
        .samples
        .iter()
        .map(|r| trace_of_product(r.matrix(), a.matrix()))
        .collect();
    if a.is_hermitian(1e-12) && out.iter().all(|z| z.im.abs() <= TOL_REAL_EXPECTATION) {
        for z in &mut out {
            z.im = 0.0;
        }
    }
    Trajectory::new(traj.grid, out)
}
