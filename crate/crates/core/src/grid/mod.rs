//! Uniform characteristic grids in (θ, η, v) and the functions that live on them.

mod convergence;
mod quadrature;
mod snapshot;
mod stencil;

pub use convergence::{estimate_order, ConvergenceReport};
pub use quadrature::{integrate, trapezoid_weights};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotMeta};
pub use stencil::{d1_line, d2_line, diff, diff_with};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("degenerate interval [{lo}, {hi}] on axis {axis}")]
    DegenerateInterval { axis: Axis, lo: f64, hi: f64 },
    #[error("axis {axis} needs at least {needed} points, got {got}")]
    TooFewPoints { axis: Axis, needed: usize, got: usize },
    #[error("spacing on axis {axis} must be positive and finite, got {value}")]
    BadSpacing { axis: Axis, value: f64 },
    #[error("value array has length {got}, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at (i_theta={i}, i_eta={j}, i_v={k})")]
    NonFinite { i: usize, j: usize, k: usize, value: f64 },
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("order estimate needs at least 3 resolutions, got {0}")]
    TooFewResolutions(usize),
    #[error("invalid convergence data: {0}")]
    BadConvergenceData(String),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Theta,
    Eta,
    V,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Theta, Axis::Eta, Axis::V];

    pub fn index(self) -> usize {
        match self {
            Axis::Theta => 0,
            Axis::Eta => 1,
            Axis::V => 2,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Theta => "theta",
            Axis::Eta => "eta",
            Axis::V => "v",
        })
    }
}

/// How a stencil treats the ends of an axis.
///
/// `Periodic` identifies node `n` with node `0`, so the period is `n·h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    #[default]
    OneSided,
    Periodic,
}

/// Tensor-product grid. Coordinates are `origin + index·spacing`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub n_theta: usize,
    pub n_eta: usize,
    pub n_v: usize,
    pub theta0: f64,
    pub eta0: f64,
    pub v0: f64,
    pub d_theta: f64,
    pub d_eta: f64,
    pub d_v: f64,
}

/// Uniform grid spanning the given closed intervals with the given node counts.
pub fn build_grid(extents: [(f64, f64); 3], counts: [usize; 3]) -> Result<Grid3, GridError> {
    let mut spacing = [0.0; 3];
    for axis in Axis::ALL {
        let a = axis.index();
        let (lo, hi) = extents[a];
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(GridError::DegenerateInterval { axis, lo, hi });
        }
        if counts[a] < 2 {
            return Err(GridError::TooFewPoints { axis, needed: 2, got: counts[a] });
        }
        spacing[a] = (hi - lo) / (counts[a] - 1) as f64;
    }
    Grid3::from_spacing(counts, [extents[0].0, extents[1].0, extents[2].0], spacing)
}

impl Grid3 {
    /// Grid from explicit origins and spacings (periodic axes are set up this way).
    pub fn from_spacing(counts: [usize; 3], origins: [f64; 3], spacings: [f64; 3]) -> Result<Self, GridError> {
        for axis in Axis::ALL {
            let a = axis.index();
            let min = if axis == Axis::Eta { 1 } else { 2 };
            if counts[a] < min {
                return Err(GridError::TooFewPoints { axis, needed: min, got: counts[a] });
            }
            if !(spacings[a].is_finite() && spacings[a] > 0.0) {
                return Err(GridError::BadSpacing { axis, value: spacings[a] });
            }
        }
        Ok(Self {
            n_theta: counts[0],
            n_eta: counts[1],
            n_v: counts[2],
            theta0: origins[0],
            eta0: origins[1],
            v0: origins[2],
            d_theta: spacings[0],
            d_eta: spacings[1],
            d_v: spacings[2],
        })
    }

    /// A (θ, v) plane: a single η node, used by the η-independent solvers.
    pub fn plane(theta: (f64, f64), n_theta: usize, v: (f64, f64), n_v: usize) -> Result<Self, GridError> {
        let g = build_grid([theta, (0.0, 1.0), v], [n_theta, 2, n_v])?;
        Ok(Self { n_eta: 1, eta0: 0.0, ..g })
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.n_theta, self.n_eta, self.n_v]
    }

    pub fn origins(&self) -> [f64; 3] {
        [self.theta0, self.eta0, self.v0]
    }

    pub fn spacings(&self) -> [f64; 3] {
        [self.d_theta, self.d_eta, self.d_v]
    }

    pub fn count(&self, axis: Axis) -> usize {
        self.counts()[axis.index()]
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        self.spacings()[axis.index()]
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_eta * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in one v-level.
    pub fn level_len(&self) -> usize {
        self.n_theta * self.n_eta
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta0 + i as f64 * self.d_theta
    }

    pub fn eta(&self, j: usize) -> f64 {
        self.eta0 + j as f64 * self.d_eta
    }

    pub fn v(&self, k: usize) -> f64 {
        self.v0 + k as f64 * self.d_v
    }

    pub fn coordinate(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.theta(i), self.eta(j), self.v(k)]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n_theta * (j + self.n_eta * k)
    }

    /// Inverse of [`Grid3::index`].
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.n_theta;
        let jk = idx / self.n_theta;
        (i, jk % self.n_eta, jk / self.n_eta)
    }

    /// Same grid restricted to the first `n_v` levels.
    pub fn truncated_v(&self, n_v: usize) -> Self {
        Self { n_v, ..*self }
    }
}

/// Real values on every node of a [`Grid3`], θ fastest, then η, then v.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid3,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid3, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Wraps `values`, rejecting wrong lengths and non-finite entries.
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        let f = Self { grid, values };
        f.validate()?;
        Ok(f)
    }

    /// Wraps without the finiteness scan (solver internals that check separately).
    pub(crate) fn from_raw(grid: Grid3, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.n_v {
            for j in 0..grid.n_eta {
                for i in 0..grid.n_theta {
                    let [t, e, v] = grid.coordinate(i, j, k);
                    values.push(f(t, e, v));
                }
            }
        }
        Self { grid, values }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        match self.values.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(idx) => {
                let (i, j, k) = self.grid.unindex(idx);
                Err(GridError::NonFinite { i, j, k, value: self.values[idx] })
            }
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, x: f64) {
        let idx = self.grid.index(i, j, k);
        self.values[idx] = x;
    }

    /// Values of v-level `k` (θ fastest, then η).
    pub fn level(&self, k: usize) -> &[f64] {
        let n = self.grid.level_len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.level_len();
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest pointwise difference; the grids must agree.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `alpha·self + beta·other`.
    pub fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() })
    }
}
