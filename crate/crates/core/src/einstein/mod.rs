//! The plane-polarized diffractive Einstein system in (θ, η, v).
//!
//! Metric functions U, V, M (leading order) and Y (first order) are advanced in v by
//! Goursat marching of the combinations S = U+V, W = U+V+M and U, with Y recovered
//! on every level from its linear θ-ODE. The θ-constraint is validated on input
//! and monitored on output but never imposed.

mod data;
mod diagnostics;
mod pointwise;
mod yode;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use data::{BoundaryData, BoundaryProfiles, CollidingData, ManufacturedSolution, PulseSpec};
pub use diagnostics::{
    constraint_residual, equation_residuals, linearization_check, monitor_constraint, ConstraintField, ConstraintMonitor, LinearizationReport,
};
pub use pointwise::{constraint_value, residuals, AuxValues, PointFields, PointJet};
pub(crate) use pointwise::aux_values;
pub use yode::{integrate_y_ode, YCoefficients};

use crate::error::{BlowUp, SolveError};
use crate::grid::{diff_with, Axis, BoundaryMode, Grid3, GridError, GridFunction};
use crate::march::{march, Geometry, Jet, LevelSystem, MarchOptions, Problem};

/// Forcing `[s₂, s₃, s₄, s₅]` added to the Y equation and the three evolution equations.
pub type EinsteinSource = Arc<dyn Fn(f64, f64, f64) -> [f64; 4] + Send + Sync>;

/// Metric component functions on a shared grid. `t` absent means the T = 0 gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet {
    pub u: GridFunction,
    pub v: GridFunction,
    pub m: GridFunction,
    pub y: GridFunction,
    pub t: Option<GridFunction>,
}

impl FieldSet {
    pub fn zeros(grid: Grid3) -> Self {
        let z = GridFunction::zeros(grid);
        Self { u: z.clone(), v: z.clone(), m: z.clone(), y: z, t: None }
    }

    pub fn new(u: GridFunction, v: GridFunction, m: GridFunction, y: GridFunction, t: Option<GridFunction>) -> Result<Self, GridError> {
        let f = Self { u, v, m, y, t };
        f.validate()?;
        Ok(f)
    }

    /// Samples analytic profiles on every node.
    pub fn from_profiles(grid: Grid3, u: &crate::profiles::Profile, v: &crate::profiles::Profile, m: &crate::profiles::Profile, y: &crate::profiles::Profile) -> Self {
        let s = |p: &crate::profiles::Profile| GridFunction::from_fn(grid, |a, b, c| p.value(a, b, c));
        Self { u: s(u), v: s(v), m: s(m), y: s(y), t: None }
    }

    pub fn grid(&self) -> &Grid3 {
        self.u.grid()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let g = self.grid();
        for f in [&self.u, &self.v, &self.m, &self.y].into_iter().chain(self.t.as_ref()) {
            if f.grid() != g {
                return Err(GridError::GridMismatch);
            }
            f.validate()?;
        }
        Ok(())
    }

    /// T, or zero when absent.
    pub fn t_or_zero(&self) -> GridFunction {
        self.t.clone().unwrap_or_else(|| GridFunction::zeros(*self.grid()))
    }
}

/// Grid partial derivatives of one function; axes with a single node contribute zeros.
#[derive(Clone, Debug)]
pub(crate) struct Partials {
    pub th: GridFunction,
    pub eta: GridFunction,
    pub v: GridFunction,
    pub thth: GridFunction,
    pub th_eta: GridFunction,
    pub etaeta: GridFunction,
    pub th_v: GridFunction,
}

pub(crate) fn axis_diff(f: &GridFunction, axis: Axis, order: u8, mode: BoundaryMode) -> Result<GridFunction, GridError> {
    if f.grid().count(axis) == 1 {
        Ok(GridFunction::zeros(*f.grid()))
    } else {
        diff_with(f, axis, order, mode)
    }
}

impl Partials {
    pub fn of(f: &GridFunction, eta_mode: BoundaryMode) -> Result<Self, GridError> {
        let one = BoundaryMode::OneSided;
        let th = axis_diff(f, Axis::Theta, 1, one)?;
        let eta = axis_diff(f, Axis::Eta, 1, eta_mode)?;
        let v = axis_diff(f, Axis::V, 1, one)?;
        Ok(Self {
            thth: axis_diff(f, Axis::Theta, 2, one)?,
            th_eta: axis_diff(&eta, Axis::Theta, 1, one)?,
            etaeta: axis_diff(f, Axis::Eta, 2, eta_mode)?,
            th_v: axis_diff(&v, Axis::Theta, 1, one)?,
            th,
            eta,
            v,
        })
    }

    pub fn point(&self, f: &GridFunction, idx: usize) -> PointJet {
        PointJet {
            val: f.values()[idx],
            th: self.th.values()[idx],
            eta: self.eta.values()[idx],
            v: self.v.values()[idx],
            thth: self.thth.values()[idx],
            th_eta: self.th_eta.values()[idx],
            etaeta: self.etaeta.values()[idx],
            th_v: self.th_v.values()[idx],
        }
    }
}

/// φ and ψ on the grid, recomputed from a [`FieldSet`] on construction.
#[derive(Clone, Debug)]
pub struct AuxFields {
    pub phi: GridFunction,
    pub psi: GridFunction,
    eta_mode: BoundaryMode,
}

impl AuxFields {
    pub fn new(fields: &FieldSet, eta_mode: BoundaryMode) -> Result<Self, GridError> {
        fields.validate()?;
        let pm = Partials::of(&fields.m, eta_mode)?;
        let py = Partials::of(&fields.y, eta_mode)?;
        let s = fields.u.zip_map(&fields.v, |a, b| a + b)?;
        let ps = Partials::of(&s, eta_mode)?;
        let n = fields.grid().len();
        let (mut phi, mut psi) = (vec![0.0; n], vec![0.0; n]);
        for idx in 0..n {
            let e = fields.u.values()[idx].exp();
            let y = fields.y.values()[idx];
            phi[idx] = e * (pm.eta.values()[idx] + y * pm.th.values()[idx] - py.th.values()[idx]);
            psi[idx] = e * (ps.eta.values()[idx] + y * ps.th.values()[idx]);
        }
        let g = *fields.grid();
        Ok(Self { phi: GridFunction::from_raw(g, phi), psi: GridFunction::from_raw(g, psi), eta_mode })
    }

    /// `D_η f` with the same boundary treatment used to build φ and ψ.
    pub fn d_eta(&self, fields: &FieldSet, f: &GridFunction) -> Result<GridFunction, GridError> {
        apply_d_eta(fields, f, self.eta_mode)
    }
}

/// `D_η f = e^U (f_η + Y f_θ)`.
pub fn apply_d_eta(fields: &FieldSet, f: &GridFunction, eta_mode: BoundaryMode) -> Result<GridFunction, GridError> {
    if f.grid() != fields.grid() {
        return Err(GridError::GridMismatch);
    }
    let fe = axis_diff(f, Axis::Eta, 1, eta_mode)?;
    let ft = axis_diff(f, Axis::Theta, 1, BoundaryMode::OneSided)?;
    let vals = (0..f.values().len())
        .map(|i| fields.u.values()[i].exp() * (fe.values()[i] + fields.y.values()[i] * ft.values()[i]))
        .collect();
    Ok(GridFunction::from_raw(*f.grid(), vals))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub fallback_damping: f64,
    /// Cap on |U+V|, |U+V+M|, |U| and |Y|.
    pub field_cap: f64,
    /// Cap on θ-differences of the marched fields.
    pub gradient_cap: f64,
    pub eta_boundary: BoundaryMode,
    /// Allowed mismatch of the two data faces at θ = v = 0.
    pub corner_tolerance: f64,
    /// Allowed max|F| of the v = 0 data, relative to the largest size of its terms
    /// (at least 1); `None` skips the check (forced problems).
    pub constraint_tolerance: Option<f64>,
    /// max|F| on the output above which a warning is logged.
    pub drift_warning: f64,
    /// Bound on k·½e^{2U−W}/h_η², the coefficient of (U+V)_ηη.
    pub step_ratio_limit: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            damping: 1.0,
            fallback_damping: 0.5,
            field_cap: 30.0,
            gradient_cap: 1e6,
            eta_boundary: BoundaryMode::OneSided,
            corner_tolerance: 1e-10,
            constraint_tolerance: Some(0.2),
            drift_warning: 1e-3,
            step_ratio_limit: 0.5,
        }
    }
}

impl EvolveOptions {
    fn march_options(&self) -> MarchOptions {
        MarchOptions {
            tol: self.tolerance,
            max_iter: self.max_iterations,
            damping: self.damping,
            fallback_damping: self.fallback_damping,
            gradient_cap: Some(self.gradient_cap),
            field_cap: Some(self.field_cap),
        }
    }
}

/// Run summary written next to the field snapshots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub constraint_max_by_v: Vec<f64>,
    /// Fixed-point iterations used on each level after the first.
    pub iterations: Vec<usize>,
    pub damped_levels: Vec<usize>,
    pub blowup: Option<BlowUp>,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub fields: FieldSet,
    pub report: EvolveReport,
}

struct EinsteinSystem<'a> {
    grid: Grid3,
    geom: Geometry,
    with_y: bool,
    data: Option<&'a BoundaryData>,
    source: Option<&'a EinsteinSource>,
}

const FIELD_NAMES: [&str; 4] = ["U+V", "U+V+M", "U", "Y"];

impl LevelSystem for EinsteinSystem<'_> {
    fn n_marched(&self) -> usize {
        3
    }

    fn n_derived(&self) -> usize {
        usize::from(self.with_y)
    }

    fn field_name(&self, f: usize) -> &str {
        FIELD_NAMES[f]
    }

    fn n_sources(&self) -> usize {
        if self.source.is_some() {
            3
        } else {
            0
        }
    }

    fn cell_sources(&self, theta: f64, eta: f64, v: f64, out: &mut [f64]) {
        if let Some(src) = self.source {
            let s = src(theta, eta, v);
            out.copy_from_slice(&s[1..]);
        }
    }

    fn level_data(&self, v: f64) -> Vec<f64> {
        let Some(data) = self.data.filter(|_| self.with_y) else {
            return Vec::new();
        };
        let g = &self.grid;
        let k = ((v - g.v0) / g.d_v).round() as usize;
        let rows = k * g.n_eta..(k + 1) * g.n_eta;
        let mut out = Vec::with_capacity(2 * g.n_eta);
        out.extend_from_slice(&data.y0[rows.clone()]);
        out.extend_from_slice(&data.y1[rows]);
        if let Some(src) = self.source {
            let h = 0.5 * g.d_theta;
            out.extend(yode::half_step_samples(g.n_theta, g.n_eta, |s, j| src(g.theta0 + s as f64 * h, g.eta(j), v)[0]));
        }
        out
    }

    fn derive(&self, _v: f64, ld: &[f64], marched: &[Vec<f64>], derived: &mut [Vec<f64>]) -> Result<(), SolveError> {
        if !self.with_y {
            return Ok(());
        }
        let ne = self.geom.n_eta;
        let (y0, rest) = ld.split_at(ne);
        let (y1, s2) = rest.split_at(ne);
        derived[0] = yode::solve_level(&self.geom, &marched[0], &marched[1], &marched[2], y0, y1, s2)?;
        Ok(())
    }

    fn rhs(&self, jets: &[Jet], s: &[f64], out: &mut [f64]) {
        let (sj, wj, u) = (jets[0], jets[1], jets[2]);
        let v = sj - u;
        let m = wj - sj;
        let [mut ru, mut rv, mut rm] = pointwise::evolution_rhs(&u, &v, &m, jets.get(3));
        if !s.is_empty() {
            ru += s[0];
            rv += s[1];
            rm += s[2];
        }
        out[0] = ru + rv;
        out[1] = ru + rv + rm;
        out[2] = ru;
    }
}

/// Solves the unforced system from `data`.
pub fn evolve(data: &BoundaryData, grid: &Grid3, opts: &EvolveOptions) -> Result<Evolution, SolveError> {
    evolve_forced(data, grid, opts, None)
}

/// Solves the system with optional forcing on the Y and evolution equations.
pub fn evolve_forced(data: &BoundaryData, grid: &Grid3, opts: &EvolveOptions, source: Option<&EinsteinSource>) -> Result<Evolution, SolveError> {
    data.check(grid, opts)?;
    if grid.n_eta > 1 {
        let ratio = data.step_ratio(grid);
        if ratio > opts.step_ratio_limit {
            return Err(SolveError::StepRatio { ratio, limit: opts.step_ratio_limit });
        }
    }
    let geom = Geometry::new(grid, BoundaryMode::OneSided, opts.eta_boundary)?;
    let sys = EinsteinSystem { grid: *grid, geom, with_y: true, data: Some(data), source };
    let (level0, theta0) = data.marched_faces();
    let problem = Problem { grid: *grid, geom, level0, theta0: Some(theta0) };
    let out = march(&sys, &problem, &opts.march_options())?;
    let mut it = out.fields.into_iter();
    let (s, w, u, y) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let fields = unpack(grid, s, w, u, y);
    let constraint = constraint_residual(&fields)?;
    let worst = constraint.max_abs_by_v.iter().fold(0.0f64, |m, x| m.max(*x));
    if worst > opts.drift_warning {
        log::warn!("θ-constraint drift: max|F| = {worst:e} exceeds {:e}", opts.drift_warning);
    }
    Ok(Evolution {
        fields,
        report: EvolveReport {
            constraint_max_by_v: constraint.max_abs_by_v,
            iterations: out.iterations,
            damped_levels: out.damped_levels,
            blowup: None,
        },
    })
}

fn unpack(grid: &Grid3, s: Vec<f64>, w: Vec<f64>, u: Vec<f64>, y: Vec<f64>) -> FieldSet {
    let v: Vec<f64> = s.iter().zip(&u).map(|(a, b)| a - b).collect();
    let m: Vec<f64> = w.iter().zip(&s).map(|(a, b)| a - b).collect();
    let gf = |x| GridFunction::from_raw(*grid, x);
    FieldSet { u: gf(u), v: gf(v), m: gf(m), y: gf(y), t: None }
}

/// Colliding-plane-wave solution on a (θ, v) plane.
#[derive(Clone, Debug)]
pub struct CollidingSolution {
    pub u: GridFunction,
    pub v: GridFunction,
    pub m: GridFunction,
    /// max over θ of the θ-constraint residual on each v-level.
    pub constraint_max_by_v: Vec<f64>,
    /// `U_vv − ½(U_v² + V_v²) + U_v M_v`, reported only.
    pub v_constraint: GridFunction,
    pub iterations: Vec<usize>,
}

impl CollidingSolution {
    pub fn v_constraint_max(&self) -> f64 {
        self.v_constraint.max_abs()
    }
}

/// Goursat marching of the colliding-wave system (no η dependence, Y absent).
pub fn solve_colliding(data: &CollidingData, grid: &Grid3, opts: &EvolveOptions) -> Result<CollidingSolution, SolveError> {
    if grid.n_eta != 1 {
        return Err(SolveError::InvalidData("solve_colliding expects a (θ, v) grid with a single η node".into()));
    }
    data.check(grid, opts)?;
    let geom = Geometry::new(grid, BoundaryMode::OneSided, BoundaryMode::OneSided)?;
    let sys = EinsteinSystem { grid: *grid, geom, with_y: false, data: None, source: None };
    let (level0, theta0) = data.marched_faces();
    let problem = Problem { grid: *grid, geom, level0, theta0: Some(theta0) };
    let out = march(&sys, &problem, &opts.march_options())?;
    let mut it = out.fields.into_iter();
    let (s, w, u) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let fields = unpack(grid, s, w, u, vec![0.0; grid.len()]);
    let constraint = constraint_residual(&fields)?;
    let v_constraint = diagnostics::v_constraint(&fields)?;
    Ok(CollidingSolution {
        u: fields.u,
        v: fields.v,
        m: fields.m,
        constraint_max_by_v: constraint.max_abs_by_v,
        v_constraint,
        iterations: out.iterations,
    })
}
