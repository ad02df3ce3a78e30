//! The reduced Lagrangian L⁽⁻²⁾ of the plane-polarized system, its trapezoidal action,
//! and centred Gâteaux derivatives of the action along compactly supported probes.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::einstein::{aux_values, axis_diff, FieldSet, Partials};
use crate::grid::{integrate, Axis, BoundaryMode, Grid3, GridError, GridFunction};

/// Nodes next to each face, reached by the one-sided boundary stencils, where probes must vanish.
pub const BOUNDARY_LAYER: usize = 4;

#[derive(Debug, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("probe is nonzero at {axis:?} node {node}, within {BOUNDARY_LAYER} nodes of a boundary face")]
    ProbeTouchesBoundary { axis: Axis, node: usize },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// Field a variation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    U,
    V,
    M,
    Y,
    T,
}

impl Direction {
    pub const ALL: [Direction; 5] = [Direction::U, Direction::V, Direction::M, Direction::Y, Direction::T];
}

#[derive(Clone, Debug)]
pub struct ActionEvaluation {
    pub density: GridFunction,
    pub action: f64,
}

/// Pointwise L⁽⁻²⁾ with T taken as zero when the field set has none.
pub fn lagrangian_density(fields: &FieldSet, eta_mode: BoundaryMode) -> Result<GridFunction, GridError> {
    fields.validate()?;
    let g = *fields.grid();
    let t = fields.t_or_zero();
    let one = BoundaryMode::OneSided;
    let t_th = axis_diff(&t, Axis::Theta, 1, one)?;
    let t_thth = axis_diff(&t, Axis::Theta, 2, one)?;
    let pu = Partials::of(&fields.u, eta_mode)?;
    let pv = Partials::of(&fields.v, eta_mode)?;
    let pm = Partials::of(&fields.m, eta_mode)?;
    let py = Partials::of(&fields.y, eta_mode)?;
    let vals = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let u = pu.point(&fields.u, idx);
            let v = pv.point(&fields.v, idx);
            let m = pm.point(&fields.m, idx);
            let y = py.point(&fields.y, idx);
            let a = aux_values(&u.jet(), &v.jet(), &m.jet(), &y.jet());
            let tv = t.values()[idx];
            let w = u.val + v.val + m.val;
            let (phi, psi) = (a.phi, a.psi);
            let evolution = 2.0 * m.th_v + 4.0 * u.th_v - v.th * v.v - 3.0 * u.th * u.v;
            let gauge = -t_thth.values()[idx] + t_th.values()[idx] * (m.th + 2.0 * u.th) + tv * (m.thth + 2.0 * u.thth - 1.5 * u.th * u.th - 0.5 * v.th * v.th);
            let transverse = (-w).exp() * (-2.0 * a.d_phi - a.d_psi + 1.5 * phi * phi + 2.0 * phi * psi + psi * psi);
            (-u.val).exp() * (evolution + gauge + transverse)
        })
        .collect();
    Ok(GridFunction::from_raw(g, vals))
}

pub fn action(fields: &FieldSet, eta_mode: BoundaryMode) -> Result<ActionEvaluation, GridError> {
    let density = lagrangian_density(fields, eta_mode)?;
    let action = integrate(&density);
    Ok(ActionEvaluation { density, action })
}

fn check_probe(grid: &Grid3, probe: &GridFunction) -> Result<(), VariationalError> {
    if probe.grid() != grid {
        return Err(GridError::GridMismatch.into());
    }
    probe.validate()?;
    let [nt, ne, nv] = grid.counts();
    for idx in 0..grid.len() {
        if probe.values()[idx] == 0.0 {
            continue;
        }
        let (i, j, k) = grid.unindex(idx);
        for (axis, at, n) in [(Axis::Theta, i, nt), (Axis::Eta, j, ne), (Axis::V, k, nv)] {
            if n > 1 && (at < BOUNDARY_LAYER || at + BOUNDARY_LAYER >= n) {
                return Err(VariationalError::ProbeTouchesBoundary { axis, node: at });
            }
        }
    }
    Ok(())
}

fn perturbed(fields: &FieldSet, dir: Direction, probe: &GridFunction, s: f64) -> Result<FieldSet, GridError> {
    let mut f = fields.clone();
    let shift = |x: &GridFunction| x.axpby(1.0, probe, s);
    match dir {
        Direction::U => f.u = shift(&f.u)?,
        Direction::V => f.v = shift(&f.v)?,
        Direction::M => f.m = shift(&f.m)?,
        Direction::Y => f.y = shift(&f.y)?,
        Direction::T => f.t = Some(shift(&fields.t_or_zero())?),
    }
    Ok(f)
}

/// `[S(f + s·p·e_dir) − S(f − s·p·e_dir)] / 2s`.
pub fn variational_residual(fields: &FieldSet, dir: Direction, probe: &GridFunction, step: f64, eta_mode: BoundaryMode) -> Result<f64, VariationalError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(VariationalError::InvalidStep(step));
    }
    fields.validate()?;
    check_probe(fields.grid(), probe)?;
    let plus = action(&perturbed(fields, dir, probe, step)?, eta_mode)?.action;
    let minus = action(&perturbed(fields, dir, probe, -step)?, eta_mode)?.action;
    Ok((plus - minus) / (2.0 * step))
}

/// Product of C^∞ bumps `exp(1 − 1/(1 − r²))` centred at `center` with half-widths `radius`;
/// axes with a single node contribute a factor 1.
pub fn bump_probe(grid: Grid3, center: [f64; 3], radius: [f64; 3]) -> GridFunction {
    let counts = grid.counts();
    let bump = |x: f64, c: f64, r: f64| {
        let q = (x - c) / r;
        if q.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - q * q)).exp()
        }
    };
    GridFunction::from_fn(grid, |t, e, v| {
        [t, e, v].iter().enumerate().map(|(a, &x)| if counts[a] == 1 { 1.0 } else { bump(x, center[a], radius[a]) }).product()
    })
}

/// `count` bump probes with seeded random centres and widths, fixed in coordinates so the
/// same probes are produced on every resolution of one domain. Supports lie in the middle
/// 40% of each axis, which clears [`BOUNDARY_LAYER`] once an axis has at least 15 nodes.
pub fn random_probes(grid: Grid3, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = grid.counts();
    let origins = grid.origins();
    let spacings = grid.spacings();
    (0..count)
        .map(|_| {
            let mut center = [0.0; 3];
            let mut radius = [1.0; 3];
            for a in 0..3 {
                let len = (counts[a].max(2) - 1) as f64 * spacings[a];
                center[a] = origins[a] + len * rng.random_range(0.45..0.55);
                radius[a] = len * rng.random_range(0.1..0.15);
            }
            bump_probe(grid, center, radius)
        })
        .collect()
}

/// Residuals of one direction over a probe family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionResiduals {
    pub direction: Direction,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub action: f64,
    pub residuals_by_direction: Vec<DirectionResiduals>,
    pub probe_seed: u64,
}

/// Action and variational residuals in every direction along `n_probes` seeded probes.
pub fn verify_action(fields: &FieldSet, n_probes: usize, seed: u64, step: f64, eta_mode: BoundaryMode) -> Result<VariationReport, VariationalError> {
    let probes = random_probes(*fields.grid(), n_probes, seed);
    let action = action(fields, eta_mode)?.action;
    let residuals_by_direction = Direction::ALL
        .par_iter()
        .map(|&direction| {
            let residuals = probes.par_iter().map(|p| variational_residual(fields, direction, p, step, eta_mode)).collect::<Result<Vec<_>, _>>()?;
            let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            Ok(DirectionResiduals { direction, residuals, max_abs })
        })
        .collect::<Result<_, VariationalError>>()?;
    Ok(VariationReport { action, residuals_by_direction, probe_seed: seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::profiles::Profile;

    fn grid() -> Grid3 {
        build_grid([(0.0, 1.0), (-1.0, 1.0), (0.0, 1.0)], [17, 17, 17]).unwrap()
    }

    #[test]
    fn zero_fields_have_zero_density() {
        let d = lagrangian_density(&FieldSet::zeros(grid()), BoundaryMode::OneSided).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn pure_gauge_density_is_minus_t_thth() {
        let mut f = FieldSet::zeros(grid());
        f.t = Some(GridFunction::from_fn(grid(), |t, _, _| t * t));
        let d = lagrangian_density(&f, BoundaryMode::OneSided).unwrap();
        assert!(d.values().iter().all(|x| (x + 2.0).abs() < 1e-10));
    }

    #[test]
    fn theta_only_constraint_solution_has_zero_density() {
        let u = Profile::LogLinear { scale: -2.0, offset: 1.0, c_theta: -0.5, c_eta: 0.0, c_v: 0.0 };
        let g = grid();
        let f = FieldSet::from_profiles(g, &u, &Profile::Zero, &Profile::Zero, &Profile::Zero);
        let d = lagrangian_density(&f, BoundaryMode::OneSided).unwrap();
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn action_is_trapezoid_of_density() {
        let g = grid();
        let mut f = FieldSet::zeros(g);
        f.t = Some(GridFunction::from_fn(g, |t, _, _| t * t));
        let a = action(&f, BoundaryMode::OneSided).unwrap();
        assert!((a.action - (-2.0 * 2.0)).abs() < 1e-10);
    }

    #[test]
    fn zero_fields_are_stationary() {
        let g = grid();
        let f = FieldSet::zeros(g);
        for p in random_probes(g, 3, 7) {
            for d in Direction::ALL {
                let r = variational_residual(&f, d, &p, 1e-4, BoundaryMode::OneSided).unwrap();
                assert!(r.abs() < 1e-8, "{d:?} {r:e}");
            }
        }
    }

    #[test]
    fn boundary_probe_is_rejected() {
        let g = grid();
        let p = GridFunction::constant(g, 1.0);
        let e = variational_residual(&FieldSet::zeros(g), Direction::U, &p, 1e-3, BoundaryMode::OneSided).unwrap_err();
        assert!(matches!(e, VariationalError::ProbeTouchesBoundary { .. }));
        let e = variational_residual(&FieldSet::zeros(g), Direction::U, &random_probes(g, 1, 1)[0], 0.0, BoundaryMode::OneSided).unwrap_err();
        assert!(matches!(e, VariationalError::InvalidStep(_)));
    }

    #[test]
    fn random_probes_vanish_on_faces() {
        let g = grid();
        for p in random_probes(g, 5, 3) {
            assert!(check_probe(&g, &p).is_ok());
            assert!(p.max_abs() > 0.1);
        }
    }
}
