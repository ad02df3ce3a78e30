use serde::{Deserialize, Serialize};

use super::data::PulseSpec;
use super::pointwise::{constraint_value, residuals, PointFields};
use super::{axis_diff, evolve, BoundaryData, EvolveOptions, FieldSet, Partials};
use crate::error::SolveError;
use crate::grid::{Axis, BoundaryMode, GridError, GridFunction};
use crate::optics::{solve_diffractive, RayCoefficients, WaveData, WaveOptions};
use crate::profiles::Profile;

/// The θ-constraint residual F and its per-level maxima.
#[derive(Clone, Debug)]
pub struct ConstraintField {
    pub f: GridFunction,
    pub max_abs_by_v: Vec<f64>,
}

fn max_by_v(f: &GridFunction) -> Vec<f64> {
    let g = f.grid();
    (0..g.n_v).map(|k| f.level(k).iter().fold(0.0f64, |m, x| m.max(x.abs()))).collect()
}

/// `F = U_θθ − ½(U_θ² + V_θ²) + U_θ M_θ` with second-order θ-stencils.
pub fn constraint_residual(fields: &FieldSet) -> Result<ConstraintField, GridError> {
    fields.validate()?;
    let one = BoundaryMode::OneSided;
    let ut = axis_diff(&fields.u, Axis::Theta, 1, one)?;
    let utt = axis_diff(&fields.u, Axis::Theta, 2, one)?;
    let vt = axis_diff(&fields.v, Axis::Theta, 1, one)?;
    let mt = axis_diff(&fields.m, Axis::Theta, 1, one)?;
    let vals = (0..fields.grid().len())
        .map(|i| constraint_value(ut.values()[i], utt.values()[i], vt.values()[i], mt.values()[i]))
        .collect();
    let f = GridFunction::from_raw(*fields.grid(), vals);
    let max_abs_by_v = max_by_v(&f);
    Ok(ConstraintField { f, max_abs_by_v })
}

/// Comparison of F with the propagation law `F(v) = F(0)·exp(U(v) − U(0))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMonitor {
    pub max_abs_by_v: Vec<f64>,
    pub defect_by_v: Vec<f64>,
    pub max_defect: f64,
}

pub fn monitor_constraint(fields: &FieldSet) -> Result<ConstraintMonitor, GridError> {
    let c = constraint_residual(fields)?;
    let g = *fields.grid();
    let f0 = c.f.level(0);
    let u0 = fields.u.level(0);
    let defect_by_v: Vec<f64> = (0..g.n_v)
        .map(|k| {
            let (f, u) = (c.f.level(k), fields.u.level(k));
            (0..g.level_len()).map(|i| (f[i] - f0[i] * (u[i] - u0[i]).exp()).abs()).fold(0.0, f64::max)
        })
        .collect();
    let max_defect = defect_by_v.iter().copied().fold(0.0, f64::max);
    Ok(ConstraintMonitor { max_abs_by_v: c.max_abs_by_v, defect_by_v, max_defect })
}

/// Grid residuals of the five equations, evaluated with second-order stencils (T = 0 gauge).
pub fn equation_residuals(fields: &FieldSet, eta_mode: BoundaryMode) -> Result<[GridFunction; 5], GridError> {
    fields.validate()?;
    let g = *fields.grid();
    let pu = Partials::of(&fields.u, eta_mode)?;
    let pv = Partials::of(&fields.v, eta_mode)?;
    let pm = Partials::of(&fields.m, eta_mode)?;
    let py = Partials::of(&fields.y, eta_mode)?;
    let mut out: [Vec<f64>; 5] = std::array::from_fn(|_| Vec::with_capacity(g.len()));
    for idx in 0..g.len() {
        let p = PointFields { u: pu.point(&fields.u, idx), v: pv.point(&fields.v, idx), m: pm.point(&fields.m, idx), y: py.point(&fields.y, idx) };
        for (o, r) in out.iter_mut().zip(residuals(&p)) {
            o.push(r);
        }
    }
    Ok(out.map(|v| GridFunction::from_raw(g, v)))
}

/// `U_vv − ½(U_v² + V_v²) + U_v M_v`.
pub(crate) fn v_constraint(fields: &FieldSet) -> Result<GridFunction, GridError> {
    let one = BoundaryMode::OneSided;
    let uv = axis_diff(&fields.u, Axis::V, 1, one)?;
    let uvv = axis_diff(&fields.u, Axis::V, 2, one)?;
    let vv = axis_diff(&fields.v, Axis::V, 1, one)?;
    let mv = axis_diff(&fields.m, Axis::V, 1, one)?;
    let vals = (0..fields.grid().len())
        .map(|i| constraint_value(uv.values()[i], uvv.values()[i], vv.values()[i], mv.values()[i]))
        .collect();
    Ok(GridFunction::from_raw(*fields.grid(), vals))
}

/// Full versus linearized evolution of small-amplitude data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub epsilon: f64,
    /// max|V_full/ε − V_lin|.
    pub rescaled_defect: f64,
    /// max|V_full − ε·V_lin|.
    pub absolute_defect: f64,
    pub max_abs_u: f64,
    pub max_abs_v_lin: f64,
}

/// Evolves `(V, M) = (εV̂, −εV̂)` with U from the θ-constraint and Y = 0 on θ = 0, and
/// compares V with the solution of `V_θv = ½V_ηη` from the same V̂ data.
pub fn linearization_check(epsilon: f64, v_hat: &Profile, grid: &crate::grid::Grid3, opts: &EvolveOptions) -> Result<LinearizationReport, SolveError> {
    let mut initial = Vec::with_capacity(grid.level_len());
    for j in 0..grid.n_eta {
        for i in 0..grid.n_theta {
            initial.push(v_hat.value(grid.theta(i), grid.eta(j), grid.v0));
        }
    }
    let theta0 = (0..grid.n_v).flat_map(|_| (0..grid.n_eta).map(|j| initial[j * grid.n_theta])).collect();
    let wopts = WaveOptions {
        tolerance: opts.tolerance,
        max_iterations: opts.max_iterations,
        damping: opts.damping,
        fallback_damping: opts.fallback_damping,
        eta_boundary: opts.eta_boundary,
        step_ratio_limit: opts.step_ratio_limit,
        ..Default::default()
    };
    let lin = solve_diffractive(&WaveData { initial, theta0: Some(theta0), source: None }, &RayCoefficients::constant(0.0, 0.0, -1.0), grid, &wopts)?;
    let max_abs_v_lin = lin.a.max_abs();
    if epsilon == 0.0 {
        return Ok(LinearizationReport { epsilon, rescaled_defect: 0.0, absolute_defect: 0.0, max_abs_u: 0.0, max_abs_v_lin });
    }
    let spec = PulseSpec { v: v_hat.clone().scaled(epsilon), m: v_hat.clone().scaled(-epsilon), substeps: 4 };
    let data = BoundaryData::constrained_pulse(grid, &spec)?;
    let full = evolve(&data, grid, opts)?.fields;
    let (mut rescaled, mut absolute) = (0.0f64, 0.0f64);
    for (a, b) in full.v.values().iter().zip(lin.a.values()) {
        rescaled = rescaled.max((a / epsilon - b).abs());
        absolute = absolute.max((a - epsilon * b).abs());
    }
    Ok(LinearizationReport { epsilon, rescaled_defect: rescaled, absolute_defect: absolute, max_abs_u: full.u.max_abs(), max_abs_v_lin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Grid3};

    #[test]
    fn constraint_examples() {
        let g = build_grid([(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], [9, 3, 3]).unwrap();
        assert_eq!(constraint_residual(&FieldSet::zeros(g)).unwrap().f.max_abs(), 0.0);
        let t = Profile::Monomial { coeff: 1.0, p_theta: 1, p_eta: 0, p_v: 0 };
        let f = FieldSet::from_profiles(g, &t, &t, &Profile::Zero, &Profile::Zero);
        let c = constraint_residual(&f).unwrap();
        assert!(c.f.values().iter().all(|x| (x + 1.0).abs() < 1e-12));
    }

    #[test]
    fn exact_constraint_solution_converges() {
        let u = Profile::LogLinear { scale: -2.0, offset: 1.0, c_theta: -0.5, c_eta: 0.0, c_v: 0.0 };
        let mut pairs = Vec::new();
        for n in [17, 33, 65] {
            let g = build_grid([(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], [n, 3, 3]).unwrap();
            let f = FieldSet::from_profiles(g, &u, &Profile::Zero, &Profile::Zero, &Profile::Zero);
            pairs.push((g.d_theta, constraint_residual(&f).unwrap().f.max_abs()));
        }
        let rep = crate::grid::estimate_order(&pairs).unwrap();
        assert!((rep.observed_order - 2.0).abs() < 0.3, "{rep:?}");
    }

    #[test]
    fn seeded_constraint_is_constant_when_u_is_v_independent() {
        let g = build_grid([(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], [17, 3, 5]).unwrap();
        let t = Profile::Monomial { coeff: 1.0, p_theta: 1, p_eta: 0, p_v: 0 };
        let f = FieldSet::from_profiles(g, &t, &t, &Profile::Zero, &Profile::Zero);
        let m = monitor_constraint(&f).unwrap();
        assert!(m.max_defect < 1e-12);
        assert!(m.max_abs_by_v.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_epsilon_linearization_is_trivial() {
        let g = Grid3::from_spacing([9, 9, 5], [0.0, -2.0, 0.0], [0.125, 0.5, 0.05]).unwrap();
        let vh = Profile::Gaussian { amplitude: 1.0, theta_center: 0.5, theta_width: 0.2, eta_center: 0.0, eta_width: Some(1.0) };
        let r = linearization_check(0.0, &vh, &g, &EvolveOptions::default()).unwrap();
        assert_eq!(r.absolute_defect, 0.0);
        assert_eq!(r.max_abs_u, 0.0);
    }
}
