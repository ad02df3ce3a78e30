//! Plane-polarized Ricci components against the residuals of the reduced equations.
//!
//! Each targeted component is compared with a fixed combination of the five
//! residuals `E1..E5` (left side minus right side, as returned by
//! [`crate::einstein::residuals`]):
//!
//! | component   | matched combination                                   |
//! |-------------|-------------------------------------------------------|
//! | `R⁽⁻⁴⁾_00`  | `E1`                                                  |
//! | `R⁽⁻³⁾_02`  | `½e^{−U} E2 − Y E1`                                   |
//! | `R⁽⁻²⁾_01`  | `E3 + E5`                                             |
//! | `R⁽⁻²⁾_22`  | `−e^{M−U+V}(E3 − E4) − Y e^{−U} E2 + Y² E1`           |
//! | `R⁽⁻²⁾_33`  | `−e^{M−U−V}(E3 + E4)`                                 |

use serde::{Deserialize, Serialize};

use super::{ricci_orders, ExpansionPoint, PlanePolarizedMetric, RicciError};
use crate::einstein::{residuals, PointFields, PointJet};
use crate::profiles::Profile;

/// Analytic U, V, M, Y of `(θ, η, v)`; T is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFields {
    pub u: Profile,
    pub v: Profile,
    pub m: Profile,
    pub y: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMatch {
    pub component: String,
    pub ricci: f64,
    pub matched_residual: f64,
    /// `ricci / matched_residual` when the residual is not negligible.
    pub factor: Option<f64>,
    pub ricci_vanishes: bool,
    pub residual_vanishes: bool,
}

impl ComponentMatch {
    /// Both vanish or neither does.
    pub fn consistent(&self) -> bool {
        self.ricci_vanishes == self.residual_vanishes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedMatchReport {
    pub theta: f64,
    pub eta: f64,
    pub v: f64,
    /// `E1..E5`.
    pub residuals: [f64; 5],
    pub components: Vec<ComponentMatch>,
}

impl ReducedMatchReport {
    pub fn all_consistent(&self) -> bool {
        self.components.iter().all(ComponentMatch::consistent)
    }

    pub fn max_abs_ricci(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.ricci.abs()))
    }
}

/// Evaluates both sides at `(θ, η, v)`; `tolerance` decides vanishing.
pub fn reduced_equation_match(fields: &AnalyticFields, theta: f64, eta: f64, v: f64, tolerance: f64) -> Result<ReducedMatchReport, RicciError> {
    let metric = PlanePolarizedMetric { u: fields.u.clone(), v: fields.v.clone(), m: fields.m.clone(), y: fields.y.clone(), t: Profile::Zero }.expansion();
    let point = ExpansionPoint { theta, eta: [eta, 0.0], x: [0.0, v, 0.0, 0.0] };
    let r = ricci_orders(&metric, &point)?;

    let jet = |p: &Profile| PointJet::from_hessian(&p.jet(theta, eta, v));
    let pf = PointFields { u: jet(&fields.u), v: jet(&fields.v), m: jet(&fields.m), y: jet(&fields.y) };
    let e = residuals(&pf);
    let (uu, vv, mm, yy) = (pf.u.val, pf.v.val, pf.m.val, pf.y.val);
    let emu = (-uu).exp();
    let matched = [
        ("R4_00", r.r4[0][0], e[0]),
        ("R3_02", r.r3[0][2], 0.5 * emu * e[1] - yy * e[0]),
        ("R2_01", r.r2[0][1], e[2] + e[4]),
        ("R2_22", r.r2[2][2], -(mm - uu + vv).exp() * (e[2] - e[3]) - yy * emu * e[1] + yy * yy * e[0]),
        ("R2_33", r.r2[3][3], -(mm - uu - vv).exp() * (e[2] + e[3])),
    ];
    let components = matched
        .iter()
        .map(|&(name, ricci, res)| ComponentMatch {
            component: name.to_string(),
            ricci,
            matched_residual: res,
            factor: (res.abs() > tolerance).then(|| ricci / res),
            ricci_vanishes: ricci.abs() <= tolerance,
            residual_vanishes: res.abs() <= tolerance,
        })
        .collect();
    Ok(ReducedMatchReport { theta, eta, v, residuals: e, components })
}
