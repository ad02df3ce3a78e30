//! Pointwise algebra of the plane-polarized system: φ, ψ, their D_η derivatives,
//! the five equation residuals and the marching right-hand sides.

use crate::dual::Hessian;
use crate::march::Jet;

/// Value and derivatives of one field at a point, including the mixed θv derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointJet {
    pub val: f64,
    pub th: f64,
    pub eta: f64,
    pub v: f64,
    pub thth: f64,
    pub th_eta: f64,
    pub etaeta: f64,
    pub th_v: f64,
}

impl PointJet {
    /// From a (θ, η, v) value/gradient/Hessian triple.
    pub fn from_hessian(h: &Hessian<3>) -> Self {
        Self {
            val: h.value,
            th: h.grad[0],
            eta: h.grad[1],
            v: h.grad[2],
            thth: h.hess[0][0],
            th_eta: h.hess[0][1],
            etaeta: h.hess[1][1],
            th_v: h.hess[0][2],
        }
    }

    pub(crate) fn jet(&self) -> Jet {
        Jet { val: self.val, th: self.th, eta: self.eta, v: self.v, thth: self.thth, th_eta: self.th_eta, etaeta: self.etaeta }
    }
}

/// Jets of U, V, M, Y at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointFields {
    pub u: PointJet,
    pub v: PointJet,
    pub m: PointJet,
    pub y: PointJet,
}

/// φ, ψ and D_η applied to each.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AuxValues {
    pub phi: f64,
    pub psi: f64,
    pub phi_th: f64,
    pub psi_th: f64,
    pub d_phi: f64,
    pub d_psi: f64,
}

pub(crate) fn aux_values(u: &Jet, v: &Jet, m: &Jet, y: &Jet) -> AuxValues {
    let e = u.val.exp();
    let s = *u + *v;
    let phi = e * (m.eta + y.val * m.th - y.th);
    let psi = e * (s.eta + y.val * s.th);
    let phi_th = u.th * phi + e * (m.th_eta + y.th * m.th + y.val * m.thth - y.thth);
    let phi_eta = u.eta * phi + e * (m.etaeta + y.eta * m.th + y.val * m.th_eta - y.th_eta);
    let psi_th = u.th * psi + e * (s.th_eta + y.th * s.th + y.val * s.thth);
    let psi_eta = u.eta * psi + e * (s.etaeta + y.eta * s.th + y.val * s.th_eta);
    AuxValues {
        phi,
        psi,
        phi_th,
        psi_th,
        d_phi: e * (phi_eta + y.val * phi_th),
        d_psi: e * (psi_eta + y.val * psi_th),
    }
}

/// `[A, B, C]` multiplied by ½e^{−(U+V+M)}.
fn forcing(u: &Jet, v: &Jet, m: &Jet, a: &AuxValues) -> [f64; 3] {
    let e = 0.5 * (-(u.val + v.val + m.val)).exp();
    let (phi, psi) = (a.phi, a.psi);
    [
        e * (a.d_phi + a.d_psi - 0.5 * phi * phi - phi * psi - psi * psi),
        e * (-a.d_phi + 0.5 * phi * phi),
        e * (-a.d_psi - 0.5 * phi * phi + psi * psi),
    ]
}

/// Residuals (left side minus right side) of the θ-constraint, the Y equation
/// `(φ+ψ)_θ = ψ(U+V)_θ` and the three evolution equations, in that order.
pub fn residuals(p: &PointFields) -> [f64; 5] {
    let (u, v, m, y) = (p.u.jet(), p.v.jet(), p.m.jet(), p.y.jet());
    let a = aux_values(&u, &v, &m, &y);
    let [fa, fb, fc] = forcing(&u, &v, &m, &a);
    [
        u.thth - 0.5 * (u.th * u.th + v.th * v.th) + u.th * m.th,
        a.phi_th + a.psi_th - a.psi * (u.th + v.th),
        p.u.th_v - u.th * u.v - fa,
        p.v.th_v - 0.5 * (u.th * v.v + u.v * v.th) - fb,
        p.m.th_v + 0.5 * (u.th * u.v - v.th * v.v) - fc,
    ]
}

/// θ-constraint residual `U_θθ − ½(U_θ² + V_θ²) + U_θ M_θ`.
#[inline]
pub fn constraint_value(u_th: f64, u_thth: f64, v_th: f64, m_th: f64) -> f64 {
    u_thth - 0.5 * (u_th * u_th + v_th * v_th) + u_th * m_th
}

/// Right sides of `U_θv`, `V_θv`, `M_θv`; the E-terms are dropped when `y` is `None`.
pub(crate) fn evolution_rhs(u: &Jet, v: &Jet, m: &Jet, y: Option<&Jet>) -> [f64; 3] {
    let mut r = [
        u.th * u.v,
        0.5 * (u.th * v.v + u.v * v.th),
        -0.5 * (u.th * u.v - v.th * v.v),
    ];
    if let Some(y) = y {
        let a = aux_values(u, v, m, y);
        let f = forcing(u, v, m, &a);
        for (x, g) in r.iter_mut().zip(f) {
            *x += g;
        }
    }
    r
}
