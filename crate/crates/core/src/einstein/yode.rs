//! The linear θ-ODE for Y on each (η, v) column.
//!
//! Written as `Y_θθ − (P Y)_θ + q Y = R` with `P = (V+M)_θ`,
//! `q = U_θV_θ + V_θ² − U_θθ − U_θM_θ` and
//! `R = (U+V+M)_θη + M_η U_θ − (U+V)_η V_θ − e^{−U} s₂`, where `s₂` is an optional
//! source on the Y equation. The first-order system `Y' = Z + P Y`, `Z' = −q Y + R`
//! is advanced with classical RK4.

use rayon::prelude::*;

use crate::error::SolveError;
use crate::grid::d1_line;
use crate::march::{half_jets, node_eta_derivatives, node_theta_derivatives, Geometry};

/// Coefficients `[P, q, R]` of the Y equation at one sample point.
pub type YCoefficients = [f64; 3];

/// Integrates the Y equation over `n` nodes spaced `h` apart.
///
/// `coef(s)` gives the coefficients at `θ₀ + s·h/2`, so even `s` are nodes and odd `s`
/// are midpoints. `y0`, `y1` are `Y` and `Y_θ` at the first node.
pub fn integrate_y_ode(n: usize, h: f64, y0: f64, y1: f64, coef: impl Fn(usize) -> YCoefficients, out: &mut [f64]) -> Result<(), SolveError> {
    assert_eq!(out.len(), n);
    let get = |s: usize| {
        let c = coef(s);
        if c.iter().all(|x| x.is_finite()) {
            Ok(c)
        } else {
            Err(SolveError::NonFiniteCoefficient(format!("Y equation coefficients {c:?} at sample {s}")))
        }
    };
    let f = |c: YCoefficients, y: f64, z: f64| (z + c[0] * y, -c[1] * y + c[2]);
    let c0 = get(0)?;
    let (mut y, mut z) = (y0, y1 - c0[0] * y0);
    out[0] = y;
    let mut ca = c0;
    for i in 0..n - 1 {
        let cm = get(2 * i + 1)?;
        let cb = get(2 * i + 2)?;
        let (k1y, k1z) = f(ca, y, z);
        let (k2y, k2z) = f(cm, y + 0.5 * h * k1y, z + 0.5 * h * k1z);
        let (k3y, k3z) = f(cm, y + 0.5 * h * k2y, z + 0.5 * h * k2z);
        let (k4y, k4z) = f(cb, y + h * k3y, z + h * k3z);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        out[i + 1] = y;
        ca = cb;
    }
    Ok(())
}

/// Solves for Y on one v-level given S = U+V, W = U+V+M and U there.
///
/// `y0`, `y1` hold the θ = 0 data per η row; `s2` holds the Y-equation source at
/// `2·n_theta − 1` half-step samples per row (empty when unforced).
pub(crate) fn solve_level(geom: &Geometry, s: &[f64], w: &[f64], u: &[f64], y0: &[f64], y1: &[f64], s2: &[f64]) -> Result<Vec<f64>, SolveError> {
    let n = geom.n_theta;
    let ns = 2 * n - 1;
    let h = geom.h_theta;
    let line = |f: &[f64]| node_theta_derivatives(f, geom);
    let (s_t, _) = line(s);
    let (w_t, _) = line(w);
    let (u_t, u_tt) = line(u);
    let (s_e, _) = node_eta_derivatives(s, geom);
    let (w_e, _) = node_eta_derivatives(w, geom);
    let mut w_te = vec![0.0; w.len()];
    if geom.n_eta > 1 {
        for j in 0..geom.n_eta {
            let r = j * n..(j + 1) * n;
            d1_line(&w_e[r.clone()], h, geom.theta_mode, &mut w_te[r]);
        }
    }
    let hs = half_jets(s, geom);
    let hw = half_jets(w, geom);
    let hu = half_jets(u, geom);

    let mut y = vec![0.0; geom.level_len()];
    y.par_chunks_mut(n).enumerate().try_for_each(|(j, row)| {
        let coef = |k: usize| {
            let src = if s2.is_empty() { 0.0 } else { s2[j * ns + k] };
            let (ut, utt, st, wt, se, we, wte, uval);
            if k % 2 == 0 {
                let i = j * n + k / 2;
                (ut, utt, st, wt, se, we, wte, uval) = (u_t[i], u_tt[i], s_t[i], w_t[i], s_e[i], w_e[i], w_te[i], u[i]);
            } else {
                let c = k / 2;
                let (a, b, d) = (hu.at(c, j), hs.at(c, j), hw.at(c, j));
                (ut, utt, st, wt, se, we, wte, uval) = (a.th, a.thth, b.th, d.th, b.eta, d.eta, d.th_eta, a.val);
            }
            let vt = st - ut;
            let mt = wt - st;
            let me = we - se;
            [wt - ut, ut * vt + vt * vt - utt - ut * mt, wte + me * ut - se * vt - (-uval).exp() * src]
        };
        integrate_y_ode(n, h, y0[j], y1[j], coef, row)
    })?;
    Ok(y)
}

/// Samples `f(θ₀ + s·h/2, η_j)` for every row, the layout [`solve_level`] expects for `s2`.
pub(crate) fn half_step_samples(n_theta: usize, n_eta: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let ns = 2 * n_theta - 1;
    let mut out = Vec::with_capacity(ns * n_eta);
    for j in 0..n_eta {
        for s in 0..ns {
            out.push(f(s, j));
        }
    }
    out
}
