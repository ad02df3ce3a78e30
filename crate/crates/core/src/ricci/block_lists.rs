//! Component lists of the connection and Ricci orders for metrics in colliding-wave
//! block form: `g⁽⁰⁾` with only `01` and `ab` blocks, `g⁽¹⁾` with `1a` and `ab`,
//! `g⁽²⁾` with `ij`, phase `u = x⁰` and transverse variables `y^a = x^a`.
//!
//! Transverse indices `a, b, c, …` run over `{2, 3}`. Index raising uses `g⁽⁰⁾`.
//! Every product is formed in jet arithmetic, so a derivative of a grouped
//! expression such as `(g^{ab} g_{ab,θ})_{,θ}` is read off the result's partials.

use serde::{Deserialize, Serialize};

use super::{bar, map2, slow, ChristoffelOrders, Jet1, Jet2, MetricJets, RicciError, Tensor2, Tensor3, THETA};
use crate::dual::Real;

const T: [usize; 2] = [2, 3];

fn st(f: impl Fn(usize) -> Jet1) -> Jet1 {
    T.iter().fold(Jet1::zero(), |s, &a| s + f(a))
}

fn st2(f: impl Fn(usize, usize) -> Jet1) -> Jet1 {
    st(|a| st(|b| f(a, b)))
}

fn st3(f: impl Fn(usize, usize, usize) -> Jet1) -> Jet1 {
    st(|a| st(|b| st(|c| f(a, b, c))))
}

/// Values of the listed components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRicci {
    pub r4_00: f64,
    pub r3_00: f64,
    /// `R⁽⁻³⁾_{0a}` for `a = 2, 3`.
    pub r3_0a: [f64; 2],
    pub r2_01: f64,
    /// `R⁽⁻²⁾_{ab}` for `a, b ∈ {2, 3}`.
    pub r2_ab: [[f64; 2]; 2],
    /// Ricci tensor of `g⁽⁰⁾` in the transverse stretched variables.
    pub r_star: [[f64; 2]; 2],
}

struct Block<'a> {
    g: &'a [Tensor2<Jet2>; 3],
    gi2: Tensor2<Jet2>,
    g1up2: Tensor2<Jet2>,
    h2: Tensor2<Jet2>,
}

impl<'a> Block<'a> {
    fn new(j: &'a MetricJets) -> Result<Self, RicciError> {
        let gi2 = j.inverse()?;
        let raise = |t: &Tensor2<Jet2>| map2(|a, b| (0..4).fold(Jet2::zero(), |s, m| (0..4).fold(s, |s, n| s + gi2[a][m] * gi2[b][n] * t[m][n])));
        let g1up2 = raise(&j.g[1]);
        let g2up2 = raise(&j.g[2]);
        let h2 = map2(|a, b| {
            let q = (0..4).fold(Jet2::zero(), |s, m| (0..4).fold(s, |s, n| s + j.g[0][m][n] * g1up2[a][m] * g1up2[b][n]));
            -(g2up2[a][b] - q)
        });
        Ok(Self { g: &j.g, gi2, g1up2, h2 })
    }

    fn g(&self, k: usize, a: usize, b: usize) -> Jet1 {
        self.g[k][a][b].re
    }
    fn th(&self, k: usize, a: usize, b: usize) -> Jet1 {
        self.g[k][a][b].du[THETA]
    }
    /// `g⁽ᵏ⁾_{ab,c̄}`.
    fn bar(&self, k: usize, c: usize, a: usize, b: usize) -> Jet1 {
        self.g[k][a][b].du[bar(c)]
    }
    /// `g⁽ᵏ⁾_{ab,μ}`.
    fn x(&self, k: usize, m: usize, a: usize, b: usize) -> Jet1 {
        self.g[k][a][b].du[slow(m)]
    }
    fn gi(&self, a: usize, b: usize) -> Jet1 {
        self.gi2[a][b].re
    }
    fn g1up(&self, a: usize, b: usize) -> Jet1 {
        self.g1up2[a][b].re
    }
    fn h2(&self, a: usize, b: usize) -> Jet1 {
        self.h2[a][b].re
    }
    fn gi01(&self) -> Jet1 {
        self.gi(0, 1)
    }
    /// `g⁽¹⁾^c_1 = g^{cd} g⁽¹⁾_{d1}` with second partials.
    fn g1_mixed2(&self, c: usize) -> Jet2 {
        T.iter().fold(Jet2::zero(), |s, &d| s + self.gi2[c][d] * self.g[1][d][1])
    }
    /// `g⁽¹⁾^0_c = g^{01} g⁽¹⁾_{1c}`.
    fn g1_zero(&self, c: usize) -> Jet1 {
        self.gi01() * self.g(1, 1, c)
    }
    /// `g^{cd} g_{cd,i}` for a jet slot `i`.
    fn trace(&self, i: usize) -> Jet1 {
        st2(|c, d| self.gi(c, d) * self.g[0][c][d].du[i])
    }
    /// `g^{01} g_{01,i} + ½ g^{cd} g_{cd,i}`.
    fn log_det(&self, i: usize) -> Jet1 {
        self.gi01() * self.g[0][0][1].du[i] + self.trace(i) * 0.5
    }
    /// `g⁽⁰⁾_{01,ā} − g⁽¹⁾_{1a,θ}`.
    fn shear(&self, a: usize) -> Jet1 {
        self.bar(0, a, 0, 1) - self.th(1, 1, a)
    }
    /// `g_{bd,c̄} + g_{cd,b̄} − g_{bc,d̄}` of order `k`.
    fn tri(&self, k: usize, b: usize, c: usize, d: usize) -> Jet1 {
        self.bar(k, c, b, d) + self.bar(k, b, c, d) - self.bar(k, d, b, c)
    }
}

/// Whether a Ricci component of order index `o` (0 for `ε⁻⁴`, 1 for `ε⁻³`, 2 for `ε⁻²`)
/// is among those the block form allows to be nonzero.
pub fn ricci_may_be_nonzero(o: usize, a: usize, b: usize) -> bool {
    let (a, b) = (a.min(b), a.max(b));
    match o {
        0 => (a, b) == (0, 0),
        1 => a == 0 && b != 1,
        _ => a == 0 || a >= 2,
    }
}

/// Whether a connection entry `Γ^λ_{αβ}` of order index `o` (0, 1, 2 for `ε⁻²`, `ε⁻¹`, `ε⁰`)
/// appears in the component lists.
pub fn christoffel_may_be_nonzero(o: usize, l: usize, a: usize, b: usize) -> bool {
    let (a, b) = (a.min(b), a.max(b));
    let tr = |i: usize| i >= 2;
    match (o, l) {
        (0, 0) => (a, b) == (0, 0),
        (0, 1) => tr(a),
        (0, _) => a == 0 && tr(b),
        (1, 0) => a == 0 && tr(b),
        (1, 1) => (a == 1 && tr(b)) || tr(a),
        (1, _) => (a == 0 && b >= 1) || tr(a),
        (_, 0) => (a == 0 && b <= 1) || (a == 0 && tr(b)) || tr(a),
        (_, 1) => (a == 1 && b >= 1) || tr(a),
        _ => (a == 0 && b >= 1) || (a == 1 && tr(b)) || tr(a),
    }
}

fn sym_set(t: &mut Tensor3<f64>, l: usize, a: usize, b: usize, v: f64) {
    t[l][a][b] = v;
    t[l][b][a] = v;
}

/// Connection orders assembled from the component lists; unlisted entries are zero.
pub fn christoffel_lists(j: &MetricJets) -> Result<ChristoffelOrders, RicciError> {
    let p = Block::new(j)?;
    let z = [[[0.0; 4]; 4]; 4];
    let (mut m2, mut m1, mut z0) = (z, z, z);
    let gi01 = p.gi01();

    sym_set(&mut m2, 0, 0, 0, (gi01 * p.th(0, 0, 1)).re);
    for a in T {
        for b in T {
            sym_set(&mut m2, 1, a, b, (gi01 * p.th(0, a, b) * -0.5).re);
            sym_set(&mut m2, a, 0, b, (st(|c| p.gi(a, c) * p.th(0, b, c)) * 0.5).re);
        }
    }

    for a in T {
        let v = (gi01 * (p.bar(0, a, 0, 1) + p.th(1, 1, a))) * 0.5 - st(|b| p.g1up(0, b) * p.th(0, a, b)) * 0.5;
        sym_set(&mut m1, 0, 0, a, v.re);
        sym_set(&mut m1, 1, 1, a, (gi01 * p.shear(a) * 0.5).re);
        sym_set(&mut m1, a, 0, 1, (st(|c| p.gi(a, c) * p.shear(c)) * -0.5).re);
        for b in T {
            sym_set(&mut m1, 1, a, b, (gi01 * p.th(1, a, b) * -0.5).re);
            let v = st(|c| p.gi(a, c) * p.th(1, b, c) - p.g1up(a, c) * p.th(0, b, c)) * 0.5;
            sym_set(&mut m1, a, 0, b, v.re);
            for c in T {
                let v = st(|d| p.gi(a, d) * p.tri(0, b, c, d)) * 0.5 + p.g1up(0, a) * p.th(0, b, c) * 0.5;
                sym_set(&mut m1, a, b, c, v.re);
            }
        }
    }

    sym_set(&mut z0, 0, 0, 0, (gi01 * p.x(0, 0, 0, 1)).re);
    let v = st(|c| p.g1up(0, c) * (p.bar(0, c, 0, 1) - p.th(1, 1, c))) * 0.5 + gi01 * p.th(2, 1, 1) * 0.5;
    sym_set(&mut z0, 0, 0, 1, v.re);
    sym_set(&mut z0, 1, 1, 1, (gi01 * (p.x(0, 1, 0, 1) * 2.0 - p.th(2, 1, 1)) * 0.5).re);
    for a in T {
        let v = gi01 * (p.th(2, 1, a) + p.x(0, a, 0, 1)) * 0.5 - st(|c| p.g1up(0, c) * p.th(1, a, c)) * 0.5 + st(|c| p.h2(0, c) * p.th(0, a, c)) * 0.5;
        sym_set(&mut z0, 0, 0, a, v.re);
        sym_set(&mut z0, 1, 1, a, (gi01 * (p.x(0, a, 0, 1) - p.th(2, 1, a)) * 0.5).re);
        let v = st(|c| p.gi(a, c) * (p.th(2, 1, c) - p.x(0, c, 0, 1))) * 0.5 - st(|c| p.g1up(a, c) * (p.th(1, 1, c) - p.bar(0, c, 0, 1))) * 0.5;
        sym_set(&mut z0, a, 0, 1, v.re);
        for b in T {
            let v = gi01 * (p.bar(1, a, 1, b) + p.bar(1, b, 1, a) - p.x(0, 1, a, b)) * 0.5
                - st(|c| p.g1up(0, c) * (p.bar(0, a, b, c) + p.bar(0, b, a, c) - p.bar(0, c, a, b))) * 0.5
                - p.h2(0, 0) * p.th(0, a, b) * 0.5;
            sym_set(&mut z0, 0, a, b, v.re);
            sym_set(&mut z0, 1, a, b, (gi01 * (p.x(0, 0, a, b) + p.th(2, a, b)) * -0.5).re);
            let v = st(|c| p.gi(a, c) * (p.th(2, b, c) + p.x(0, 0, b, c))) * 0.5 - st(|c| p.g1up(a, c) * p.th(1, b, c)) * 0.5 + st(|c| p.h2(a, c) * p.th(0, b, c)) * 0.5;
            sym_set(&mut z0, a, 0, b, v.re);
            let v = st(|c| p.gi(a, c) * (p.x(0, 1, b, c) + p.bar(1, b, 1, c) - p.bar(1, c, 1, b))) * 0.5 - p.g1up(0, a) * (p.bar(0, b, 0, 1) - p.th(1, 1, b)) * 0.5;
            sym_set(&mut z0, a, 1, b, v.re);
            for c in T {
                let v = p.g1up(0, a) * p.th(1, b, c) * 0.5 - p.h2(0, a) * p.th(0, b, c) * 0.5 + st(|d| p.gi(a, d) * p.tri(1, b, c, d)) * 0.5
                    - st(|d| p.g1up(a, d) * p.tri(0, b, c, d)) * 0.5
                    + st(|d| p.gi(a, d) * (p.x(0, c, b, d) + p.x(0, b, c, d) - p.x(0, d, b, c))) * 0.5;
                sym_set(&mut z0, a, b, c, v.re);
            }
        }
    }
    Ok(ChristoffelOrders { minus2: m2, minus1: m1, zero: z0 })
}

fn r_star(p: &Block, a: usize, b: usize) -> f64 {
    let gi01 = p.gi01();
    let christ = |c: usize| st(|d| p.gi(c, d) * p.tri(0, a, b, d));
    let v = st(|c| christ(c).du[bar(c)].lift()) * 0.5 + st(|c| christ(c) * p.log_det(bar(c))) * 0.5
        - p.log_det(bar(a)).du[bar(b)].lift()
        - gi01 * p.bar(0, a, 0, 1) * gi01 * p.bar(0, b, 0, 1) * 0.5
        - st2(|c, d| st2(|e, f| p.gi(c, e) * p.tri(0, d, a, e) * p.gi(d, f) * p.tri(0, c, b, f))) * 0.25;
    v.re
}

trait Lift {
    fn lift(self) -> Jet1;
}

impl Lift for f64 {
    fn lift(self) -> Jet1 {
        Jet1::cst(self)
    }
}

/// The listed Ricci components.
pub fn ricci_lists(j: &MetricJets) -> Result<BlockRicci, RicciError> {
    let p = Block::new(j)?;
    let gi01 = p.gi01();
    let tr_th = p.trace(THETA);

    let r4_00 = (-tr_th.du[THETA] * 0.5) + (gi01 * p.th(0, 0, 1) * tr_th * 0.5).re - (st2(|a, b| st2(|c, d| p.gi(a, c) * p.th(0, b, c) * p.gi(b, d) * p.th(0, a, d))) * 0.25).re;

    let g1_trace2 = T.iter().fold(Jet2::zero(), |s, &a| T.iter().fold(s, |s, &b| s + p.gi2[a][b] * p.g[1][b][a]));
    let g1_trace_th = g1_trace2.du[THETA];
    let mixed_th = |c: usize, d: usize| {
        let m = T.iter().fold(Jet2::zero(), |s, &e| s + p.gi2[c][e] * p.g[1][e][d]);
        m.du[THETA]
    };
    let r3_00 = -g1_trace_th.du[THETA] * 0.5 + (gi01 * p.th(0, 0, 1) * g1_trace_th * 0.5).re - (st3(|b, c, d| p.gi(b, d) * p.th(0, b, c) * mixed_th(c, d)) * 0.5).re;

    let r3_0a = T.map(|a| {
        let q_th = st(|b| p.g(0, a, b) * gi01 * p.g1_mixed2(b).du[THETA]);
        let v = q_th.du[THETA].lift() * 0.5 + tr_th * q_th * 0.25 + st2(|b, c| (p.gi(b, c) * p.th(0, a, b)).du[bar(c)].lift()) * 0.5
            - (gi01 * p.bar(0, a, 0, 1) + p.trace(bar(a))).du[THETA].lift() * 0.5
            + st2(|b, c| p.gi(b, c) * p.th(0, a, b) * p.trace(bar(c))) * 0.25
            + gi01 * p.bar(0, a, 0, 1) * tr_th * 0.25
            - st2(|b, c| st2(|d, e| p.gi(b, d) * p.th(0, c, d) * p.gi(c, e) * p.bar(0, a, b, e))) * 0.25;
        v.re
    });

    let tr_x1 = p.trace(slow(1));
    let r2_01 = {
        let v = -(gi01 * p.x(0, 1, 0, 1) + tr_x1 * 0.5).du[THETA].lift()
            - st2(|a, b| st2(|c, d| p.gi(a, c) * p.th(0, b, c) * p.gi(b, d) * p.x(0, 1, a, d))) * 0.25
            + st(|a| p.shear(a) * p.g1up(0, a)).du[THETA].lift() * 0.5
            - st2(|a, b| (p.shear(a) * p.gi(a, b)).du[bar(b)].lift()) * 0.5
            + st(|a| p.shear(a) * (p.g1up(0, a) * tr_th - st(|b| p.gi(a, b) * p.trace(bar(b))))) * 0.25;
        v.re
    };

    let ld_th = p.log_det(THETA);
    let mut r2_ab = [[0.0; 2]; 2];
    let mut rs = [[0.0; 2]; 2];
    for (ia, a) in T.into_iter().enumerate() {
        for (ib, b) in T.into_iter().enumerate() {
            let star = r_star(&p, a, b);
            rs[ia][ib] = star;
            let gab_1th = p.g[0][a][b].du[slow(1)].du[THETA];
            let half_sym = |a: usize, b: usize| {
                let q = st(|c| gi01 * p.g(0, a, c) * p.g1_mixed2(c).du[bar(b)]);
                q.du[THETA].lift() * 0.5 + q * ld_th * 0.5
            };
            let cross = |a: usize, b: usize| {
                st2(|c, d| gi01 * p.gi(c, d) * p.th(0, a, c) * p.bar(1, d, 1, b)) * -0.5
                    + st3(|c, d, e| p.gi(c, d) * p.g1up(0, e) * p.th(0, a, c) * (p.bar(0, d, b, e) - p.bar(0, e, b, d))) * 0.5
            };
            let g1sq = st(|c| p.g1_zero(c) * p.g1up(0, c));
            let terms = [
                Jet1::cst(-gi01.re * gab_1th),
                gi01 * st2(|c, d| p.gi(c, d) * (p.th(0, a, c) * p.x(0, 1, b, d) + p.x(0, 1, a, c) * p.th(0, b, d))) * 0.5,
                -gi01 * st2(|c, d| p.gi(c, d) * (p.x(0, 1, c, d) * p.th(0, a, b) + p.th(0, c, d) * p.x(0, 1, a, b))) * 0.25,
                Jet1::cst(star),
                st(|c| (p.g1up(0, c) * p.th(0, a, b)).du[bar(c)].lift()) * 0.5,
                st(|c| p.g1up(0, c) * p.th(0, a, b) * p.log_det(bar(c))) * 0.5,
                st(|c| p.g1up(0, c) * p.bar(0, c, a, b)).du[THETA].lift() * 0.5,
                st(|c| p.g1up(0, c) * p.bar(0, c, a, b)) * ld_th * 0.5,
                half_sym(a, b),
                half_sym(b, a),
                cross(a, b),
                cross(b, a),
                -(g1sq * p.th(0, a, b)).du[THETA].lift() * 0.5,
                -g1sq * p.th(0, a, b) * ld_th * 0.5,
                g1sq * st2(|c, d| p.gi(c, d) * p.th(0, a, c) * p.th(0, b, d)) * 0.5,
                -gi01 * st(|c| p.g(0, a, c) * p.g1_mixed2(c).du[THETA]) * gi01 * st(|d| p.g(0, b, d) * p.g1_mixed2(d).du[THETA]) * 0.5,
            ];
            let v = terms.iter().fold(Jet1::zero(), |s, t| s + *t);
            r2_ab[ia][ib] = v.re;
        }
    }
    Ok(BlockRicci { r4_00, r3_00, r3_0a, r2_01, r2_ab, r_star: rs })
}
