//! Multiple-scale expansion of the connection and Ricci tensor.
//!
//! A metric `g(θ, η², η³, x; ε) = g⁽⁰⁾ + ε g⁽¹⁾ + ε² g⁽²⁾` is differentiated with
//! `∂_μ = ε⁻² u_μ ∂_θ + ε⁻¹ y^a_μ ∂_{η^a} + ∂_μ` and its Christoffel symbols and
//! Ricci tensor are expanded order by order. The seven independent variables are
//! ordered `(θ, η², η³, x⁰, x¹, x², x³)`; exact first and second partials come from
//! nested dual numbers.
//!
//! * [`christoffel_orders`] and [`ricci_orders`] evaluate the general order formulas.
//! * [`block_lists`] evaluates the component lists specialised to the colliding-wave block form.
//! * [`oracle`] assembles the full metric at finite ε in double-double precision and
//!   extracts ε-coefficients by Richardson tables.
//! * [`verify`] bundles both into per-point reports.
//! * [`reduced`] compares the plane-polarized Ricci components with the reduced equations.

pub mod block_lists;
mod metrics;
pub mod oracle;
pub mod reduced;
pub mod verify;

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{seed2, Real, D1, D2};

pub use metrics::{random_phases, PlanePolarizedMetric, Structure, TrigMetric};

/// Number of independent variables `(θ, η², η³, x⁰, x¹, x², x³)`.
pub const NZ: usize = 7;
/// Slot of θ in a jet.
pub const THETA: usize = 0;

/// Jet slot of `∂/∂η^a` for a transverse index `a ∈ {2, 3}`.
#[inline]
pub const fn bar(a: usize) -> usize {
    a - 1
}

/// Jet slot of the slow derivative `∂/∂x^μ`.
#[inline]
pub const fn slow(mu: usize) -> usize {
    3 + mu
}

pub type Jet1 = D1<NZ>;
pub type Jet2 = D2<NZ>;
pub type Tensor2<T> = [[T; 4]; 4];
/// `t[λ][α][β]`, upper index first.
pub type Tensor3<T> = [[[T; 4]; 4]; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RicciError {
    #[error("leading-order metric g0 is singular at the point")]
    SingularMetric,
    #[error("metric evaluator returned a non-finite value at the point")]
    NonFinite,
    #[error("metric order {0} is not symmetric at the point")]
    Asymmetric(usize),
}

/// Evaluator of the three metric orders as second-order jets.
pub trait MetricOrders: Send + Sync {
    /// Covariant components of `g⁽order⁾`, `order ∈ {0, 1, 2}`, at the seeded jet point `z`.
    fn components(&self, order: usize, z: &[Jet2; NZ]) -> Tensor2<Jet2>;
}

/// Metric orders together with the constant phase gradients `u_μ` and `y^a_μ`.
#[derive(Clone, Debug)]
pub struct MetricExpansion<M> {
    pub metric: M,
    pub u: [f64; 4],
    /// `y[a − 2][μ] = y^a_μ`.
    pub y: [[f64; 4]; 2],
}

/// A point in `(θ, η², η³, x⁰..x³)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPoint {
    pub theta: f64,
    pub eta: [f64; 2],
    pub x: [f64; 4],
}

impl ExpansionPoint {
    pub fn coords(&self) -> [f64; NZ] {
        [self.theta, self.eta[0], self.eta[1], self.x[0], self.x[1], self.x[2], self.x[3]]
    }
}

/// The three metric orders, their inverse-free data and phase gradients evaluated at one point.
#[derive(Clone, Debug)]
pub struct MetricJets {
    pub g: [Tensor2<Jet2>; 3],
    pub u: [f64; 4],
    pub y: [[f64; 4]; 2],
}

impl<M: MetricOrders> MetricExpansion<M> {
    pub fn new(metric: M, u: [f64; 4], y: [[f64; 4]; 2]) -> Self {
        Self { metric, u, y }
    }

    /// Evaluates all orders at `point` and validates them.
    pub fn jets(&self, point: &ExpansionPoint) -> Result<MetricJets, RicciError> {
        let z = seed2(point.coords());
        let g = [0, 1, 2].map(|k| self.metric.components(k, &z));
        for (k, gk) in g.iter().enumerate() {
            for a in 0..4 {
                for b in 0..4 {
                    let (p, q) = (&gk[a][b], &gk[b][a]);
                    if !finite_jet(p) {
                        return Err(RicciError::NonFinite);
                    }
                    if p != q {
                        return Err(RicciError::Asymmetric(k));
                    }
                }
            }
        }
        let jets = MetricJets { g, u: self.u, y: self.y };
        jets.inverse()?;
        Ok(jets)
    }
}

fn finite_jet(x: &Jet2) -> bool {
    x.re.re.is_finite() && x.re.du.iter().all(|d| d.is_finite()) && x.du.iter().all(|d| d.re.is_finite() && d.du.iter().all(|e| e.is_finite()))
}

/// Gauss–Jordan inverse of a 4×4 matrix with partial pivoting on `mag`.
pub(crate) fn invert4<T>(m: &Tensor2<T>, zero: T, one: T, mag: impl Fn(&T) -> f64) -> Option<Tensor2<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let scale = m.iter().flatten().map(&mag).fold(0.0f64, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    let mut a = *m;
    let mut inv = [[zero; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = one;
    }
    for col in 0..4 {
        let p = (col..4).max_by(|&i, &j| mag(&a[i][col]).total_cmp(&mag(&a[j][col]))).unwrap_or(col);
        if mag(&a[p][col]) <= 1e-13 * scale {
            return None;
        }
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] = a[col][k] / d;
            inv[col][k] = inv[col][k] / d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for k in 0..4 {
                    a[r][k] = a[r][k] - f * a[col][k];
                    inv[r][k] = inv[r][k] - f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

impl MetricJets {
    /// `g⁽⁰⁾` inverse as second-order jets.
    pub fn inverse(&self) -> Result<Tensor2<Jet2>, RicciError> {
        invert4(&self.g[0], Jet2::zero(), Jet2::one(), |x| x.re().abs()).ok_or(RicciError::SingularMetric)
    }

    /// Values of order `k` carrying their first partials.
    fn value(&self, k: usize) -> Tensor2<Jet1> {
        map2(|a, b| self.g[k][a][b].re)
    }

    /// Partial `∂_i g⁽ᵏ⁾` carrying its own first partials.
    fn partial(&self, k: usize, i: usize) -> Tensor2<Jet1> {
        map2(|a, b| self.g[k][a][b].du[i])
    }
}

pub(crate) fn map2<T>(f: impl Fn(usize, usize) -> T) -> Tensor2<T> {
    std::array::from_fn(|a| std::array::from_fn(|b| f(a, b)))
}

pub(crate) fn map3<T>(f: impl Fn(usize, usize, usize) -> T) -> Tensor3<T> {
    std::array::from_fn(|l| std::array::from_fn(|a| std::array::from_fn(|b| f(l, a, b))))
}

fn sum4<T: Real>(f: impl Fn(usize) -> T) -> T {
    (0..4).fold(T::zero(), |acc, m| acc + f(m))
}

/// `h^{αμ} h^{βν} t_{μν}`.
fn raise<T: Real>(h: &Tensor2<T>, t: &Tensor2<T>) -> Tensor2<T> {
    map2(|a, b| sum4(|m| sum4(|n| h[a][m] * h[b][n] * t[m][n])))
}

/// `d_{βμ} w_α + d_{αμ} w_β − d_{αβ} w_μ` stored as `[μ][α][β]`.
fn bracket(d: &Tensor2<Jet1>, w: &[f64; 4]) -> Tensor3<Jet1> {
    map3(|m, a, b| d[b][m] * w[a] + d[a][m] * w[b] - d[a][b] * w[m])
}

/// `g_{βμ,α} + g_{αμ,β} − g_{αβ,μ}` from the four slow partials.
fn slow_bracket(ds: &[Tensor2<Jet1>; 4]) -> Tensor3<Jet1> {
    map3(|m, a, b| ds[a][b][m] + ds[b][a][m] - ds[m][a][b])
}

fn add3(x: &Tensor3<Jet1>, y: &Tensor3<Jet1>) -> Tensor3<Jet1> {
    map3(|l, a, b| x[l][a][b] + y[l][a][b])
}

/// `c · h^{λμ} b_{μαβ}`.
fn contract(h: &Tensor2<Jet1>, b: &Tensor3<Jet1>, c: f64) -> Tensor3<Jet1> {
    map3(|l, a, bb| sum4(|m| h[l][m] * b[m][a][bb]) * c)
}

/// The three connection orders as jets, so their partials are available to the Ricci orders.
#[derive(Clone, Debug)]
pub struct ChristoffelJets {
    pub minus2: Tensor3<Jet1>,
    pub minus1: Tensor3<Jet1>,
    pub zero: Tensor3<Jet1>,
}

/// Coefficients of `ε⁻²`, `ε⁻¹`, `ε⁰` in `Γ^λ_{αβ}`, indexed `[λ][α][β]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelOrders {
    pub minus2: Tensor3<f64>,
    pub minus1: Tensor3<f64>,
    pub zero: Tensor3<f64>,
}

/// Coefficients of `ε⁻⁴`, `ε⁻³`, `ε⁻²` in `R_{αβ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciOrders {
    pub r4: Tensor2<f64>,
    pub r3: Tensor2<f64>,
    pub r2: Tensor2<f64>,
}

impl ChristoffelJets {
    pub fn values(&self) -> ChristoffelOrders {
        let re = |t: &Tensor3<Jet1>| map3(|l, a, b| t[l][a][b].re);
        ChristoffelOrders { minus2: re(&self.minus2), minus1: re(&self.minus1), zero: re(&self.zero) }
    }
}

pub fn christoffel_jets(j: &MetricJets) -> Result<ChristoffelJets, RicciError> {
    let gi2 = j.inverse()?;
    let gi = map2(|a, b| gi2[a][b].re);
    let g1 = j.value(1);
    let g2 = j.value(2);
    let g1up = raise(&gi, &g1);
    let g2up = raise(&gi, &g2);
    let g0 = j.value(0);
    let h2 = map2(|a, b| -(g2up[a][b] - sum4(|m| sum4(|n| g0[m][n] * g1up[a][m] * g1up[b][n]))));

    let th = |k: usize| bracket(&j.partial(k, THETA), &j.u);
    let trans = |k: usize| {
        let b2 = bracket(&j.partial(k, bar(2)), &j.y[0]);
        let b3 = bracket(&j.partial(k, bar(3)), &j.y[1]);
        add3(&b2, &b3)
    };
    let slow0 = slow_bracket(&std::array::from_fn(|m| j.partial(0, slow(m))));

    let th0 = th(0);
    let minus2 = contract(&gi, &th0, 0.5);

    let minus1 = add3(&contract(&gi, &add3(&trans(0), &th(1)), 0.5), &contract(&g1up, &th0, -0.5));

    let inner0 = add3(&add3(&slow0, &trans(1)), &th(2));
    let inner1 = add3(&trans(0), &th(1));
    let zero = add3(&add3(&contract(&gi, &inner0, 0.5), &contract(&g1up, &inner1, -0.5)), &contract(&h2, &th0, 0.5));
    Ok(ChristoffelJets { minus2, minus1, zero })
}

/// The general connection order formulas at `point`.
pub fn christoffel_orders<M: MetricOrders>(metric: &MetricExpansion<M>, point: &ExpansionPoint) -> Result<ChristoffelOrders, RicciError> {
    Ok(christoffel_jets(&metric.jets(point)?)?.values())
}

/// `G^μ_{αβ,i} w_μ − G^μ_{βμ,i} w_α`.
fn divergence(g: &Tensor3<Jet1>, i: usize, w: &[f64; 4]) -> Tensor2<f64> {
    map2(|a, b| (0..4).map(|m| g[m][a][b].du[i] * w[m] - g[m][b][m].du[i] * w[a]).sum())
}

/// `G^μ_{αβ,μ} − G^μ_{βμ,α}` in the slow variables.
fn slow_divergence(g: &Tensor3<Jet1>) -> Tensor2<f64> {
    map2(|a, b| (0..4).map(|m| g[m][a][b].du[slow(m)] - g[m][b][m].du[slow(a)]).sum())
}

/// `A^μ_{αβ} B^ν_{μν} − A^μ_{αν} B^ν_{βμ}`.
fn product(x: &Tensor3<Jet1>, y: &Tensor3<Jet1>) -> Tensor2<f64> {
    map2(|a, b| {
        let mut s = 0.0;
        for m in 0..4 {
            for n in 0..4 {
                s += x[m][a][b].re * y[n][m][n].re - x[m][a][n].re * y[n][b][m].re;
            }
        }
        s
    })
}

fn sum_all(parts: &[Tensor2<f64>]) -> Tensor2<f64> {
    map2(|a, b| parts.iter().map(|p| p[a][b]).sum())
}

pub fn ricci_from_jets(j: &MetricJets, c: &ChristoffelJets) -> RicciOrders {
    let trans = |g: &Tensor3<Jet1>| sum_all(&[divergence(g, bar(2), &j.y[0]), divergence(g, bar(3), &j.y[1])]);
    let r4 = sum_all(&[divergence(&c.minus2, THETA, &j.u), product(&c.minus2, &c.minus2)]);
    let r3 = sum_all(&[divergence(&c.minus1, THETA, &j.u), trans(&c.minus2), product(&c.minus2, &c.minus1), product(&c.minus1, &c.minus2)]);
    let r2 = sum_all(&[
        divergence(&c.zero, THETA, &j.u),
        trans(&c.minus1),
        slow_divergence(&c.minus2),
        product(&c.minus2, &c.zero),
        product(&c.zero, &c.minus2),
        product(&c.minus1, &c.minus1),
    ]);
    RicciOrders { r4, r3, r2 }
}

/// The general Ricci order formulas at `point`.
pub fn ricci_orders<M: MetricOrders>(metric: &MetricExpansion<M>, point: &ExpansionPoint) -> Result<RicciOrders, RicciError> {
    let j = metric.jets(point)?;
    let c = christoffel_jets(&j)?;
    Ok(ricci_from_jets(&j, &c))
}

/// Largest `|t_{αβ} − t_{βα}|`.
pub fn asymmetry(t: &Tensor2<f64>) -> f64 {
    let mut m = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            m = m.max((t[a][b] - t[b][a]).abs());
        }
    }
    m
}
