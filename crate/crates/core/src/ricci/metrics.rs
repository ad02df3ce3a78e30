use rand::Rng;

use super::{map2, Jet2, MetricExpansion, MetricOrders, Tensor2, NZ};
use crate::dual::Real;
use crate::profiles::Profile;

/// The plane-polarized metric
/// `−2e^{−M}(du − εY dy − ½ε²T dv)dv + e^{−U}(e^V dy² + e^{−V} dz²)`
/// in coordinates `(u, v, y, z)`, with fields of `(θ, η², v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanePolarizedMetric {
    pub u: Profile,
    pub v: Profile,
    pub m: Profile,
    pub y: Profile,
    pub t: Profile,
}

impl PlanePolarizedMetric {
    /// Phase `u = x⁰` and transverse variables `y^a = x^a`.
    pub fn expansion(self) -> MetricExpansion<Self> {
        MetricExpansion::new(self, [1.0, 0.0, 0.0, 0.0], [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    }

    /// Fields that are sums of two random plane waves in `(θ, η, v)`.
    pub fn random(rng: &mut impl Rng, with_t: bool) -> Self {
        let mut field = |amp: f64| Profile::Sum {
            terms: (0..2)
                .map(|_| Profile::PlaneWave {
                    amplitude: amp * rng.random_range(-1.0..1.0),
                    k_theta: rng.random_range(-2.0..2.0),
                    k_eta: rng.random_range(-2.0..2.0),
                    k_v: rng.random_range(-2.0..2.0),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                })
                .collect(),
        };
        let (u, v, m, y) = (field(0.4), field(0.4), field(0.4), field(0.4));
        let t = if with_t { field(0.4) } else { Profile::Zero };
        Self { u, v, m, y, t }
    }
}

impl MetricOrders for PlanePolarizedMetric {
    fn components(&self, order: usize, z: &[Jet2; NZ]) -> Tensor2<Jet2> {
        let (th, eta, v) = (z[0], z[1], z[4]);
        let f = |p: &Profile| p.eval(th, eta, v);
        let zero = Jet2::zero();
        let mut g = [[zero; 4]; 4];
        let em = (-f(&self.m)).exp();
        match order {
            0 => {
                let (u, vv) = (f(&self.u), f(&self.v));
                g[0][1] = -em;
                g[1][0] = -em;
                g[2][2] = (vv - u).exp();
                g[3][3] = (-u - vv).exp();
            }
            1 => {
                let w = em * f(&self.y);
                g[1][2] = w;
                g[2][1] = w;
            }
            2 => g[1][1] = em * f(&self.t),
            _ => {}
        }
        g
    }
}

/// Which components a random [`TrigMetric`] may populate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// Every component of every order.
    General,
    /// Colliding-wave block form: `g⁽⁰⁾` has only `01` and `ab`, `g⁽¹⁾` only `1a` and `ab`,
    /// `g⁽²⁾` only `ij` with `i, j ≥ 1`.
    Block,
}

impl Structure {
    fn allows(self, order: usize, a: usize, b: usize) -> bool {
        let (a, b) = (a.min(b), a.max(b));
        match self {
            Structure::General => true,
            Structure::Block => match order {
                0 => (a, b) == (0, 1) || a >= 2,
                1 => (a == 1 && b >= 2) || a >= 2,
                _ => a >= 1,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct TrigTerm {
    amplitude: f64,
    k: [f64; NZ],
    phase: f64,
}

/// Smooth random metric orders: constant background plus a few trigonometric modes per component.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMetric {
    base: [Tensor2<f64>; 3],
    terms: [Tensor2<Vec<TrigTerm>>; 3],
}

impl TrigMetric {
    /// The leading order is a bounded perturbation of a Lorentzian background, so it stays invertible.
    pub fn random(rng: &mut impl Rng, structure: Structure) -> Self {
        let background: Tensor2<f64> = match structure {
            Structure::General => map2(|a, b| if a != b { 0.0 } else if a == 0 { -1.0 } else { 1.0 }),
            Structure::Block => map2(|a, b| match (a.min(b), a.max(b)) {
                (0, 1) => -1.0,
                (2, 2) | (3, 3) => 1.0,
                _ => 0.0,
            }),
        };
        let mut base = [background, [[0.0; 4]; 4], [[0.0; 4]; 4]];
        let mut terms: [Tensor2<Vec<TrigTerm>>; 3] = Default::default();
        for order in 0..3 {
            let amp = if order == 0 { 0.06 } else { 0.5 };
            for a in 0..4 {
                for b in a..4 {
                    if !structure.allows(order, a, b) {
                        continue;
                    }
                    if order > 0 {
                        base[order][a][b] = rng.random_range(-0.5..0.5);
                        base[order][b][a] = base[order][a][b];
                    }
                    let t: Vec<TrigTerm> = (0..2)
                        .map(|_| TrigTerm {
                            amplitude: amp * rng.random_range(-1.0..1.0),
                            k: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
                            phase: rng.random_range(0.0..std::f64::consts::TAU),
                        })
                        .collect();
                    terms[order][b][a] = t.clone();
                    terms[order][a][b] = t;
                }
            }
        }
        Self { base, terms }
    }
}

impl MetricOrders for TrigMetric {
    fn components(&self, order: usize, z: &[Jet2; NZ]) -> Tensor2<Jet2> {
        if order > 2 {
            return [[Jet2::zero(); 4]; 4];
        }
        map2(|a, b| {
            self.terms[order][a][b].iter().fold(Jet2::cst(self.base[order][a][b]), |acc, t| {
                let arg = (0..NZ).fold(Jet2::cst(t.phase), |s, i| s + z[i] * t.k[i]);
                acc + arg.cos() * t.amplitude
            })
        })
    }
}

/// Random phase gradients for general-structure tests.
pub fn random_phases(rng: &mut impl Rng) -> ([f64; 4], [[f64; 4]; 2]) {
    let mut v = || std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    (v(), [v(), v()])
}
