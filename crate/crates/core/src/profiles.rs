//! Named analytic profiles f(θ, η, v), evaluable on any [`Real`].
//!
//! Scenario files reference these by `kind`. Composite kinds (`sum`, `product`,
//! `scaled`) build manufactured fields out of the primitive ones.

use serde::{Deserialize, Serialize};

use crate::dual::{seed2, Hessian, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum Profile {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `coeff · θ^p_theta · η^p_eta · v^p_v`
    Monomial {
        coeff: f64,
        #[serde(default)]
        p_theta: u32,
        #[serde(default)]
        p_eta: u32,
        #[serde(default)]
        p_v: u32,
    },
    /// `amplitude · cos(k_theta θ + k_eta η + k_v v + phase)`
    PlaneWave {
        amplitude: f64,
        #[serde(default)]
        k_theta: f64,
        #[serde(default)]
        k_eta: f64,
        #[serde(default)]
        k_v: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude · exp(−((θ−θc)/wθ)²) · exp(−((η−ηc)/wη)²)`; no η factor when `eta_width` is absent.
    Gaussian {
        amplitude: f64,
        theta_center: f64,
        theta_width: f64,
        #[serde(default)]
        eta_center: f64,
        #[serde(default)]
        eta_width: Option<f64>,
    },
    /// `scale · ln(offset + c_theta θ + c_eta η + c_v v)`
    LogLinear {
        scale: f64,
        offset: f64,
        #[serde(default)]
        c_theta: f64,
        #[serde(default)]
        c_eta: f64,
        #[serde(default)]
        c_v: f64,
    },
    /// `coeff · (offset + c_theta θ + c_eta η + c_v v)^exponent`
    Power {
        coeff: f64,
        offset: f64,
        #[serde(default)]
        c_theta: f64,
        #[serde(default)]
        c_eta: f64,
        #[serde(default)]
        c_v: f64,
        exponent: i32,
    },
    /// `θ·c0 / (1 + c0·v/2)`, the exact linear-in-θ Hunter–Saxton solution with Λ = 1.
    HsLinear {
        c0: f64,
    },
    Sum {
        terms: Vec<Profile>,
    },
    Product {
        factors: Vec<Profile>,
    },
    Scaled {
        factor: f64,
        profile: Box<Profile>,
    },
}

impl Profile {
    pub fn eval<R: Real>(&self, theta: R, eta: R, v: R) -> R {
        match self {
            Profile::Zero => R::zero(),
            Profile::Constant { value } => R::cst(*value),
            Profile::Monomial { coeff, p_theta, p_eta, p_v } => {
                theta.powi(*p_theta as i32) * eta.powi(*p_eta as i32) * v.powi(*p_v as i32) * *coeff
            }
            Profile::PlaneWave { amplitude, k_theta, k_eta, k_v, phase } => {
                (theta * *k_theta + eta * *k_eta + v * *k_v + *phase).cos() * *amplitude
            }
            Profile::Gaussian { amplitude, theta_center, theta_width, eta_center, eta_width } => {
                let s = (theta - *theta_center) / *theta_width;
                let mut arg = s * s;
                if let Some(w) = eta_width {
                    let r = (eta - *eta_center) / *w;
                    arg += r * r;
                }
                (-arg).exp() * *amplitude
            }
            Profile::LogLinear { scale, offset, c_theta, c_eta, c_v } => {
                (theta * *c_theta + eta * *c_eta + v * *c_v + *offset).ln() * *scale
            }
            Profile::Power { coeff, offset, c_theta, c_eta, c_v, exponent } => {
                (theta * *c_theta + eta * *c_eta + v * *c_v + *offset).powi(*exponent) * *coeff
            }
            Profile::HsLinear { c0 } => theta * *c0 / (v * (0.5 * c0) + 1.0),
            Profile::Sum { terms } => terms.iter().fold(R::zero(), |acc, t| acc + t.eval(theta, eta, v)),
            Profile::Product { factors } => factors.iter().fold(R::one(), |acc, t| acc * t.eval(theta, eta, v)),
            Profile::Scaled { factor, profile } => profile.eval(theta, eta, v) * *factor,
        }
    }

    pub fn value(&self, theta: f64, eta: f64, v: f64) -> f64 {
        self.eval(theta, eta, v)
    }

    /// Value, gradient and Hessian in (θ, η, v).
    pub fn jet(&self, theta: f64, eta: f64, v: f64) -> Hessian<3> {
        let [t, e, w] = seed2([theta, eta, v]);
        self.eval(t, e, w).into()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Profile::Scaled { factor, profile: Box::new(self) }
    }
}
