//! Forward-mode dual numbers and a double-double accumulator.
//!
//! [`Dual`] carries a value and `N` first partials. Nesting `Dual<Dual<f64, N>, N>`
//! yields exact second partials, which is how analytic profiles and metric
//! evaluators are differentiated to the orders the verifiers need.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar field usable by generic analytic code: `f64` or any nesting of [`Dual`].
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(x: f64) -> Self;
    /// Innermost real value.
    fn re(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn re(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Value plus `N` directional derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub re: T,
    pub du: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    pub fn constant(re: T) -> Self {
        Self { re, du: [T::zero(); N] }
    }

    /// Independent variable `k` with value `re`.
    pub fn var(re: T, k: usize) -> Self {
        let mut du = [T::zero(); N];
        du[k] = T::one();
        Self { re, du }
    }

    fn chain(self, f: T, df: T) -> Self {
        let mut du = self.du;
        for d in du.iter_mut() {
            *d *= df;
        }
        Self { re: f, du }
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.re += o.re;
        for k in 0..N {
            self.du[k] += o.du[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.re -= o.re;
        for k in 0..N {
            self.du[k] -= o.du[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut du = [T::zero(); N];
        for k in 0..N {
            du[k] = self.du[k] * o.re + self.re * o.du[k];
        }
        Self { re: self.re * o.re, du }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        let mut du = [T::zero(); N];
        for k in 0..N {
            du[k] = (self.du[k] - q * o.du[k]) * inv;
        }
        Self { re: q, du }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for d in self.du.iter_mut() {
            *d = -*d;
        }
        self
    }
}

impl<T: Real, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.re = self.re + o;
        self
    }
}

impl<T: Real, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.re = self.re - o;
        self
    }
}

impl<T: Real, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        self.re = self.re * o;
        for d in self.du.iter_mut() {
            *d = *d * o;
        }
        self
    }
}

impl<T: Real, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<T: Real, const N: usize> AddAssign for Dual<T, N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real, const N: usize> SubAssign for Dual<T, N> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real, const N: usize> MulAssign for Dual<T, N> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        let r = self.re.recip();
        self.chain(self.re.ln(), r)
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.re.powi(n), self.re.powi(n - 1) * (n as f64)),
        }
    }
}

/// First-order jet in `N` variables.
pub type D1<const N: usize> = Dual<f64, N>;
/// Second-order jet in `N` variables (nested first-order duals).
pub type D2<const N: usize> = Dual<Dual<f64, N>, N>;

/// Seeds `x` as the independent variables of a second-order jet.
pub fn seed2<const N: usize>(x: [f64; N]) -> [D2<N>; N] {
    std::array::from_fn(|k| Dual {
        re: Dual::var(x[k], k),
        du: std::array::from_fn(|l| if l == k { Dual::constant(1.0) } else { Dual::constant(0.0) }),
    })
}

/// Seeds `x` as the independent variables of a first-order jet.
pub fn seed1<const N: usize>(x: [f64; N]) -> [D1<N>; N] {
    std::array::from_fn(|k| Dual::var(x[k], k))
}

/// Value, gradient and Hessian pulled out of a second-order jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hessian<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> From<D2<N>> for Hessian<N> {
    fn from(d: D2<N>) -> Self {
        Self {
            value: d.re.re,
            grad: d.re.du,
            hess: std::array::from_fn(|k| d.du[k].du),
        }
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, about 106 bits of precision.
///
/// Only the four arithmetic operations are provided; the brute-force
/// Ricci oracle needs nothing else.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_chain_rule() {
        let [x, y] = seed1([0.3, -1.2]);
        let f = x.sin() * y.exp() + x / y;
        let (xv, yv) = (0.3f64, -1.2f64);
        assert!((f.re - (xv.sin() * yv.exp() + xv / yv)).abs() < 1e-15);
        assert!((f.du[0] - (xv.cos() * yv.exp() + 1.0 / yv)).abs() < 1e-14);
        assert!((f.du[1] - (xv.sin() * yv.exp() - xv / (yv * yv))).abs() < 1e-14);
    }

    #[test]
    fn nested_duals_give_exact_hessian() {
        let [x, y] = seed2([0.7, 0.2]);
        let f: Hessian<2> = (x * x * y + (x * y).cos()).into();
        let (xv, yv) = (0.7f64, 0.2f64);
        let c = (xv * yv).cos();
        let s = (xv * yv).sin();
        assert!((f.hess[0][0] - (2.0 * yv - yv * yv * c)).abs() < 1e-14);
        assert!((f.hess[0][1] - (2.0 * xv - s - xv * yv * c)).abs() < 1e-14);
        assert_eq!(f.hess[0][1], f.hess[1][0]);
        assert!((f.hess[1][1] + xv * xv * c).abs() < 1e-14);
    }

    #[test]
    fn powi_sqrt_ln() {
        let [x] = seed2([1.5]);
        let f: Hessian<1> = (x.powi(3) + x.sqrt() + x.ln()).into();
        let xv = 1.5f64;
        let d2 = 6.0 * xv - 0.25 * xv.powf(-1.5) - 1.0 / (xv * xv);
        assert!((f.hess[0][0] - d2).abs() < 1e-13);
    }

    #[test]
    fn double_double_resolves_below_f64_epsilon() {
        let one = DoubleDouble::new(1.0);
        let tiny = DoubleDouble::new(1e-20);
        let s = (one + tiny) - one;
        assert!((s.to_f64() - 1e-20).abs() < 1e-35);
        let third = one / DoubleDouble::new(3.0);
        let back = third * DoubleDouble::new(3.0) - one;
        assert!(back.to_f64().abs() < 1e-31);
    }
}
