//! Genuine-nonlinearity classification of variational wave systems
//! `δ∫ A^{αβ}_{pq}(g) g^p_α g^q_β dx = 0`.
//!
//! Coefficient derivatives `∂A/∂g^p` and the x-derivatives in the transport
//! coefficient use forward-mode duals, so no finite differencing is involved.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{Dual, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension { what: &'static str, got: usize, expected: usize },
    #[error("phase gradient du is zero")]
    ZeroCovector,
    #[error("null-space basis is empty")]
    EmptyBasis,
    #[error("no characteristic samples: all {0} samples were rejected")]
    NoCharacteristicSamples(usize),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
}

/// Coefficients `A^{αβ}_{pq}(g)` of a variational wave system in `dim` space-time
/// dimensions (`d + 1`) with `fields` unknowns.
pub trait VariationalSystem: Sync {
    fn spacetime_dim(&self) -> usize;
    fn fields(&self) -> usize;
    /// `A^{αβ}_{pq}(g)`, symmetric under `α ↔ β` and `p ↔ q`.
    fn coefficient<R: Real>(&self, g: &[R], alpha: usize, beta: usize, p: usize, q: usize) -> R;

    /// `∂A^{αβ}_{qr}/∂g^p`; the default differentiates [`Self::coefficient`] with a dual number.
    fn coefficient_derivative(&self, g: &[f64], p: usize, alpha: usize, beta: usize, q: usize, r: usize) -> f64 {
        let gd: Vec<Dual<f64, 1>> = g.iter().enumerate().map(|(s, &x)| if s == p { Dual::var(x, 0) } else { Dual::constant(x) }).collect();
        self.coefficient(&gd, alpha, beta, q, r).du[0]
    }
}

/// Smooth background field `g0(x)`.
pub trait FieldEvaluator: Sync {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R>;
}

/// `g^p(x) = value[p] + Σ_α gradient[p][α] x^α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineField {
    pub value: Vec<f64>,
    pub gradient: Vec<Vec<f64>>,
}

impl FieldEvaluator for AffineField {
    fn eval<R: Real>(&self, x: &[R]) -> Vec<R> {
        self.value
            .iter()
            .zip(&self.gradient)
            .map(|(&v, row)| row.iter().zip(x).fold(R::cst(v), |s, (&c, &xa)| s + xa * c))
            .collect()
    }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), ClassifyError> {
    if got == expected {
        Ok(())
    } else {
        Err(ClassifyError::Dimension { what, got, expected })
    }
}

/// Largest violation of `A^{αβ}_{pq} = A^{βα}_{pq} = A^{αβ}_{qp}` at `g`.
pub fn symmetry_defect<S: VariationalSystem>(sys: &S, g: &[f64]) -> f64 {
    let (n, m) = (sys.spacetime_dim(), sys.fields());
    let mut d = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for p in 0..m {
                for q in 0..m {
                    let x: f64 = sys.coefficient(g, a, b, p, q);
                    d = d.max((x - sys.coefficient(g, b, a, p, q)).abs()).max((x - sys.coefficient(g, a, b, q, p)).abs());
                }
            }
        }
    }
    d
}

/// `C_{pq} = u_α u_β A^{αβ}_{pq}(g0)`.
pub fn eikonal_matrix<S: VariationalSystem>(sys: &S, g0: &[f64], du: &[f64]) -> Result<DMatrix<f64>, ClassifyError> {
    let (n, m) = (sys.spacetime_dim(), sys.fields());
    check_len("g0", g0.len(), m)?;
    check_len("du", du.len(), n)?;
    if du.iter().all(|x| *x == 0.0) {
        return Err(ClassifyError::ZeroCovector);
    }
    Ok(DMatrix::from_fn(m, m, |p, q| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += du[a] * du[b] * sys.coefficient(g0, a, b, p, q);
            }
        }
        s
    }))
}

/// Eikonal matrix with its numerical kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicData {
    pub c: Vec<Vec<f64>>,
    /// Orthonormal kernel vectors, each signed so its largest-magnitude entry is positive.
    pub null_basis: Vec<Vec<f64>>,
    pub multiplicity: usize,
}

/// Default relative kernel threshold.
pub const DEFAULT_KERNEL_TOLERANCE: f64 = 1e-8;

/// Eigenvectors of the symmetric matrix `C` whose eigenvalues satisfy `|λ| ≤ tolerance · max|λ|`;
/// every direction is in the kernel of the zero matrix.
pub fn null_space(c: &DMatrix<f64>, tolerance: f64) -> CharacteristicData {
    null_space_scaled(c, tolerance, 0.0)
}

/// As [`null_space`] with the threshold `tolerance · max(max|λ|, reference)`.
pub fn null_space_scaled(c: &DMatrix<f64>, tolerance: f64, reference: f64) -> CharacteristicData {
    let m = c.nrows();
    let sym = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let norm = eig.eigenvalues.iter().fold(reference, |s, x| s.max(x.abs()));
    let mut basis = Vec::new();
    for k in 0..m {
        if eig.eigenvalues[k].abs() <= tolerance * norm || norm == 0.0 {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            basis.push(v);
        }
    }
    let rows = (0..m).map(|i| (0..m).map(|j| c[(i, j)]).collect()).collect();
    CharacteristicData { c: rows, multiplicity: basis.len(), null_basis: basis }
}

/// `Λ_{ijk}` flattened as `values[(i·n + j)·n + k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaTensor {
    pub n: usize,
    pub values: Vec<f64>,
}

impl LambdaTensor {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Largest `Σ_{αβ} |u_α u_β A^{αβ}_{pq}(g0)|`, the size of `C` before cancellation.
pub fn eikonal_scale<S: VariationalSystem>(sys: &S, g0: &[f64], du: &[f64]) -> f64 {
    let (n, m) = (sys.spacetime_dim(), sys.fields());
    let mut best = 0.0f64;
    for p in 0..m {
        for q in 0..m {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += (du[a] * du[b] * sys.coefficient(g0, a, b, p, q)).abs();
                }
            }
            best = best.max(s);
        }
    }
    best
}

/// `Λ_{ijk} = u_α u_β ∂A^{αβ}_{qr}/∂g^p(g0) R_i^p R_j^q R_k^r`.
pub fn lambda_tensor<S: VariationalSystem>(sys: &S, g0: &[f64], du: &[f64], basis: &[Vec<f64>]) -> Result<LambdaTensor, ClassifyError> {
    let (dim, m) = (sys.spacetime_dim(), sys.fields());
    check_len("g0", g0.len(), m)?;
    check_len("du", du.len(), dim)?;
    if basis.is_empty() {
        return Err(ClassifyError::EmptyBasis);
    }
    for r in basis {
        check_len("null vector", r.len(), m)?;
    }
    // h[p][q][r] = u_α u_β ∂A^{αβ}_{qr}/∂g^p
    let mut h = vec![0.0; m * m * m];
    for p in 0..m {
        for q in 0..m {
            for r in q..m {
                let mut s = 0.0;
                for a in 0..dim {
                    for b in 0..dim {
                        if du[a] != 0.0 && du[b] != 0.0 {
                            s += du[a] * du[b] * sys.coefficient_derivative(g0, p, a, b, q, r);
                        }
                    }
                }
                h[(p * m + q) * m + r] = s;
                h[(p * m + r) * m + q] = s;
            }
        }
    }
    let n = basis.len();
    let mut values = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for p in 0..m {
                    for q in 0..m {
                        for r in 0..m {
                            s += h[(p * m + q) * m + r] * basis[i][p] * basis[j][q] * basis[k][r];
                        }
                    }
                }
                values[(i * n + j) * n + k] = s;
            }
        }
    }
    Ok(LambdaTensor { n, values })
}

/// Ray direction and linear transport coefficient at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportCoefficients {
    /// Components of `∂_v = 2u_β A^{αβ}_{pq}(g0) R^p R^q ∂_α`.
    pub ray: Vec<f64>,
    /// `∂_α{u_β A^{αβ}_{pq}(g0(x)) R^p R^q}`, the coefficient obtained by linearizing the
    /// Euler–Lagrange operator; it reduces to `½{u_tt − ∇·(c0²∇u)}` for the scalar wave.
    pub n: f64,
    /// `n − u_α ∂A^{αβ}_{qr}/∂g^p(g0) ∂_β g0^r R^p R^q`.
    pub n_displayed: f64,
}

/// Transport coefficients for a constant phase gradient `du` and a fixed null vector `r`.
pub fn transport_coefficients<S: VariationalSystem, F: FieldEvaluator>(sys: &S, g0: &F, du: &[f64], r: &[f64], x: &[f64]) -> Result<TransportCoefficients, ClassifyError> {
    let (dim, m) = (sys.spacetime_dim(), sys.fields());
    check_len("du", du.len(), dim)?;
    check_len("x", x.len(), dim)?;
    check_len("null vector", r.len(), m)?;
    let gx = g0.eval(x);
    check_len("g0(x)", gx.len(), m)?;

    let ray = (0..dim)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..dim {
                for p in 0..m {
                    for q in 0..m {
                        s += 2.0 * du[b] * sys.coefficient(&gx, a, b, p, q) * r[p] * r[q];
                    }
                }
            }
            s
        })
        .collect();

    let mut n = 0.0;
    let mut grad_g0 = vec![vec![0.0; dim]; m];
    for a in 0..dim {
        let xd: Vec<Dual<f64, 1>> = x.iter().enumerate().map(|(k, &v)| if k == a { Dual::var(v, 0) } else { Dual::constant(v) }).collect();
        let gd = g0.eval(&xd);
        for (p, gp) in gd.iter().enumerate() {
            grad_g0[p][a] = gp.du[0];
        }
        let mut s = Dual::<f64, 1>::constant(0.0);
        for b in 0..dim {
            for p in 0..m {
                for q in 0..m {
                    s += sys.coefficient(&gd, a, b, p, q) * (du[b] * r[p] * r[q]);
                }
            }
        }
        n += s.du[0];
    }
    let mut extra = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            for p in 0..m {
                for q in 0..m {
                    for rr in 0..m {
                        extra += du[a] * sys.coefficient_derivative(&gx, p, a, b, q, rr) * grad_g0[rr][b] * r[p] * r[q];
                    }
                }
            }
        }
    }
    Ok(TransportCoefficients { ray, n, n_displayed: n - extra })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LinearlyDegenerate,
    GenuinelyNonlinearCandidate,
    /// Samples neither refute nor support a uniform claim.
    Indeterminate,
}

/// Background states and covectors to test. Every `du` is paired with every `g0`;
/// each `wave_vector` `k` is completed to the characteristic covectors `(u_0, k)` of each `g0`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub g0: Vec<Vec<f64>>,
    #[serde(default)]
    pub du: Vec<Vec<f64>>,
    #[serde(default)]
    pub wave_vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    pub kernel_tolerance: f64,
    /// Absolute threshold below which `|Λ|` counts as zero.
    pub lambda_tolerance: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { kernel_tolerance: DEFAULT_KERNEL_TOLERANCE, lambda_tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub g0: Vec<f64>,
    pub du: Vec<f64>,
    pub multiplicity: usize,
    pub max_abs_lambda: f64,
    /// `|Λ|` for simple characteristics.
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedSample {
    pub g0: Vec<f64>,
    pub du: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub samples: Vec<SampleResult>,
    pub rejected: Vec<RejectedSample>,
    pub min_abs_lambda: f64,
    pub max_abs_lambda: f64,
}

/// Real `u_0` making `(u_0, k)` characteristic at `g0`: the real eigenvalues of the quadratic
/// pencil `u_0² A⁰⁰ + u_0 B + K`, found from its companion linearization.
pub fn characteristic_frequencies<S: VariationalSystem>(sys: &S, g0: &[f64], k: &[f64]) -> Result<Vec<f64>, ClassifyError> {
    let (dim, m) = (sys.spacetime_dim(), sys.fields());
    check_len("g0", g0.len(), m)?;
    check_len("wave vector", k.len(), dim - 1)?;
    let a00 = DMatrix::from_fn(m, m, |p, q| sys.coefficient(g0, 0, 0, p, q));
    let b = DMatrix::from_fn(m, m, |p, q| (1..dim).map(|i| 2.0 * k[i - 1] * sys.coefficient(g0, 0, i, p, q)).sum());
    let kk = DMatrix::from_fn(m, m, |p, q| {
        let mut s = 0.0;
        for i in 1..dim {
            for j in 1..dim {
                s += k[i - 1] * k[j - 1] * sys.coefficient(g0, i, j, p, q);
            }
        }
        s
    });
    let inv = a00.try_inverse().ok_or_else(|| ClassifyError::InvalidSystem("A^00 is singular; time is characteristic".into()))?;
    let mut comp = DMatrix::zeros(2 * m, 2 * m);
    comp.view_mut((0, m), (m, m)).copy_from(&DMatrix::identity(m, m));
    comp.view_mut((m, 0), (m, m)).copy_from(&(-&inv * kk));
    comp.view_mut((m, m), (m, m)).copy_from(&(-&inv * b));
    let scale = comp.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let mut roots: Vec<f64> = comp.complex_eigenvalues().iter().filter(|z| z.im.abs() <= 1e-10 * scale).map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    Ok(roots)
}

fn expand_samples<S: VariationalSystem>(sys: &S, spec: &SampleSpec) -> Result<Vec<(Vec<f64>, Vec<f64>)>, ClassifyError> {
    let mut out = Vec::new();
    for g in &spec.g0 {
        for du in &spec.du {
            out.push((g.clone(), du.clone()));
        }
        for k in &spec.wave_vectors {
            for w in characteristic_frequencies(sys, g, k)? {
                let mut du = vec![w];
                du.extend_from_slice(k);
                out.push((g.clone(), du));
            }
        }
    }
    Ok(out)
}

/// Sample-based verdict: linearly degenerate when every `|Λ_{ijk}|` is below tolerance,
/// a genuinely nonlinear candidate when every sample is simple with `|Λ|` above it,
/// indeterminate otherwise.
pub fn classify_characteristic<S: VariationalSystem>(sys: &S, spec: &SampleSpec, opts: &ClassifyOptions) -> Result<ClassificationReport, ClassifyError> {
    let pairs = expand_samples(sys, spec)?;
    let total = pairs.len();
    let evaluated: Vec<Result<SampleResult, RejectedSample>> = pairs
        .into_par_iter()
        .map(|(g0, du)| {
            let reject = |reason: String| RejectedSample { g0: g0.clone(), du: du.clone(), reason };
            let c = eikonal_matrix(sys, &g0, &du).map_err(|e| reject(e.to_string()))?;
            let data = null_space_scaled(&c, opts.kernel_tolerance, eikonal_scale(sys, &g0, &du));
            if data.multiplicity == 0 {
                return Err(reject("det C != 0: covector is not characteristic".into()));
            }
            let lam = lambda_tensor(sys, &g0, &du, &data.null_basis).map_err(|e| reject(e.to_string()))?;
            let lambda = (lam.n == 1).then(|| lam.values[0].abs());
            Ok(SampleResult { max_abs_lambda: lam.max_abs(), lambda, multiplicity: data.multiplicity, g0, du })
        })
        .collect();
    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for e in evaluated {
        match e {
            Ok(s) => samples.push(s),
            Err(r) => rejected.push(r),
        }
    }
    if samples.is_empty() {
        return Err(ClassifyError::NoCharacteristicSamples(total));
    }
    let max_abs_lambda = samples.iter().fold(0.0f64, |m, s| m.max(s.max_abs_lambda));
    let min_abs_lambda = samples.iter().fold(f64::INFINITY, |m, s| m.min(s.max_abs_lambda));
    let all_simple = samples.iter().all(|s| s.multiplicity == 1);
    let verdict = if max_abs_lambda < opts.lambda_tolerance {
        Verdict::LinearlyDegenerate
    } else if all_simple && min_abs_lambda > opts.lambda_tolerance {
        Verdict::GenuinelyNonlinearCandidate
    } else {
        Verdict::Indeterminate
    };
    Ok(ClassificationReport { verdict, samples, rejected, min_abs_lambda, max_abs_lambda })
}

/// One monomial `coeff · Π g_s^{powers[s]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    #[serde(default)]
    pub powers: Vec<u32>,
}

/// Polynomial coefficient for `(α, β, p, q)` with `α ≤ β`, `p ≤ q`; its mirror images are implied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialEntry {
    pub alpha: usize,
    pub beta: usize,
    pub p: usize,
    pub q: usize,
    pub terms: Vec<Monomial>,
}

/// Systems addressable by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinSystem {
    /// `½g_t² − ½c(g)²|∇g|²` with `c(g) = Σ speed[k] g^k`, in `space_dims` space dimensions.
    ScalarWave { space_dims: usize, speed: Vec<f64> },
    /// Uncoupled linear waves, component `p` with constant speed `speeds[p]`.
    ConstantCoefficient { space_dims: usize, speeds: Vec<f64> },
    Polynomial { space_dims: usize, fields: usize, entries: Vec<PolynomialEntry> },
}

impl BuiltinSystem {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |s: String| Err(ClassifyError::InvalidSystem(s));
        match self {
            BuiltinSystem::ScalarWave { space_dims, speed } => {
                if *space_dims == 0 || speed.is_empty() {
                    return bad("scalar_wave needs space_dims >= 1 and a nonempty speed polynomial".into());
                }
            }
            BuiltinSystem::ConstantCoefficient { space_dims, speeds } => {
                if *space_dims == 0 || speeds.is_empty() {
                    return bad("constant_coefficient needs space_dims >= 1 and at least one speed".into());
                }
            }
            BuiltinSystem::Polynomial { space_dims, fields, entries } => {
                let n = space_dims + 1;
                let mut seen = std::collections::HashSet::new();
                for e in entries {
                    if e.alpha > e.beta || e.p > e.q || e.beta >= n || e.q >= *fields {
                        return bad(format!("entry ({}, {}, {}, {}) must satisfy alpha <= beta < {n}, p <= q < {fields}", e.alpha, e.beta, e.p, e.q));
                    }
                    if !seen.insert((e.alpha, e.beta, e.p, e.q)) {
                        return bad(format!("duplicate entry ({}, {}, {}, {})", e.alpha, e.beta, e.p, e.q));
                    }
                    if e.terms.iter().any(|t| t.powers.len() > *fields) {
                        return bad("monomial has more powers than fields".into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn poly<R: Real>(coeffs: &[f64], x: R) -> R {
    coeffs.iter().rev().fold(R::zero(), |acc, &c| acc * x + c)
}

impl VariationalSystem for BuiltinSystem {
    fn spacetime_dim(&self) -> usize {
        match self {
            BuiltinSystem::ScalarWave { space_dims, .. } | BuiltinSystem::ConstantCoefficient { space_dims, .. } | BuiltinSystem::Polynomial { space_dims, .. } => space_dims + 1,
        }
    }

    fn fields(&self) -> usize {
        match self {
            BuiltinSystem::ScalarWave { .. } => 1,
            BuiltinSystem::ConstantCoefficient { speeds, .. } => speeds.len(),
            BuiltinSystem::Polynomial { fields, .. } => *fields,
        }
    }

    fn coefficient<R: Real>(&self, g: &[R], alpha: usize, beta: usize, p: usize, q: usize) -> R {
        match self {
            BuiltinSystem::ScalarWave { speed, .. } => match (alpha == beta, alpha) {
                (true, 0) => R::cst(0.5),
                (true, _) => {
                    let c = poly(speed, g[0]);
                    c * c * -0.5
                }
                _ => R::zero(),
            },
            BuiltinSystem::ConstantCoefficient { speeds, .. } => {
                if alpha != beta || p != q {
                    R::zero()
                } else if alpha == 0 {
                    R::cst(0.5)
                } else {
                    R::cst(-0.5 * speeds[p] * speeds[p])
                }
            }
            BuiltinSystem::Polynomial { entries, .. } => {
                let key = (alpha.min(beta), alpha.max(beta), p.min(q), p.max(q));
                entries.iter().filter(|e| (e.alpha, e.beta, e.p, e.q) == key).fold(R::zero(), |acc, e| {
                    e.terms.iter().fold(acc, |acc, t| acc + t.powers.iter().enumerate().fold(R::cst(t.coeff), |m, (s, &k)| m * g[s].powi(k as i32)))
                })
            }
        }
    }
}

/// `Λ = −|∇u|² c0 c0′` for a scalar wave speed polynomial.
pub fn scalar_wave_lambda(speed: &[f64], g0: f64, du: &[f64]) -> f64 {
    let c: Dual<f64, 1> = poly(speed, Dual::var(g0, 0));
    let grad2: f64 = du[1..].iter().map(|x| x * x).sum();
    -grad2 * c.re * c.du[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(speed: Vec<f64>) -> BuiltinSystem {
        BuiltinSystem::ScalarWave { space_dims: 2, speed }
    }

    #[test]
    fn time_covector_gives_a00() {
        let s = BuiltinSystem::ConstantCoefficient { space_dims: 1, speeds: vec![1.0, 2.0] };
        let c = eikonal_matrix(&s, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn scalar_eikonal_matrix_vanishes_on_null_covectors() {
        let s = wave(vec![1.0, 1.0]);
        let c = eikonal_matrix(&s, &[0.5], &[1.5, 0.6, 0.8]).unwrap();
        assert!(c[(0, 0)].abs() < 1e-15);
        let c = eikonal_matrix(&s, &[0.5], &[1.0, 0.6, 0.8]).unwrap();
        assert!((c[(0, 0)] - 0.5 * (1.0 - 2.25)).abs() < 1e-15);
    }

    #[test]
    fn zero_system_and_zero_covector() {
        let s = BuiltinSystem::Polynomial { space_dims: 1, fields: 1, entries: vec![] };
        assert_eq!(eikonal_matrix(&s, &[0.0], &[1.0, 1.0]).unwrap()[(0, 0)], 0.0);
        assert_eq!(eikonal_matrix(&s, &[0.0], &[0.0, 0.0]).unwrap_err(), ClassifyError::ZeroCovector);
        assert!(matches!(eikonal_matrix(&s, &[0.0], &[1.0]).unwrap_err(), ClassifyError::Dimension { .. }));
    }

    #[test]
    fn kernel_thresholding() {
        let d = null_space(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]), 1e-8);
        assert_eq!(d.multiplicity, 1);
        assert!((d.null_basis[0][0] - 1.0).abs() < 1e-15 && d.null_basis[0][1].abs() < 1e-15);
        assert_eq!(null_space(&DMatrix::zeros(2, 2), 1e-8).multiplicity, 2);
        assert_eq!(null_space(&DMatrix::from_row_slice(2, 2, &[1e-14, 0.0, 0.0, 2.0]), 1e-8).multiplicity, 1);
        assert_eq!(null_space(&DMatrix::identity(3, 3), 1e-8).multiplicity, 0);
    }

    #[test]
    fn scalar_wave_lambda_matches_closed_form() {
        let s = wave(vec![1.0, 1.0]);
        let du = [1.0, 0.6, 0.8];
        let d = null_space_scaled(&eikonal_matrix(&s, &[0.0], &du).unwrap(), 1e-8, eikonal_scale(&s, &[0.0], &du));
        let l = lambda_tensor(&s, &[0.0], &du, &d.null_basis).unwrap();
        assert!((l.values[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_speed_is_linearly_degenerate() {
        let s = wave(vec![1.3]);
        let spec = SampleSpec { g0: vec![vec![-0.5], vec![0.0], vec![2.0]], du: vec![], wave_vectors: vec![vec![1.0, 0.0], vec![0.3, -0.4]] };
        let rep = classify_characteristic(&s, &spec, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::LinearlyDegenerate);
        assert_eq!(rep.samples.len(), 12);
    }

    #[test]
    fn verdicts_follow_the_samples() {
        let spec = |g: Vec<f64>| SampleSpec { g0: g.into_iter().map(|x| vec![x]).collect(), du: vec![], wave_vectors: vec![vec![1.0, 0.5]] };
        let gn = classify_characteristic(&wave(vec![1.0, 1.0]), &spec(vec![0.1, 0.5, 2.0]), &ClassifyOptions::default()).unwrap();
        assert_eq!(gn.verdict, Verdict::GenuinelyNonlinearCandidate);
        let ind = classify_characteristic(&wave(vec![1.0, 0.0, 1.0]), &spec(vec![-0.5, 0.0, 0.5]), &ClassifyOptions::default()).unwrap();
        assert_eq!(ind.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn non_characteristic_samples_are_rejected() {
        let s = wave(vec![1.0]);
        let spec = SampleSpec { g0: vec![vec![0.0]], du: vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]], wave_vectors: vec![] };
        let rep = classify_characteristic(&s, &spec, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.rejected.len(), 1);
        assert_eq!(rep.samples.len(), 1);
        let spec = SampleSpec { g0: vec![vec![0.0]], du: vec![vec![1.0, 0.0, 0.0]], wave_vectors: vec![] };
        assert!(matches!(classify_characteristic(&s, &spec, &ClassifyOptions::default()), Err(ClassifyError::NoCharacteristicSamples(1))));
    }

    #[test]
    fn constant_coefficient_transport_has_zero_n() {
        let s = BuiltinSystem::ConstantCoefficient { space_dims: 1, speeds: vec![1.0] };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = AffineField { value: vec![0.0], gradient: vec![vec![0.0, 0.0]] };
        let t = transport_coefficients(&s, &f, &[h, -h], &[1.0], &[0.3, 0.2]).unwrap();
        assert_eq!(t.n, 0.0);
        assert!((t.ray[0] - h).abs() < 1e-15 && (t.ray[1] - h).abs() < 1e-15);
    }

    #[test]
    fn polynomial_validation() {
        let e = |a, b, p, q| PolynomialEntry { alpha: a, beta: b, p, q, terms: vec![Monomial { coeff: 1.0, powers: vec![] }] };
        assert!(BuiltinSystem::Polynomial { space_dims: 1, fields: 1, entries: vec![e(1, 0, 0, 0)] }.validate().is_err());
        assert!(BuiltinSystem::Polynomial { space_dims: 1, fields: 1, entries: vec![e(0, 0, 0, 0), e(0, 0, 0, 0)] }.validate().is_err());
        assert!(BuiltinSystem::Polynomial { space_dims: 1, fields: 1, entries: vec![e(0, 1, 0, 0)] }.validate().is_ok());
    }
}
