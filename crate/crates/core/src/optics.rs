//! Model geometrical-optics equations: linear transport along rays, the
//! parabolic (diffractive) equation and the Hunter–Saxton family.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{BlowUp, BlowUpKind, SolveError};
use crate::grid::{BoundaryMode, Grid3, GridError, GridFunction};
use crate::march::{march, Geometry, Jet, LevelSystem, MarchOptions, Problem};
use crate::profiles::Profile;

/// Coefficients N, Λ, D as functions of the ray parameter v (profiles evaluated at θ = η = 0).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayCoefficients {
    #[serde(default)]
    pub n: Profile,
    #[serde(default)]
    pub lambda: Profile,
    #[serde(default)]
    pub d: Profile,
}

impl RayCoefficients {
    pub fn constant(n: f64, lambda: f64, d: f64) -> Self {
        let c = |value: f64| if value == 0.0 { Profile::Zero } else { Profile::Constant { value } };
        Self { n: c(n), lambda: c(lambda), d: c(d) }
    }

    pub fn n_at(&self, v: f64) -> f64 {
        self.n.value(0.0, 0.0, v)
    }

    pub fn lambda_at(&self, v: f64) -> f64 {
        self.lambda.value(0.0, 0.0, v)
    }

    pub fn d_at(&self, v: f64) -> f64 {
        self.d.value(0.0, 0.0, v)
    }
}

/// `D = y_t² − c0²|∇y|²` together with the ray derivative `y_v = u_t y_t − c0² ∇u·∇y`.
///
/// Covectors are ordered `(t, x_1, …, x_d)`.
pub fn diffraction_coefficient(u_gradient: &[f64], y_gradient: &[f64], c0: f64) -> Result<(f64, f64), SolveError> {
    if u_gradient.len() != y_gradient.len() || u_gradient.len() < 2 {
        return Err(SolveError::InvalidData(format!(
            "covector dimensions {} and {} must match and be at least 2",
            u_gradient.len(),
            y_gradient.len()
        )));
    }
    let c2 = c0 * c0;
    let grad_y2: f64 = y_gradient[1..].iter().map(|x| x * x).sum();
    let dot: f64 = u_gradient[1..].iter().zip(&y_gradient[1..]).map(|(a, b)| a * b).sum();
    let d = y_gradient[0] * y_gradient[0] - c2 * grad_y2;
    let y_v = u_gradient[0] * y_gradient[0] - c2 * dot;
    Ok((d, y_v))
}

/// Amplitude samples along a ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportHistory {
    pub v: Vec<f64>,
    pub amplitude: Vec<f64>,
}

/// Integrates `A_v + N(v) A = 0` from `A(0) = a0` to `v_end` with classical RK4.
pub fn solve_transport(a0: f64, n: impl Fn(f64) -> f64, v_end: f64, steps: usize, cap: f64) -> Result<TransportHistory, SolveError> {
    assert!(steps > 0);
    let h = v_end / steps as f64;
    let mut v = vec![0.0];
    let mut amp = vec![a0];
    let mut a = a0;
    let coef = |s: f64| {
        let x = n(s);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(SolveError::NonFiniteCoefficient(format!("N({s}) = {x}")))
        }
    };
    for step in 0..steps {
        let s = step as f64 * h;
        let (n0, nh, n1) = (coef(s)?, coef(s + 0.5 * h)?, coef(s + h)?);
        let k1 = -n0 * a;
        let k2 = -nh * (a + 0.5 * h * k1);
        let k3 = -nh * (a + 0.5 * h * k2);
        let k4 = -n1 * (a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let s1 = (step + 1) as f64 * h;
        if !a.is_finite() || a.abs() > cap {
            return Err(SolveError::BlowUp(BlowUp {
                kind: if a.is_finite() { BlowUpKind::FieldMagnitude } else { BlowUpKind::NonFinite },
                field: "A".into(),
                theta: 0.0,
                eta: 0.0,
                v: s1,
                value: a,
            }));
        }
        v.push(s1);
        amp.push(a);
    }
    Ok(TransportHistory { v, amplitude: amp })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformMode {
    Periodic,
    #[default]
    Localized,
}

/// Solution of a Hunter–Saxton-type problem.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub a: GridFunction,
    pub mode: WaveformMode,
    /// θ-period `n_theta·d_theta` in periodic mode.
    pub period: Option<f64>,
    pub iterations: Vec<usize>,
}

impl WaveState {
    /// θ-average of `a` on row `j` of level `k`.
    pub fn theta_mean(&self, j: usize, k: usize) -> f64 {
        let g = self.a.grid();
        (0..g.n_theta).map(|i| self.a.get(i, j, k)).sum::<f64>() / g.n_theta as f64
    }
}

pub type PointSource = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Data on the v = 0 face and (localized mode) the θ = 0 face.
#[derive(Clone)]
pub struct WaveData {
    /// `a(θ_i, η_j, 0)`, θ fastest.
    pub initial: Vec<f64>,
    /// `a(0, η_j, v_k)` at index `j + n_eta·k`.
    pub theta0: Option<Vec<f64>>,
    /// Optional forcing added to the right-hand side of `a_θv = …`.
    pub source: Option<PointSource>,
}

impl WaveData {
    /// Samples `profile` on the data faces of `grid`.
    pub fn from_profile(grid: &Grid3, profile: &Profile, mode: WaveformMode) -> Self {
        let mut initial = Vec::with_capacity(grid.level_len());
        for j in 0..grid.n_eta {
            for i in 0..grid.n_theta {
                initial.push(profile.value(grid.theta(i), grid.eta(j), grid.v(0)));
            }
        }
        let theta0 = match mode {
            WaveformMode::Periodic => None,
            WaveformMode::Localized => {
                let mut t = Vec::with_capacity(grid.n_eta * grid.n_v);
                for k in 0..grid.n_v {
                    for j in 0..grid.n_eta {
                        t.push(profile.value(grid.theta(0), grid.eta(j), grid.v(k)));
                    }
                }
                Some(t)
            }
        };
        Self { initial, theta0, source: None }
    }

    pub fn with_source(mut self, source: PointSource) -> Self {
        self.source = Some(source);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub fallback_damping: f64,
    /// Cap on max|a_θ|.
    pub gradient_cap: f64,
    pub eta_boundary: BoundaryMode,
    /// Allowed |θ-mean| of periodic data, relative to max(1, max|a|).
    pub mean_tolerance: f64,
    /// Bound on k·|D|/h_η².
    pub step_ratio_limit: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            damping: 1.0,
            fallback_damping: 0.5,
            gradient_cap: 1e6,
            eta_boundary: BoundaryMode::OneSided,
            mean_tolerance: 1e-10,
            step_ratio_limit: 0.5,
        }
    }
}

struct ScalarSystem<'a> {
    coeffs: &'a RayCoefficients,
    source: Option<&'a PointSource>,
}

impl LevelSystem for ScalarSystem<'_> {
    fn n_marched(&self) -> usize {
        1
    }

    fn field_name(&self, _f: usize) -> &str {
        "a"
    }

    fn n_sources(&self) -> usize {
        4
    }

    fn cell_sources(&self, theta: f64, eta: f64, v: f64, out: &mut [f64]) {
        out[0] = self.coeffs.lambda_at(v);
        out[1] = self.coeffs.n_at(v);
        out[2] = self.coeffs.d_at(v);
        out[3] = self.source.map_or(0.0, |s| s(theta, eta, v));
    }

    fn rhs(&self, jets: &[Jet], s: &[f64], out: &mut [f64]) {
        let a = jets[0];
        let (lambda, n, d) = (s[0], s[1], s[2]);
        out[0] = -0.5 * lambda * a.th * a.th - lambda * a.val * a.thth - n * a.th - 0.5 * d * a.etaeta + s[3];
    }
}

/// Hunter–Saxton equation on a (θ, v) plane (`grid.n_eta == 1`); requires D ≡ 0.
pub fn solve_hs(data: &WaveData, coeffs: &RayCoefficients, mode: WaveformMode, grid: &Grid3, opts: &WaveOptions) -> Result<WaveState, SolveError> {
    if grid.n_eta != 1 {
        return Err(SolveError::InvalidData("solve_hs expects a (θ, v) grid with a single η node".into()));
    }
    if (0..grid.n_v).any(|k| coeffs.d_at(grid.v(k)) != 0.0) {
        return Err(SolveError::InvalidData("solve_hs requires D = 0; use solve_diffractive".into()));
    }
    run(data, coeffs, mode, grid, opts)
}

/// Diffractive Hunter–Saxton equation on a (θ, η, v) grid with localized θ data.
pub fn solve_diffractive(data: &WaveData, coeffs: &RayCoefficients, grid: &Grid3, opts: &WaveOptions) -> Result<WaveState, SolveError> {
    run(data, coeffs, WaveformMode::Localized, grid, opts)
}

fn run(data: &WaveData, coeffs: &RayCoefficients, mode: WaveformMode, grid: &Grid3, opts: &WaveOptions) -> Result<WaveState, SolveError> {
    let theta_mode = match mode {
        WaveformMode::Periodic => BoundaryMode::Periodic,
        WaveformMode::Localized => BoundaryMode::OneSided,
    };
    let geom = Geometry::new(grid, theta_mode, opts.eta_boundary)?;
    if data.initial.len() != grid.level_len() {
        return Err(GridError::LengthMismatch { expected: grid.level_len(), got: data.initial.len() }.into());
    }
    if data.initial.iter().any(|x| !x.is_finite()) {
        return Err(SolveError::InvalidData("non-finite initial data".into()));
    }
    if grid.n_eta > 1 {
        let k = grid.d_v;
        let mut ratio = 0.0f64;
        for m in 0..grid.n_v {
            ratio = ratio.max(k * coeffs.d_at(grid.v(m)).abs() / (grid.d_eta * grid.d_eta));
            if m + 1 < grid.n_v {
                ratio = ratio.max(k * coeffs.d_at(grid.v(m) + 0.5 * k).abs() / (grid.d_eta * grid.d_eta));
            }
        }
        if ratio > opts.step_ratio_limit {
            return Err(SolveError::StepRatio { ratio, limit: opts.step_ratio_limit });
        }
    }
    let theta0 = match mode {
        WaveformMode::Periodic => {
            let scale = data.initial.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for j in 0..grid.n_eta {
                let row = &data.initial[j * grid.n_theta..(j + 1) * grid.n_theta];
                let mean = row.iter().sum::<f64>() / grid.n_theta as f64;
                if mean.abs() > opts.mean_tolerance * scale {
                    return Err(SolveError::InvalidData(format!("non-zero-mean periodic data: θ-mean {mean:e} on η row {j}")));
                }
            }
            None
        }
        WaveformMode::Localized => {
            let t = data.theta0.as_ref().ok_or_else(|| SolveError::InvalidData("localized mode needs θ = 0 data".into()))?;
            if t.len() != grid.n_eta * grid.n_v {
                return Err(GridError::LengthMismatch { expected: grid.n_eta * grid.n_v, got: t.len() }.into());
            }
            Some(vec![t.clone()])
        }
    };
    let sys = ScalarSystem { coeffs, source: data.source.as_ref() };
    let problem = Problem { grid: *grid, geom, level0: vec![data.initial.clone()], theta0 };
    let mopts = MarchOptions {
        tol: opts.tolerance,
        max_iter: opts.max_iterations,
        damping: opts.damping,
        fallback_damping: opts.fallback_damping,
        gradient_cap: Some(opts.gradient_cap),
        field_cap: None,
    };
    let out = march(&sys, &problem, &mopts)?;
    let a = GridFunction::from_raw(*grid, out.fields.into_iter().next().unwrap());
    let period = (mode == WaveformMode::Periodic).then_some(grid.n_theta as f64 * grid.d_theta);
    Ok(WaveState { a, mode, period, iterations: out.iterations })
}
