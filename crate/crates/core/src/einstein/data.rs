use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pointwise::{residuals, PointFields, PointJet};
use super::{EinsteinSource, EvolveOptions, FieldSet};
use crate::error::SolveError;
use crate::grid::{d1_line, d2_line, BoundaryMode, Grid3, GridError};
use crate::profiles::Profile;

/// Characteristic data: (U, V, M) on v = 0 and (U, V, M, Y, Y_θ) on θ = 0.
///
/// Faces on v = 0 are stored θ fastest (`i + n_theta·j`); faces on θ = 0 are
/// indexed `j + n_eta·k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub m0: Vec<f64>,
    pub u1: Vec<f64>,
    pub v1: Vec<f64>,
    pub m1: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

/// Profiles sampled on both data faces; `y` supplies `Y` and `Y_θ` on θ = 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryProfiles {
    #[serde(default)]
    pub u: Profile,
    #[serde(default)]
    pub v: Profile,
    #[serde(default)]
    pub m: Profile,
    #[serde(default)]
    pub y: Profile,
}

/// Pulse data with U on v = 0 solved from the θ-constraint.
///
/// `v` and `m` give V and M on v = 0; θ = 0 data are their values at θ = 0,
/// held constant in v, with U = Y = Y_θ = 0 there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub v: Profile,
    #[serde(default)]
    pub m: Profile,
    /// RK4 substeps per θ-cell.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

fn default_substeps() -> usize {
    4
}

impl BoundaryData {
    pub fn zeros(grid: &Grid3) -> Self {
        let a = vec![0.0; grid.level_len()];
        let b = vec![0.0; grid.n_eta * grid.n_v];
        Self { u0: a.clone(), v0: a.clone(), m0: a, u1: b.clone(), v1: b.clone(), m1: b.clone(), y0: b.clone(), y1: b }
    }

    pub fn from_profiles(grid: &Grid3, p: &BoundaryProfiles) -> Self {
        let level = |f: &Profile| {
            let mut out = Vec::with_capacity(grid.level_len());
            for j in 0..grid.n_eta {
                for i in 0..grid.n_theta {
                    out.push(f.value(grid.theta(i), grid.eta(j), grid.v(0)));
                }
            }
            out
        };
        let face = |f: &dyn Fn(f64, f64) -> f64| {
            let mut out = Vec::with_capacity(grid.n_eta * grid.n_v);
            for k in 0..grid.n_v {
                for j in 0..grid.n_eta {
                    out.push(f(grid.eta(j), grid.v(k)));
                }
            }
            out
        };
        let t0 = grid.theta0;
        Self {
            u0: level(&p.u),
            v0: level(&p.v),
            m0: level(&p.m),
            u1: face(&|e, v| p.u.value(t0, e, v)),
            v1: face(&|e, v| p.v.value(t0, e, v)),
            m1: face(&|e, v| p.m.value(t0, e, v)),
            y0: face(&|e, v| p.y.value(t0, e, v)),
            y1: face(&|e, v| p.y.jet(t0, e, v).grad[0]),
        }
    }

    /// Pulse data whose v = 0 face satisfies the θ-constraint.
    ///
    /// With `U = −2 ln w` the constraint becomes `w'' = −¼V_θ² w − M_θ w'`,
    /// integrated from `w = 1`, `w' = 0` at θ = θ₀ on each η row.
    pub fn constrained_pulse(grid: &Grid3, spec: &PulseSpec) -> Result<Self, SolveError> {
        let mut d = Self::zeros(grid);
        let n = grid.n_theta;
        let sub = spec.substeps.max(1);
        let h = grid.d_theta / sub as f64;
        for j in 0..grid.n_eta {
            let eta = grid.eta(j);
            let rhs = |t: f64, w: f64, wp: f64| {
                let vt = spec.v.jet(t, eta, 0.0).grad[0];
                let mt = spec.m.jet(t, eta, 0.0).grad[0];
                (wp, -0.25 * vt * vt * w - mt * wp)
            };
            let (mut w, mut wp) = (1.0f64, 0.0f64);
            for i in 0..n {
                let t = grid.theta(i);
                if w <= 0.0 || !w.is_finite() {
                    return Err(SolveError::InvalidData(format!("pulse focuses before θ = {t} on η row {j}; U is unbounded")));
                }
                let idx = i + n * j;
                d.u0[idx] = -2.0 * w.ln();
                d.v0[idx] = spec.v.value(t, eta, 0.0);
                d.m0[idx] = spec.m.value(t, eta, 0.0);
                if i + 1 == n {
                    break;
                }
                for s in 0..sub {
                    let t = t + s as f64 * h;
                    let (k1w, k1p) = rhs(t, w, wp);
                    let (k2w, k2p) = rhs(t + 0.5 * h, w + 0.5 * h * k1w, wp + 0.5 * h * k1p);
                    let (k3w, k3p) = rhs(t + 0.5 * h, w + 0.5 * h * k2w, wp + 0.5 * h * k2p);
                    let (k4w, k4p) = rhs(t + h, w + h * k3w, wp + h * k3p);
                    w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
                    wp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                }
            }
            for k in 0..grid.n_v {
                let e = j + grid.n_eta * k;
                d.v1[e] = d.v0[n * j];
                d.m1[e] = d.m0[n * j];
            }
        }
        Ok(d)
    }

    fn shape_ok(&self, grid: &Grid3) -> Result<(), GridError> {
        let (a, b) = (grid.level_len(), grid.n_eta * grid.n_v);
        for (len, want) in [
            (self.u0.len(), a),
            (self.v0.len(), a),
            (self.m0.len(), a),
            (self.u1.len(), b),
            (self.v1.len(), b),
            (self.m1.len(), b),
            (self.y0.len(), b),
            (self.y1.len(), b),
        ] {
            if len != want {
                return Err(GridError::LengthMismatch { expected: want, got: len });
            }
        }
        Ok(())
    }

    /// Largest mismatch between the two faces along their common edge θ = v = 0.
    pub fn corner_mismatch(&self, grid: &Grid3) -> f64 {
        let n = grid.n_theta;
        (0..grid.n_eta)
            .flat_map(|j| [(self.u0[n * j] - self.u1[j]).abs(), (self.v0[n * j] - self.v1[j]).abs(), (self.m0[n * j] - self.m1[j]).abs()])
            .fold(0.0, f64::max)
    }

    /// max|F| of the v = 0 face, with second-order θ-stencils.
    pub fn constraint_defect(&self, grid: &Grid3) -> f64 {
        self.constraint_scan(grid).0
    }

    /// max|F| and the largest sum of the absolute values of the terms of F.
    fn constraint_scan(&self, grid: &Grid3) -> (f64, f64) {
        let n = grid.n_theta;
        let h = grid.d_theta;
        let mode = BoundaryMode::OneSided;
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        let (mut ut, mut utt, mut vt, mut mt) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for j in 0..grid.n_eta {
            let r = j * n..(j + 1) * n;
            d1_line(&self.u0[r.clone()], h, mode, &mut ut);
            d2_line(&self.u0[r.clone()], h, mode, &mut utt);
            d1_line(&self.v0[r.clone()], h, mode, &mut vt);
            d1_line(&self.m0[r], h, mode, &mut mt);
            for i in 0..n {
                worst = worst.max(super::constraint_value(ut[i], utt[i], vt[i], mt[i]).abs());
                scale = scale.max(utt[i].abs() + 0.5 * (ut[i] * ut[i] + vt[i] * vt[i]) + (ut[i] * mt[i]).abs());
            }
        }
        (worst, scale)
    }

    pub(crate) fn check(&self, grid: &Grid3, opts: &EvolveOptions) -> Result<(), SolveError> {
        self.shape_ok(grid)?;
        let all = [&self.u0, &self.v0, &self.m0, &self.u1, &self.v1, &self.m1, &self.y0, &self.y1];
        if all.iter().any(|f| f.iter().any(|x| !x.is_finite())) {
            return Err(SolveError::InvalidData("non-finite boundary data".into()));
        }
        let c = self.corner_mismatch(grid);
        if c > opts.corner_tolerance {
            return Err(SolveError::InvalidData(format!("corner compatibility violated: faces differ by {c:e} at θ = v = 0")));
        }
        if let Some(tol) = opts.constraint_tolerance {
            let (f, scale) = self.constraint_scan(grid);
            if f > tol * scale.max(1.0) {
                return Err(SolveError::InvalidData(format!("v = 0 data violate the θ-constraint: max|F| = {f:e} exceeds {tol:e} × {:e}", scale.max(1.0))));
            }
        }
        Ok(())
    }

    /// Largest k·½e^{2U−W}/h_η² over both data faces.
    pub fn step_ratio(&self, grid: &Grid3) -> f64 {
        let c = grid.d_v / (grid.d_eta * grid.d_eta);
        let face0 = (0..grid.level_len()).map(|i| (self.u0[i] - self.v0[i] - self.m0[i]).exp());
        let face1 = (0..self.u1.len()).map(|i| (self.u1[i] - self.v1[i] - self.m1[i]).exp());
        0.5 * c * face0.chain(face1).fold(0.0, f64::max)
    }

    /// Level-0 and θ = 0 values of the marched combinations S = U+V, W = U+V+M, U.
    pub(crate) fn marched_faces(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (combinations(&self.u0, &self.v0, &self.m0), combinations(&self.u1, &self.v1, &self.m1))
    }

    /// The same data on an η-independent grid row `j`, for the colliding-wave solver.
    pub fn row(&self, grid: &Grid3, j: usize) -> CollidingData {
        let n = grid.n_theta;
        let r = j * n..(j + 1) * n;
        let col = |f: &[f64]| (0..grid.n_v).map(|k| f[j + grid.n_eta * k]).collect();
        CollidingData {
            u0: self.u0[r.clone()].to_vec(),
            v0: self.v0[r.clone()].to_vec(),
            m0: self.m0[r].to_vec(),
            u1: col(&self.u1),
            v1: col(&self.v1),
            m1: col(&self.m1),
        }
    }
}

/// Data for the colliding-wave solver: θ-profiles on v = 0 and v-profiles on θ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollidingData {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub m0: Vec<f64>,
    pub u1: Vec<f64>,
    pub v1: Vec<f64>,
    pub m1: Vec<f64>,
}

impl CollidingData {
    pub fn from_profiles(grid: &Grid3, u: &Profile, v: &Profile, m: &Profile) -> Self {
        let e = grid.eta0;
        let th = |p: &Profile| (0..grid.n_theta).map(|i| p.value(grid.theta(i), e, grid.v0)).collect();
        let vv = |p: &Profile| (0..grid.n_v).map(|k| p.value(grid.theta0, e, grid.v(k))).collect();
        Self { u0: th(u), v0: th(v), m0: th(m), u1: vv(u), v1: vv(v), m1: vv(m) }
    }

    pub(crate) fn check(&self, grid: &Grid3, opts: &EvolveOptions) -> Result<(), SolveError> {
        self.as_boundary(grid).check(grid, opts)
    }

    fn as_boundary(&self, grid: &Grid3) -> BoundaryData {
        let z = vec![0.0; grid.n_v];
        BoundaryData {
            u0: self.u0.clone(),
            v0: self.v0.clone(),
            m0: self.m0.clone(),
            u1: self.u1.clone(),
            v1: self.v1.clone(),
            m1: self.m1.clone(),
            y0: z.clone(),
            y1: z,
        }
    }

    pub(crate) fn marched_faces(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (combinations(&self.u0, &self.v0, &self.m0), combinations(&self.u1, &self.v1, &self.m1))
    }
}

fn combinations(u: &[f64], v: &[f64], m: &[f64]) -> Vec<Vec<f64>> {
    let s: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let w: Vec<f64> = s.iter().zip(m).map(|(a, b)| a + b).collect();
    vec![s, w, u.to_vec()]
}

/// Analytic (U, V, M, Y) turned into an exact solution of the forced system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedSolution {
    pub u: Profile,
    pub v: Profile,
    pub m: Profile,
    pub y: Profile,
}

impl ManufacturedSolution {
    pub fn point(&self, theta: f64, eta: f64, v: f64) -> PointFields {
        let j = |p: &Profile| PointJet::from_hessian(&p.jet(theta, eta, v));
        PointFields { u: j(&self.u), v: j(&self.v), m: j(&self.m), y: j(&self.y) }
    }

    /// Forcing `[s₂, s₃, s₄, s₅]`: the residuals of the exact fields.
    pub fn source(&self) -> EinsteinSource {
        let me = self.clone();
        Arc::new(move |t, e, v| {
            let r = residuals(&me.point(t, e, v));
            [r[1], r[2], r[3], r[4]]
        })
    }

    pub fn boundary_data(&self, grid: &Grid3) -> BoundaryData {
        BoundaryData::from_profiles(grid, &BoundaryProfiles { u: self.u.clone(), v: self.v.clone(), m: self.m.clone(), y: self.y.clone() })
    }

    pub fn exact(&self, grid: &Grid3) -> FieldSet {
        FieldSet::from_profiles(*grid, &self.u, &self.v, &self.m, &self.y)
    }
}
