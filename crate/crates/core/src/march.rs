//! Goursat corner marching shared by the Hunter–Saxton family and the Einstein system.
//!
//! For `f_θv = RHS` the cell update is
//! `f(i+1,k+1) = f(i,k+1) + f(i+1,k) − f(i,k) + h·k·RHS(i+½, k+½)`,
//! swept along θ for each η row. The midpoint RHS sees jets averaged over the
//! old and new level, so each level is solved by damped fixed-point iteration.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::error::{BlowUp, BlowUpKind, SolveError};
use crate::grid::{d1_line, d2_line, BoundaryMode, Grid3, GridError};

/// Value and derivatives of one field at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub val: f64,
    pub th: f64,
    pub eta: f64,
    pub v: f64,
    pub thth: f64,
    pub th_eta: f64,
    pub etaeta: f64,
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            val: self.val + o.val,
            th: self.th + o.th,
            eta: self.eta + o.eta,
            v: self.v + o.v,
            thth: self.thth + o.thth,
            th_eta: self.th_eta + o.th_eta,
            etaeta: self.etaeta + o.etaeta,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o * -1.0
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet {
            val: self.val * s,
            th: self.th * s,
            eta: self.eta * s,
            v: self.v * s,
            thth: self.thth * s,
            th_eta: self.th_eta * s,
            etaeta: self.etaeta * s,
        }
    }
}

/// Shape of one v-level and how its ends are treated.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Geometry {
    pub n_theta: usize,
    pub n_eta: usize,
    pub h_theta: f64,
    pub h_eta: f64,
    pub theta_mode: BoundaryMode,
    pub eta_mode: BoundaryMode,
}

impl Geometry {
    pub fn new(grid: &Grid3, theta_mode: BoundaryMode, eta_mode: BoundaryMode) -> Result<Self, GridError> {
        use crate::grid::Axis;
        let theta_min = if theta_mode == BoundaryMode::Periodic { 3 } else { 4 };
        if grid.n_theta < theta_min {
            return Err(GridError::TooFewPoints { axis: Axis::Theta, needed: theta_min, got: grid.n_theta });
        }
        let eta_min = if eta_mode == BoundaryMode::Periodic { 3 } else { 4 };
        if grid.n_eta != 1 && grid.n_eta < eta_min {
            return Err(GridError::TooFewPoints { axis: Axis::Eta, needed: eta_min, got: grid.n_eta });
        }
        Ok(Self {
            n_theta: grid.n_theta,
            n_eta: grid.n_eta,
            h_theta: grid.d_theta,
            h_eta: grid.d_eta,
            theta_mode,
            eta_mode,
        })
    }

    pub fn n_cells(&self) -> usize {
        match self.theta_mode {
            BoundaryMode::Periodic => self.n_theta,
            BoundaryMode::OneSided => self.n_theta - 1,
        }
    }

    pub fn level_len(&self) -> usize {
        self.n_theta * self.n_eta
    }

    #[inline]
    fn right(&self, c: usize) -> usize {
        if c + 1 == self.n_theta {
            0
        } else {
            c + 1
        }
    }
}

/// Node η-derivatives (first, second) of a level; zero when the level has a single η node.
///
/// The second derivative is the first-derivative stencil applied twice, so it agrees
/// exactly with η-differencing of quantities that were themselves built from `d1`.
pub(crate) fn node_eta_derivatives(f: &[f64], g: &Geometry) -> (Vec<f64>, Vec<f64>) {
    let n = g.level_len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    if g.n_eta == 1 {
        return (d1, d2);
    }
    let mut line = vec![0.0; g.n_eta];
    let mut o1 = vec![0.0; g.n_eta];
    let mut o2 = vec![0.0; g.n_eta];
    for i in 0..g.n_theta {
        for (j, x) in line.iter_mut().enumerate() {
            *x = f[i + g.n_theta * j];
        }
        d1_line(&line, g.h_eta, g.eta_mode, &mut o1);
        d1_line(&o1, g.h_eta, g.eta_mode, &mut o2);
        for j in 0..g.n_eta {
            d1[i + g.n_theta * j] = o1[j];
            d2[i + g.n_theta * j] = o2[j];
        }
    }
    (d1, d2)
}

/// Node θ-derivatives (first, second) of a level.
pub(crate) fn node_theta_derivatives(f: &[f64], g: &Geometry) -> (Vec<f64>, Vec<f64>) {
    let n = g.level_len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..g.n_eta {
        let r = j * g.n_theta..(j + 1) * g.n_theta;
        d1_line(&f[r.clone()], g.h_theta, g.theta_mode, &mut d1[r.clone()]);
        d2_line(&f[r.clone()], g.h_theta, g.theta_mode, &mut d2[r]);
    }
    (d1, d2)
}

/// Jets of one field at the cell centres `(i+½, j)` of a level; `v` is left zero.
pub(crate) struct HalfJets {
    pub n_cells: usize,
    pub jets: Vec<Jet>,
}

impl HalfJets {
    #[inline]
    pub fn at(&self, c: usize, j: usize) -> Jet {
        self.jets[c + self.n_cells * j]
    }
}

pub(crate) fn half_jets(f: &[f64], g: &Geometry) -> HalfJets {
    let (de, dee) = node_eta_derivatives(f, g);
    let nc = g.n_cells();
    let n = g.n_theta;
    let h = g.h_theta;
    let s2 = 1.0 / (h * h);
    let mut jets = Vec::with_capacity(nc * g.n_eta);
    for j in 0..g.n_eta {
        let row = &f[j * n..(j + 1) * n];
        let re = &de[j * n..(j + 1) * n];
        let ree = &dee[j * n..(j + 1) * n];
        for c in 0..nc {
            let i1 = g.right(c);
            let thth = match g.theta_mode {
                BoundaryMode::Periodic => {
                    let im = (c + n - 1) % n;
                    let i2 = (c + 2) % n;
                    0.5 * (row[im] - row[c] - row[i1] + row[i2]) * s2
                }
                BoundaryMode::OneSided => {
                    if c == 0 {
                        newton_cubic_half(row[0], row[1], row[2], row[3]) * s2
                    } else if c == n - 2 {
                        newton_cubic_half(row[n - 1], row[n - 2], row[n - 3], row[n - 4]) * s2
                    } else {
                        0.5 * (row[c - 1] - row[c] - row[c + 1] + row[c + 2]) * s2
                    }
                }
            };
            jets.push(Jet {
                val: 0.5 * (row[c] + row[i1]),
                th: (row[i1] - row[c]) / h,
                eta: 0.5 * (re[c] + re[i1]),
                v: 0.0,
                thth,
                th_eta: (re[i1] - re[c]) / h,
                etaeta: 0.5 * (ree[c] + ree[i1]),
            });
        }
    }
    HalfJets { n_cells: nc, jets }
}

/// Second derivative, in units of h⁻², at the midpoint of the first interval of a
/// cubic through four equally spaced samples.
#[inline]
fn newton_cubic_half(f0: f64, f1: f64, f2: f64, f3: f64) -> f64 {
    let d2 = f2 - 2.0 * f1 + f0;
    let d3 = f3 - 3.0 * f2 + 3.0 * f1 - f0;
    d2 - 0.5 * d3
}

/// A system of `f_θv = RHS` equations marched by [`march`].
///
/// Jet fields are the marched unknowns followed by any derived fields
/// (recomputed from the marched ones on every level).
pub(crate) trait LevelSystem: Sync {
    fn n_marched(&self) -> usize;
    fn n_derived(&self) -> usize {
        0
    }
    fn field_name(&self, f: usize) -> &str;
    /// Number of solution-independent source values per cell.
    fn n_sources(&self) -> usize {
        0
    }
    fn cell_sources(&self, _theta: f64, _eta: f64, _v: f64, _out: &mut [f64]) {}
    /// Solution-independent data for the derived-field solve on level `v`.
    fn level_data(&self, _v: f64) -> Vec<f64> {
        Vec::new()
    }
    fn derive(&self, _v: f64, _level_data: &[f64], _marched: &[Vec<f64>], _derived: &mut [Vec<f64>]) -> Result<(), SolveError> {
        Ok(())
    }
    /// Right-hand sides for the marched fields at one cell centre.
    fn rhs(&self, jets: &[Jet], sources: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct MarchOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub fallback_damping: f64,
    pub gradient_cap: Option<f64>,
    pub field_cap: Option<f64>,
}

pub(crate) struct Problem {
    pub grid: Grid3,
    pub geom: Geometry,
    /// Marched fields on level 0.
    pub level0: Vec<Vec<f64>>,
    /// Marched fields on θ = 0, indexed `j + n_eta·k`. Required unless θ is periodic.
    pub theta0: Option<Vec<Vec<f64>>>,
}

pub(crate) struct MarchOutput {
    /// Every jet field over the whole grid.
    pub fields: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    pub damped_levels: Vec<usize>,
}

const MAX_JETS: usize = 4;
const MAX_SOURCES: usize = 4;

pub(crate) fn march<S: LevelSystem>(sys: &S, p: &Problem, opts: &MarchOptions) -> Result<MarchOutput, SolveError> {
    let g = p.geom;
    let grid = p.grid;
    let nm = sys.n_marched();
    let nd = sys.n_derived();
    let nj = nm + nd;
    assert!(nj <= MAX_JETS && sys.n_sources() <= MAX_SOURCES);
    let periodic = g.theta_mode == BoundaryMode::Periodic;
    if !periodic && p.theta0.is_none() {
        return Err(SolveError::InvalidData("θ = 0 boundary data required".into()));
    }
    let ll = g.level_len();

    let mut fields: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; nj];
    let mut old: Vec<Vec<f64>> = p.level0.clone();
    let mut old_derived = vec![vec![0.0; ll]; nd];
    sys.derive(grid.v(0), &sys.level_data(grid.v(0)), &old, &mut old_derived)?;
    old.extend(old_derived);
    check_level(sys, &grid, &g, &old, 0, opts)?;
    for f in 0..nj {
        fields[f][..ll].copy_from_slice(&old[f]);
    }
    let mut prev_marched: Option<Vec<Vec<f64>>> = None;
    let mut iterations = Vec::with_capacity(grid.n_v);
    let mut damped_levels = Vec::new();
    let k_step = grid.d_v;

    for k in 0..grid.n_v - 1 {
        let v_new = grid.v(k + 1);
        let v_mid = grid.v(k) + 0.5 * k_step;
        let sources = cell_sources(sys, &grid, &g, v_mid);
        let ldata = sys.level_data(v_new);
        let old_jets: Vec<HalfJets> = old.iter().map(|f| half_jets(f, &g)).collect();
        let initial: Vec<Vec<f64>> = (0..nm)
            .map(|f| match &prev_marched {
                Some(prev) => old[f].iter().zip(&prev[f]).map(|(a, b)| 2.0 * a - b).collect(),
                None => old[f].clone(),
            })
            .collect();
        let boundary = |f: usize, j: usize| p.theta0.as_ref().map(|t| t[f][j + g.n_eta * (k + 1)]);

        let mut outcome = None;
        let mut last_change = f64::NAN;
        for (attempt, &omega) in [opts.damping, opts.fallback_damping].iter().enumerate() {
            let mut guess = initial.clone();
            if !periodic {
                for (f, gf) in guess.iter_mut().enumerate() {
                    for j in 0..g.n_eta {
                        gf[j * g.n_theta] = boundary(f, j).unwrap();
                    }
                }
            }
            let mut derived = vec![vec![0.0; ll]; nd];
            for it in 1..=opts.max_iter {
                if let Err(e) = sys.derive(v_new, &ldata, &guess, &mut derived) {
                    last_change = f64::NAN;
                    log::debug!("derive failed at level {}: {e}", k + 1);
                    break;
                }
                let new_jets: Vec<HalfJets> = guess.iter().chain(derived.iter()).map(|f| half_jets(f, &g)).collect();
                let cand = candidate(sys, &g, &old, &old_jets, &new_jets, &sources, k_step, &boundary);
                let mut change = 0.0f64;
                let mut scale = 1.0f64;
                let mut finite = true;
                for f in 0..nm {
                    for (x, c) in guess[f].iter_mut().zip(&cand[f]) {
                        let next = *x + omega * (c - *x);
                        finite &= next.is_finite();
                        change = change.max((next - *x).abs());
                        scale = scale.max(next.abs());
                        *x = next;
                    }
                }
                last_change = change;
                if !finite {
                    break;
                }
                if change <= opts.tol * scale {
                    outcome = Some((guess, it));
                    break;
                }
            }
            if outcome.is_some() {
                if attempt > 0 {
                    damped_levels.push(k + 1);
                }
                break;
            }
            log::debug!("level {} did not converge with damping {omega}", k + 1);
        }
        let Some((marched, its)) = outcome else {
            return Err(SolveError::NonConvergence { level: k + 1, v: v_new, iterations: opts.max_iter, change: last_change });
        };
        let mut derived = vec![vec![0.0; ll]; nd];
        sys.derive(v_new, &ldata, &marched, &mut derived)?;
        let mut level = marched.clone();
        level.extend(derived);
        check_level(sys, &grid, &g, &level, k + 1, opts)?;
        for f in 0..nj {
            fields[f][(k + 1) * ll..(k + 2) * ll].copy_from_slice(&level[f]);
        }
        iterations.push(its);
        prev_marched = Some(old[..nm].to_vec());
        old = level;
    }
    Ok(MarchOutput { fields, iterations, damped_levels })
}

fn cell_sources<S: LevelSystem>(sys: &S, grid: &Grid3, g: &Geometry, v_mid: f64) -> Vec<f64> {
    let ns = sys.n_sources();
    let nc = g.n_cells();
    if ns == 0 {
        return Vec::new();
    }
    let mut out = vec![0.0; ns * nc * g.n_eta];
    out.par_chunks_mut(ns * nc).enumerate().for_each(|(j, row)| {
        let eta = grid.eta(j);
        for c in 0..nc {
            let theta = grid.theta0 + (c as f64 + 0.5) * grid.d_theta;
            sys.cell_sources(theta, eta, v_mid, &mut row[c * ns..(c + 1) * ns]);
        }
    });
    out
}

/// One corner sweep given a guess for the new level; returns the updated marched fields.
#[allow(clippy::too_many_arguments)]
fn candidate<S: LevelSystem>(
    sys: &S,
    g: &Geometry,
    old: &[Vec<f64>],
    old_jets: &[HalfJets],
    new_jets: &[HalfJets],
    sources: &[f64],
    k_step: f64,
    boundary: &(dyn Fn(usize, usize) -> Option<f64> + Sync),
) -> Vec<Vec<f64>> {
    let nm = sys.n_marched();
    let nj = old_jets.len();
    let ns = sys.n_sources();
    let nc = g.n_cells();
    let n = g.n_theta;
    let hk = g.h_theta * k_step;
    let periodic = g.theta_mode == BoundaryMode::Periodic;
    let rows: Vec<Vec<f64>> = (0..g.n_eta)
        .into_par_iter()
        .map(|j| {
            let mut rhs = vec![0.0; nm * nc];
            let mut jets = [Jet::default(); MAX_JETS];
            let mut out = [0.0; MAX_JETS];
            for c in 0..nc {
                for f in 0..nj {
                    let a = old_jets[f].at(c, j);
                    let b = new_jets[f].at(c, j);
                    let mut m = (a + b) * 0.5;
                    m.v = (b.val - a.val) / k_step;
                    jets[f] = m;
                }
                let src = if ns > 0 { &sources[(c + nc * j) * ns..(c + nc * j + 1) * ns] } else { &[][..] };
                sys.rhs(&jets[..nj], src, &mut out[..nm]);
                for f in 0..nm {
                    rhs[f * nc + c] = out[f];
                }
            }
            let mut row = vec![0.0; nm * n];
            for f in 0..nm {
                let r = &mut rhs[f * nc..(f + 1) * nc];
                if periodic {
                    let mean = r.iter().sum::<f64>() / nc as f64;
                    r.iter_mut().for_each(|x| *x -= mean);
                }
                let o = &old[f][j * n..(j + 1) * n];
                let dst = &mut row[f * n..(f + 1) * n];
                dst[0] = boundary(f, j).unwrap_or(o[0]);
                for i in 0..n - 1 {
                    dst[i + 1] = o[i + 1] + ((dst[i] - o[i]) + hk * r[i]);
                }
                if periodic {
                    let mean = dst.iter().sum::<f64>() / n as f64;
                    dst.iter_mut().for_each(|x| *x -= mean);
                }
            }
            row
        })
        .collect();
    let mut cand = vec![vec![0.0; g.level_len()]; nm];
    for (j, row) in rows.into_iter().enumerate() {
        for f in 0..nm {
            cand[f][j * n..(j + 1) * n].copy_from_slice(&row[f * n..(f + 1) * n]);
        }
    }
    cand
}

fn check_level<S: LevelSystem>(sys: &S, grid: &Grid3, g: &Geometry, level: &[Vec<f64>], k: usize, opts: &MarchOptions) -> Result<(), SolveError> {
    let n = g.n_theta;
    for (f, vals) in level.iter().enumerate() {
        for (idx, &x) in vals.iter().enumerate() {
            let (i, j) = (idx % n, idx / n);
            let report = |kind, theta: f64, value| {
                SolveError::BlowUp(BlowUp { kind, field: sys.field_name(f).to_string(), theta, eta: grid.eta(j), v: grid.v(k), value })
            };
            if !x.is_finite() {
                return Err(report(BlowUpKind::NonFinite, grid.theta(i), x));
            }
            if let Some(cap) = opts.field_cap {
                if x.abs() > cap {
                    return Err(report(BlowUpKind::FieldMagnitude, grid.theta(i), x));
                }
            }
            if let (Some(cap), true) = (opts.gradient_cap, f < sys.n_marched() && i + 1 < n) {
                let grad = (vals[idx + 1] - x) / g.h_theta;
                if grad.abs() > cap {
                    return Err(report(BlowUpKind::Gradient, grid.theta(i) + 0.5 * g.h_theta, grad));
                }
            }
        }
    }
    Ok(())
}
