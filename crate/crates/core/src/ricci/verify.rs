use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block_lists::{christoffel_lists, christoffel_may_be_nonzero, ricci_lists, ricci_may_be_nonzero};
use super::oracle::brute_force_orders;
use super::{christoffel_jets, ricci_from_jets, ExpansionPoint, MetricExpansion, MetricJets, MetricOrders, PlanePolarizedMetric, RicciError};

/// Components below this magnitude count as zero in the pattern check.
pub const ZERO_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentCheck {
    pub list_value: f64,
    pub bruteforce_value: f64,
    /// `|block_lists − brute force| / max(1, |brute force|)`.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciReport {
    pub point: ExpansionPoint,
    pub per_component: BTreeMap<String, ComponentCheck>,
    /// `None` when the metric is not in block form and no pattern is claimed.
    pub zero_pattern_ok: Option<bool>,
    pub max_defect: f64,
}

const ORDER_GAMMA: [&str; 3] = ["-2", "-1", "0"];
const ORDER_RICCI: [&str; 3] = ["-4", "-3", "-2"];

fn check(a: f64, b: f64) -> ComponentCheck {
    ComponentCheck { list_value: a, bruteforce_value: b, defect: (a - b).abs() / b.abs().max(1.0) }
}

fn is_block(j: &MetricJets) -> bool {
    let zero = |k: usize, a: usize, b: usize| {
        let x = &j.g[k][a][b];
        x.re.re == 0.0 && x.re.du.iter().all(|d| *d == 0.0) && x.du.iter().all(|d| d.re == 0.0 && d.du.iter().all(|e| *e == 0.0))
    };
    let unit = |v: &[f64; 4], i: usize| v.iter().enumerate().all(|(k, x)| *x == if k == i { 1.0 } else { 0.0 });
    if !(unit(&j.u, 0) && unit(&j.y[0], 2) && unit(&j.y[1], 3)) {
        return false;
    }
    (0..4).all(|a| {
        (0..4).all(|b| {
            let (p, q) = (a.min(b), a.max(b));
            let allowed = [(p, q) == (0, 1) || p >= 2, (p == 1 && q >= 2) || p >= 2, p >= 1];
            (0..3).all(|k| allowed[k] || zero(k, a, b))
        })
    })
}

fn g2_vanishes(j: &MetricJets) -> bool {
    j.g[2].iter().flatten().all(|x| x.re.re == 0.0 && x.re.du.iter().all(|d| *d == 0.0) && x.du.iter().all(|d| d.re == 0.0 && d.du.iter().all(|e| *e == 0.0)))
}

/// Compares every general order formula, and for block-form metrics every listed
/// component, with brute-force ε-extraction at `point`.
///
/// The listed `ε⁻²` Ricci components omit `g⁽²⁾` contributions, so they are only
/// compared when `g⁽²⁾` vanishes identically at the point.
pub fn verify_point<M: MetricOrders>(metric: &MetricExpansion<M>, point: &ExpansionPoint, step: f64) -> Result<RicciReport, RicciError> {
    let j = metric.jets(point)?;
    let cj = christoffel_jets(&j)?;
    let gamma = cj.values();
    let ricci = ricci_from_jets(&j, &cj);
    let bf = brute_force_orders(&j, step)?;
    let mut per = BTreeMap::new();

    let gam_f = [&gamma.minus2, &gamma.minus1, &gamma.zero];
    let gam_b = [&bf.christoffel.minus2, &bf.christoffel.minus1, &bf.christoffel.zero];
    let ric_f = [&ricci.r4, &ricci.r3, &ricci.r2];
    let ric_b = [&bf.ricci.r4, &bf.ricci.r3, &bf.ricci.r2];
    for o in 0..3 {
        for l in 0..4 {
            for a in 0..4 {
                for b in a..4 {
                    per.insert(format!("general:Gamma({})^{l}_{a}{b}", ORDER_GAMMA[o]), check(gam_f[o][l][a][b], gam_b[o][l][a][b]));
                }
            }
        }
        for a in 0..4 {
            for b in a..4 {
                per.insert(format!("general:R({})_{a}{b}", ORDER_RICCI[o]), check(ric_f[o][a][b], ric_b[o][a][b]));
            }
        }
    }

    let block = is_block(&j);
    let mut zero_pattern_ok = None;
    if block {
        let lists = christoffel_lists(&j)?;
        let lists = [&lists.minus2, &lists.minus1, &lists.zero];
        let mut ok = true;
        for o in 0..3 {
            for l in 0..4 {
                for a in 0..4 {
                    for b in a..4 {
                        if christoffel_may_be_nonzero(o, l, a, b) {
                            per.insert(format!("lists:Gamma({})^{l}_{a}{b}", ORDER_GAMMA[o]), check(lists[o][l][a][b], gam_b[o][l][a][b]));
                        } else {
                            ok &= gam_f[o][l][a][b].abs() < ZERO_TOLERANCE && gam_b[o][l][a][b].abs() < ZERO_TOLERANCE;
                        }
                    }
                }
            }
            for a in 0..4 {
                for b in a..4 {
                    if !ricci_may_be_nonzero(o, a, b) {
                        ok &= ric_f[o][a][b].abs() < ZERO_TOLERANCE && ric_b[o][a][b].abs() < ZERO_TOLERANCE;
                    }
                }
            }
        }
        zero_pattern_ok = Some(ok);
        let r = ricci_lists(&j)?;
        per.insert("lists:R(-4)_00".into(), check(r.r4_00, bf.ricci.r4[0][0]));
        per.insert("lists:R(-3)_00".into(), check(r.r3_00, bf.ricci.r3[0][0]));
        for (i, a) in [2, 3].into_iter().enumerate() {
            per.insert(format!("lists:R(-3)_0{a}"), check(r.r3_0a[i], bf.ricci.r3[0][a]));
        }
        if g2_vanishes(&j) {
            per.insert("lists:R(-2)_01".into(), check(r.r2_01, bf.ricci.r2[0][1]));
            for (ia, a) in [2, 3].into_iter().enumerate() {
                for (ib, b) in [2, 3].into_iter().enumerate().skip(ia) {
                    per.insert(format!("lists:R(-2)_{a}{b}"), check(r.r2_ab[ia][ib], bf.ricci.r2[a][b]));
                }
            }
        }
    }
    let max_defect = per.values().fold(0.0f64, |m, c| m.max(c.defect));
    Ok(RicciReport { point: *point, per_component: per, zero_pattern_ok, max_defect })
}

/// Summary over many random plane-polarized points with `T = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciSweep {
    pub points: usize,
    pub seed: u64,
    pub max_defect: f64,
    pub worst_component: String,
    pub zero_pattern_ok: bool,
    pub max_ricci_asymmetry: f64,
}

/// Random smooth plane-polarized fields and a random point, reproducible from `seed`.
pub fn random_plane_polarized_case(rng: &mut impl Rng) -> (MetricExpansion<PlanePolarizedMetric>, ExpansionPoint) {
    let m = PlanePolarizedMetric::random(rng, false).expansion();
    let p = ExpansionPoint {
        theta: rng.random_range(-1.0..1.0),
        eta: [rng.random_range(-1.0..1.0), 0.0],
        x: [0.0, rng.random_range(-1.0..1.0), 0.0, 0.0],
    };
    (m, p)
}

pub fn verify_random_plane_polarized(n_points: usize, seed: u64, step: f64) -> Result<RicciSweep, RicciError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<_> = (0..n_points).map(|_| random_plane_polarized_case(&mut rng)).collect();
    let reports = cases
        .par_iter()
        .map(|(m, p)| {
            let rep = verify_point(m, p, step)?;
            let r = super::ricci_orders(m, p)?;
            let asym = [&r.r4, &r.r3, &r.r2].iter().map(|t| super::asymmetry(t)).fold(0.0, f64::max);
            Ok((rep, asym))
        })
        .collect::<Result<Vec<_>, RicciError>>()?;
    let mut sweep = RicciSweep { points: n_points, seed, max_defect: 0.0, worst_component: String::new(), zero_pattern_ok: true, max_ricci_asymmetry: 0.0 };
    for (rep, asym) in &reports {
        sweep.zero_pattern_ok &= rep.zero_pattern_ok.unwrap_or(false);
        sweep.max_ricci_asymmetry = sweep.max_ricci_asymmetry.max(*asym);
        for (k, c) in &rep.per_component {
            if c.defect > sweep.max_defect || sweep.worst_component.is_empty() {
                sweep.max_defect = sweep.max_defect.max(c.defect);
                sweep.worst_component = k.clone();
            }
        }
    }
    Ok(sweep)
}
