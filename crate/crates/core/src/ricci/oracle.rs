//! Brute-force ε-coefficient extraction.
//!
//! At a fixed ε the metric `g⁽⁰⁾ + εg⁽¹⁾ + ε²g⁽²⁾` is assembled with its full
//! first and second derivatives under the multiple-scale chain rule, then the exact
//! Christoffel symbols and Ricci tensor are formed with a full matrix inverse. All of
//! this runs in double-double arithmetic. `ε²Γ(ε)` and `ε⁴R(ε)` are sampled on
//! `ε = h, h/2, h/4, h/8` and their leading three Taylor coefficients are peeled off
//! one at a time with 4-point Richardson tables.

use super::{invert4, map2, map3, ChristoffelOrders, MetricJets, RicciError, RicciOrders, Tensor2, Tensor3, NZ};
use crate::dual::DoubleDouble as Dd;

/// Largest sampled ε.
pub const DEFAULT_STEP: f64 = 1e-6;

fn dd(x: f64) -> Dd {
    Dd::new(x)
}

/// Exact connection and Ricci tensor of the assembled metric at one ε.
#[derive(Clone, Debug)]
pub struct ExactCurvature {
    pub christoffel: Tensor3<Dd>,
    pub ricci: Tensor2<Dd>,
}

pub fn exact_curvature(j: &MetricJets, eps: Dd) -> Result<ExactCurvature, RicciError> {
    let inv_eps = dd(1.0) / eps;
    // c[μ][i]: coefficient of ∂_i in the total derivative ∂/∂x^μ
    let c: [[Dd; NZ]; 4] = std::array::from_fn(|m| {
        std::array::from_fn(|i| match i {
            0 => dd(j.u[m]) * inv_eps * inv_eps,
            1 | 2 => dd(j.y[i - 1][m]) * inv_eps,
            _ => dd(if i - 3 == m { 1.0 } else { 0.0 }),
        })
    });
    let powers = [dd(1.0), eps, eps * eps];
    let mut g = [[dd(0.0); 4]; 4];
    let mut dg = [[[dd(0.0); 4]; 4]; 4];
    let mut ddg = [[[[dd(0.0); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut grad = [dd(0.0); NZ];
            let mut hess = [[dd(0.0); NZ]; NZ];
            for (k, p) in powers.iter().enumerate() {
                let x = &j.g[k][a][b];
                g[a][b] += *p * dd(x.re.re);
                for i in 0..NZ {
                    grad[i] += *p * dd(x.re.du[i]);
                    for l in 0..NZ {
                        hess[i][l] += *p * dd(x.du[i].du[l]);
                    }
                }
            }
            for m in 0..4 {
                dg[m][a][b] = (0..NZ).fold(dd(0.0), |s, i| s + c[m][i] * grad[i]);
                for n in 0..4 {
                    let mut s = dd(0.0);
                    for i in 0..NZ {
                        let ci = c[m][i];
                        if ci.hi == 0.0 {
                            continue;
                        }
                        for l in 0..NZ {
                            s += ci * c[n][l] * hess[i][l];
                        }
                    }
                    ddg[m][n][a][b] = s;
                }
            }
        }
    }
    let gi = invert4(&g, dd(0.0), dd(1.0), |x| x.hi.abs()).ok_or(RicciError::SingularMetric)?;
    // first kind: [μ][α][β]
    let first = map3(|m, a, b| (dg[a][b][m] + dg[b][a][m] - dg[m][a][b]) * dd(0.5));
    let first_d: [Tensor3<Dd>; 4] = std::array::from_fn(|r| map3(|m, a, b| (ddg[r][a][b][m] + ddg[r][b][a][m] - ddg[r][m][a][b]) * dd(0.5)));
    let sum = |f: &dyn Fn(usize) -> Dd| (0..4).fold(dd(0.0), |s, m| s + f(m));
    let gamma: Tensor3<Dd> = map3(|l, a, b| sum(&|m| gi[l][m] * first[m][a][b]));
    let dgamma: [Tensor3<Dd>; 4] = std::array::from_fn(|r| map3(|l, a, b| sum(&|m| gi[l][m] * (first_d[r][m][a][b] - sum(&|s| dg[r][m][s] * gamma[s][a][b])))));
    let ricci = map2(|a, b| {
        let mut s = dd(0.0);
        for l in 0..4 {
            s += dgamma[l][l][a][b] - dgamma[a][l][b][l];
            for m in 0..4 {
                s += gamma[l][a][b] * gamma[m][l][m] - gamma[m][a][l] * gamma[l][b][m];
            }
        }
        s
    });
    Ok(ExactCurvature { christoffel: gamma, ricci })
}

/// Richardson extrapolation to `ε = 0` of samples on `h, h/2, h/4, h/8`.
fn richardson(x: [Dd; 4]) -> Dd {
    let mut t = x;
    for k in 1..4 {
        let f = dd(1.0) / dd(((1u32 << k) - 1) as f64);
        for i in (k..4).rev() {
            t[i] = t[i] + (t[i] - t[i - 1]) * f;
        }
    }
    t[3]
}

/// First three Taylor coefficients of each component of `F(ε)`, given samples at `eps[0..4]`.
fn leading_coefficients(eps: [Dd; 4], samples: [Vec<Dd>; 4]) -> Vec<[f64; 3]> {
    let n = samples[0].len();
    (0..n)
        .map(|c| {
            let mut f: [Dd; 4] = std::array::from_fn(|s| samples[s][c]);
            let mut out = [0.0; 3];
            for o in out.iter_mut() {
                let a = richardson(f);
                *o = a.to_f64();
                for s in 0..4 {
                    f[s] = (f[s] - a) / eps[s];
                }
            }
            out
        })
        .collect()
}

/// Connection and Ricci orders extracted from the exact curvature of the assembled metric.
#[derive(Clone, Debug)]
pub struct BruteForceOrders {
    pub christoffel: ChristoffelOrders,
    pub ricci: RicciOrders,
}

pub fn brute_force_orders(j: &MetricJets, step: f64) -> Result<BruteForceOrders, RicciError> {
    let eps: [Dd; 4] = std::array::from_fn(|s| dd(step) / dd((1u32 << s) as f64));
    let mut gsamples: [Vec<Dd>; 4] = Default::default();
    let mut rsamples: [Vec<Dd>; 4] = Default::default();
    for s in 0..4 {
        let e = eps[s];
        let e2 = e * e;
        let e4 = e2 * e2;
        let ex = exact_curvature(j, e)?;
        gsamples[s] = ex.christoffel.iter().flatten().flatten().map(|x| *x * e2).collect();
        rsamples[s] = ex.ricci.iter().flatten().map(|x| *x * e4).collect();
    }
    let gc = leading_coefficients(eps, gsamples);
    let rc = leading_coefficients(eps, rsamples);
    let gam = |o: usize| map3(|l, a, b| gc[16 * l + 4 * a + b][o]);
    let ric = |o: usize| map2(|a, b| rc[4 * a + b][o]);
    Ok(BruteForceOrders {
        christoffel: ChristoffelOrders { minus2: gam(0), minus1: gam(1), zero: gam(2) },
        ricci: RicciOrders { r4: ric(0), r3: ric(1), r2: ric(2) },
    })
}

/// `ε⁴ R_{αβ}(ε)` of the assembled metric in double precision.
pub fn scaled_ricci(j: &MetricJets, eps: f64) -> Result<Tensor2<f64>, RicciError> {
    let e = dd(eps);
    let e4 = e * e * e * e;
    let ex = exact_curvature(j, e)?;
    Ok(map2(|a, b| (ex.ricci[a][b] * e4).to_f64()))
}
