use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;
use std::time::Instant;

use gwd_core::classify::*;
use gwd_core::einstein::*;
use gwd_core::grid::{build_grid, estimate_order, integrate, BoundaryMode, ConvergenceReport, Grid3, GridFunction};
use gwd_core::optics::{solve_diffractive, solve_hs, RayCoefficients, WaveData, WaveOptions, WaveformMode};
use gwd_core::profiles::Profile;
use gwd_core::ricci::oracle::DEFAULT_STEP;
use gwd_core::ricci::reduced::{reduced_equation_match, AnalyticFields};
use gwd_core::ricci::verify::verify_random_plane_polarized;
use gwd_core::variational::{random_probes, variational_residual, verify_action, Direction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORDER_TOL: f64 = 0.3;

/// Writes the verdict line past the test harness capture, then fails the test if needed.
fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {id:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "{line}");
}

fn orders(r: &ConvergenceReport) -> String {
    format!("order {:.3}, errors {:?}", r.observed_order, r.errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>())
}

fn pw(amplitude: f64, k_theta: f64, k_eta: f64, k_v: f64, phase: f64) -> Profile {
    Profile::PlaneWave { amplitude, k_theta, k_eta, k_v, phase }
}

fn mono(coeff: f64, p_theta: u32, p_eta: u32, p_v: u32) -> Profile {
    Profile::Monomial { coeff, p_theta, p_eta, p_v }
}

fn gaussian(amplitude: f64, theta_width: f64, eta_width: Option<f64>) -> Profile {
    Profile::Gaussian { amplitude, theta_center: 0.5, theta_width, eta_center: 0.0, eta_width }
}

fn pulse(amplitude: f64, theta_width: f64, eta_width: Option<f64>) -> PulseSpec {
    PulseSpec { v: gaussian(amplitude, theta_width, eta_width), m: Profile::Zero, substeps: 4 }
}

fn slab(n: usize, ne: usize, nv: usize) -> Grid3 {
    build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [n, ne, nv]).unwrap()
}

fn manufactured() -> ManufacturedSolution {
    ManufacturedSolution {
        u: Profile::Product { factors: vec![pw(0.1, 1.0, 0.0, 2.0, 0.0), Profile::Sum { terms: vec![Profile::Constant { value: 1.0 }, mono(0.05, 0, 2, 0)] }] },
        v: Profile::Sum { terms: vec![pw(0.2, 1.0, 0.0, -1.0, 0.3), mono(0.05, 1, 1, 1)] },
        m: Profile::Sum { terms: vec![mono(0.1, 1, 1, 1), pw(0.1, 2.0, 0.0, 1.0, 0.0)] },
        y: Profile::Product { factors: vec![pw(0.025, 1.0, 0.0, 1.0, -FRAC_PI_2), mono(1.0, 0, 1, 0)] },
    }
}

fn exact_on(g: &Grid3, p: &Profile) -> GridFunction {
    GridFunction::from_fn(*g, |t, e, v| p.value(t, e, v))
}

#[test]
fn criterion_01_manufactured_einstein() {
    let start = Instant::now();
    let ms = manufactured();
    let src = ms.source();
    let opts = EvolveOptions { constraint_tolerance: None, ..Default::default() };
    let mut pairs = vec![Vec::new(); 4];
    for n in [33, 65, 129] {
        let g = slab(n, 33, n);
        let out = evolve_forced(&ms.boundary_data(&g), &g, &opts, Some(&src)).unwrap();
        let ex = ms.exact(&g);
        let f = &out.fields;
        let errs = [f.u.max_abs_diff(&ex.u), f.v.max_abs_diff(&ex.v), f.m.max_abs_diff(&ex.m), f.y.max_abs_diff(&ex.y)];
        for (p, e) in pairs.iter_mut().zip(errs) {
            p.push((g.d_theta, e.unwrap()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let reps: Vec<_> = pairs.iter().map(|p| estimate_order(p).unwrap()).collect();
    let pass = reps.iter().all(|r| r.order_within(2.0, ORDER_TOL)) && secs < 120.0;
    let detail = ["U", "V", "M", "Y"].iter().zip(&reps).map(|(n, r)| format!("{n} {:.3}", r.observed_order)).collect::<Vec<_>>().join(", ");
    verdict(1, "manufactured Einstein solution", pass, format!("{detail}; {secs:.1} s"));
}

#[test]
fn criterion_02_constraint_preservation() {
    let mut pairs = Vec::new();
    for (n, ne, nv) in [(33, 17, 9), (65, 33, 33), (129, 65, 129)] {
        let g = slab(n, ne, nv);
        let data = BoundaryData::constrained_pulse(&g, &pulse(0.04, 0.2, Some(1.5))).unwrap();
        let out = evolve(&data, &g, &EvolveOptions::default()).unwrap();
        let mon = monitor_constraint(&out.fields).unwrap();
        pairs.push((g.d_theta, mon.max_abs_by_v.iter().copied().fold(0.0, f64::max)));
    }
    let r = estimate_order(&pairs).unwrap();
    let finest = pairs[2].1;
    verdict(2, "constraint preservation", r.order_within(2.0, ORDER_TOL) && finest < 1e-4, orders(&r));
}

#[test]
fn criterion_03_reduction_to_colliding_waves() {
    let start = Instant::now();
    let g = build_grid([(0.0, 1.0), (-1.0, 1.0), (0.0, 1.0)], [65, 5, 65]).unwrap();
    let data = BoundaryData::constrained_pulse(&g, &pulse(0.5, 0.15, None)).unwrap();
    let out = evolve(&data, &g, &EvolveOptions::default()).unwrap();
    let plane = Grid3::plane((0.0, 1.0), 65, (0.0, 1.0), 65).unwrap();
    let mut d = 0.0f64;
    for j in 0..g.n_eta {
        let col = solve_colliding(&data.row(&g, j), &plane, &EvolveOptions::default()).unwrap();
        for k in 0..g.n_v {
            for i in 0..g.n_theta {
                let f = &out.fields;
                d = d.max((f.u.get(i, j, k) - col.u.get(i, 0, k)).abs());
                d = d.max((f.v.get(i, j, k) - col.v.get(i, 0, k)).abs());
                d = d.max((f.m.get(i, j, k) - col.m.get(i, 0, k)).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(3, "reduction consistency", d < 1e-10 && secs < 10.0, format!("max slice difference {d:.2e}; {secs:.2} s"));
}

#[test]
fn criterion_04_exact_colliding_family() {
    let u = Profile::LogLinear { scale: -1.0, offset: 2.0, c_theta: 1.0, c_eta: 0.0, c_v: 1.0 };
    let opts = EvolveOptions { constraint_tolerance: None, ..Default::default() };
    let mut pairs = Vec::new();
    for n in [33, 65, 129] {
        let g = Grid3::plane((0.0, 1.0), n, (0.0, 1.0), n).unwrap();
        let data = CollidingData::from_profiles(&g, &u, &Profile::Zero, &Profile::Zero);
        let sol = solve_colliding(&data, &g, &opts).unwrap();
        pairs.push((g.d_theta, sol.u.max_abs_diff(&exact_on(&g, &u)).unwrap()));
    }
    let r = estimate_order(&pairs).unwrap();
    verdict(4, "exact colliding-wave family", r.order_within(2.0, ORDER_TOL) && pairs[2].1 < 1e-5, orders(&r));
}

#[test]
fn criterion_05_hunter_saxton_exact_solution() {
    let p = Profile::HsLinear { c0: 1.0 };
    let coeffs = RayCoefficients::constant(0.0, 1.0, 0.0);
    let mut pairs = Vec::new();
    for n in [33, 65, 129] {
        let g = Grid3::plane((0.0, 1.0), n, (0.0, 1.0), n).unwrap();
        let data = WaveData::from_profile(&g, &p, WaveformMode::Localized);
        let s = solve_hs(&data, &coeffs, WaveformMode::Localized, &g, &WaveOptions::default()).unwrap();
        pairs.push((g.d_theta, s.a.max_abs_diff(&exact_on(&g, &p)).unwrap()));
    }
    let r = estimate_order(&pairs).unwrap();
    verdict(5, "Hunter-Saxton exact solution", r.order_within(2.0, ORDER_TOL) && pairs[2].1 < 1e-5, orders(&r));
}

#[test]
fn criterion_06_parabolic_plane_wave() {
    let p = pw(1.0, 1.0, 1.0, 0.5, 0.0);
    let coeffs = RayCoefficients::constant(0.0, 0.0, -1.0);
    let opts = WaveOptions { eta_boundary: BoundaryMode::Periodic, ..Default::default() };
    let mut pairs = Vec::new();
    for (n, ne) in [(9, 16), (17, 32), (33, 64)] {
        let h_eta = TAU / ne as f64;
        let nv = (1.0 / (0.4 * h_eta * h_eta)).ceil() as usize + 1;
        let g = Grid3::from_spacing([n, ne, nv], [0.0, 0.0, 0.0], [1.0 / (n - 1) as f64, h_eta, 1.0 / (nv - 1) as f64]).unwrap();
        let data = WaveData::from_profile(&g, &p, WaveformMode::Localized);
        let s = solve_diffractive(&data, &coeffs, &g, &opts).unwrap();
        pairs.push((h_eta, s.a.max_abs_diff(&exact_on(&g, &p)).unwrap()));
    }
    let r = estimate_order(&pairs).unwrap();
    verdict(6, "parabolic plane wave", r.order_within(2.0, ORDER_TOL), orders(&r));
}

#[test]
fn criterion_07_linearization() {
    let g = slab(65, 33, 65);
    let vh = gaussian(1.0, 0.15, Some(1.0));
    let reps: Vec<_> = [1e-2, 5e-3, 2.5e-3].iter().map(|&e| linearization_check(e, &vh, &g, &EvolveOptions::default()).unwrap()).collect();
    let r = estimate_order(&reps.iter().map(|r| (r.epsilon, r.absolute_defect)).collect::<Vec<_>>()).unwrap();
    let ratios: Vec<f64> = reps.iter().map(|r| r.max_abs_u / (r.epsilon * r.epsilon)).collect();
    let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = r.order_within(2.0, ORDER_TOL) && spread < 1.1;
    verdict(7, "linearization", pass, format!("defect slope {:.3}; max|U|/eps^2 {ratios:.3?}", r.observed_order));
}

#[test]
fn criterion_08_expansion_formulas_against_brute_force() {
    let start = Instant::now();
    let s = verify_random_plane_polarized(100, 2024, DEFAULT_STEP).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = s.max_defect < 1e-6 && s.zero_pattern_ok && secs < 60.0;
    verdict(8, "connection and Ricci order formulas", pass, format!("max defect {:.2e} ({}), zero pattern {}; {secs:.1} s", s.max_defect, s.worst_component, s.zero_pattern_ok));
}

#[test]
fn criterion_09_reduced_equations_match_ricci() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_exact = 0.0f64;
    for c in [0.3, 0.7, 1.5] {
        let ll = |scale| Profile::LogLinear { scale, offset: 1.0, c_theta: c, c_eta: 0.0, c_v: 0.0 };
        let f = AnalyticFields { u: ll(-1.0), v: ll(1.0), m: Profile::Zero, y: Profile::Zero };
        for _ in 0..5 {
            let rep = reduced_equation_match(&f, rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0), 1e-9).unwrap();
            worst_exact = worst_exact.max(rep.max_abs_ricci());
        }
    }
    let t = mono(1.0, 1, 0, 0);
    let bad = AnalyticFields { u: t.clone(), v: t, m: Profile::Zero, y: Profile::Zero };
    let mut factors = Vec::new();
    let mut min_component = f64::INFINITY;
    for _ in 0..20 {
        let rep = reduced_equation_match(&bad, rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0), 1e-9).unwrap();
        let c = rep.components.iter().find(|c| c.component == "R4_00").unwrap();
        min_component = min_component.min(c.ricci.abs());
        factors.push(c.factor.unwrap_or(f64::NAN));
    }
    let (lo, hi) = (factors.iter().copied().fold(f64::INFINITY, f64::min), factors.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let constant = lo.is_finite() && hi.is_finite() && (hi - lo).abs() <= 0.01 * lo.abs();
    let pass = worst_exact < 1e-9 && min_component > 1e-6 && constant;
    verdict(9, "reduced equations against Ricci", pass, format!("exact max {worst_exact:.1e}; violated min |R| {min_component:.2e}, factor in [{lo}, {hi}]"));
}

fn pulse_solution(g: &Grid3) -> FieldSet {
    let data = BoundaryData::constrained_pulse(g, &pulse(0.2, 0.2, Some(1.5))).unwrap();
    evolve(&data, g, &EvolveOptions::default()).unwrap().fields
}

fn constraint_oracle(g: &Grid3, u: &Profile, v: &Profile, m: &Profile, probe: &GridFunction) -> f64 {
    let f = GridFunction::from_fn(*g, |t, e, w| {
        let (ju, jv, jm) = (u.jet(t, e, w), v.jet(t, e, w), m.jet(t, e, w));
        (-ju.value).exp() * constraint_value(ju.grad[0], ju.hess[0][0], jv.grad[0], jm.grad[0])
    });
    integrate(&f.zip_map(probe, |a, b| a * b).unwrap())
}

#[test]
fn criterion_10_variational_stationarity() {
    let mut pairs = vec![Vec::new(); Direction::ALL.len()];
    for (n, ne, nv) in [(33, 17, 17), (65, 33, 65), (129, 65, 257)] {
        let g = slab(n, ne, nv);
        let rep = verify_action(&pulse_solution(&g), 10, 17, 1e-4, BoundaryMode::OneSided).unwrap();
        for (p, d) in pairs.iter_mut().zip(&rep.residuals_by_direction) {
            p.push((g.d_theta, d.max_abs));
        }
    }
    let min_order = pairs.iter().map(|p| estimate_order(p).unwrap().observed_order).fold(f64::INFINITY, f64::min);

    let g = build_grid([(0.0, 1.0), (-1.0, 1.0), (0.0, 1.0)], [513, 17, 17]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut wave = || pw(rng.random_range(0.1..0.5), rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..6.0));
    let (u, v, m, y) = (wave(), wave(), wave(), wave());
    let fields = FieldSet::from_profiles(g, &u, &v, &m, &y);
    let mut worst = 0.0f64;
    for probe in random_probes(g, 3, 11) {
        let r = variational_residual(&fields, Direction::T, &probe, 1e-3, BoundaryMode::OneSided).unwrap();
        worst = worst.max((r - constraint_oracle(&g, &u, &v, &m, &probe)).abs());
    }
    let pass = min_order >= 2.0 - ORDER_TOL && worst < 1e-6;
    verdict(10, "variational stationarity", pass, format!("min residual order {min_order:.3}; T-direction oracle gap {worst:.1e}"));
}

#[test]
fn criterion_11_classifier() {
    let sys = BuiltinSystem::ScalarWave { space_dims: 2, speed: vec![1.0, 1.0] };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g0: f64 = rng.random_range(-0.5..1.5);
        let k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let c: f64 = 1.0 + g0;
        let du = [c * f64::hypot(k[0], k[1]), k[0], k[1]];
        let cm = eikonal_matrix(&sys, &[g0], &du).unwrap();
        let data = null_space_scaled(&cm, DEFAULT_KERNEL_TOLERANCE, eikonal_scale(&sys, &[g0], &du));
        let lam = lambda_tensor(&sys, &[g0], &du, &data.null_basis).unwrap();
        let grad2 = k[0] * k[0] + k[1] * k[1];
        worst = worst.max((lam.values[0] + grad2 * c).abs());
    }

    let spec = SampleSpec { g0: vec![vec![0.0], vec![0.7]], du: vec![], wave_vectors: vec![vec![1.0, 0.0], vec![0.3, -0.4]] };
    let constant = BuiltinSystem::ScalarWave { space_dims: 2, speed: vec![2.0] };
    let v_const = classify_characteristic(&constant, &spec, &ClassifyOptions::default()).unwrap().verdict;

    let e = |alpha, beta, p, q, c| PolynomialEntry { alpha, beta, p, q, terms: vec![Monomial { coeff: c, powers: vec![] }] };
    let pair = BuiltinSystem::Polynomial {
        space_dims: 1,
        fields: 2,
        entries: vec![e(0, 0, 0, 0, 1.0), e(0, 0, 1, 1, 1.0), e(1, 1, 0, 0, -1.0), e(1, 1, 0, 1, -0.3), e(1, 1, 1, 1, -2.0)],
    };
    let spec2 = SampleSpec { g0: vec![vec![0.0, 0.0], vec![0.4, -1.0]], du: vec![], wave_vectors: vec![vec![1.0], vec![-0.7]] };
    let v_pair = classify_characteristic(&pair, &spec2, &ClassifyOptions::default()).unwrap().verdict;

    let pass = worst < 1e-12 && v_const == Verdict::LinearlyDegenerate && v_pair == Verdict::LinearlyDegenerate;
    verdict(11, "classifier", pass, format!("scalar Lambda error {worst:.1e}; constant speed {v_const:?}; two-component {v_pair:?}"));
}
