use gwd_core::einstein::*;
use gwd_core::grid::{build_grid, estimate_order, Grid3};
use gwd_core::profiles::Profile;

fn pw(amplitude: f64, k_theta: f64, k_eta: f64, k_v: f64, phase: f64) -> Profile {
    Profile::PlaneWave { amplitude, k_theta, k_eta, k_v, phase }
}

fn mono(coeff: f64, p_theta: u32, p_eta: u32, p_v: u32) -> Profile {
    Profile::Monomial { coeff, p_theta, p_eta, p_v }
}

fn manufactured() -> ManufacturedSolution {
    let sin = -std::f64::consts::FRAC_PI_2;
    ManufacturedSolution {
        u: Profile::Product { factors: vec![pw(0.1, 1.0, 0.0, 2.0, 0.0), Profile::Sum { terms: vec![Profile::Constant { value: 1.0 }, mono(0.05, 0, 2, 0)] }] },
        v: Profile::Sum { terms: vec![pw(0.2, 1.0, 0.0, -1.0, 0.3), mono(0.05, 1, 1, 1)] },
        m: Profile::Sum { terms: vec![mono(0.1, 1, 1, 1), pw(0.1, 2.0, 0.0, 1.0, 0.0)] },
        y: Profile::Product { factors: vec![pw(0.025, 1.0, 0.0, 1.0, sin), mono(1.0, 0, 1, 0)] },
    }
}

fn pulse(amplitude: f64, eta_width: Option<f64>) -> PulseSpec {
    PulseSpec {
        v: Profile::Gaussian { amplitude, theta_center: 0.5, theta_width: 0.2, eta_center: 0.0, eta_width },
        m: Profile::Zero,
        substeps: 4,
    }
}

#[test]
fn manufactured_fields_converge_at_second_order() {
    let ms = manufactured();
    let src = ms.source();
    let mut pairs = vec![Vec::new(); 4];
    for n in [17, 33, 65] {
        let g = build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [n, 17, n]).unwrap();
        let opts = EvolveOptions { constraint_tolerance: None, ..Default::default() };
        let out = evolve_forced(&ms.boundary_data(&g), &g, &opts, Some(&src)).unwrap();
        let ex = ms.exact(&g);
        let errs = [
            out.fields.u.max_abs_diff(&ex.u).unwrap(),
            out.fields.v.max_abs_diff(&ex.v).unwrap(),
            out.fields.m.max_abs_diff(&ex.m).unwrap(),
            out.fields.y.max_abs_diff(&ex.y).unwrap(),
        ];
        for (p, e) in pairs.iter_mut().zip(errs) {
            p.push((g.d_theta, e));
        }
    }
    for (name, p) in ["U", "V", "M", "Y"].iter().zip(&pairs) {
        let rep = estimate_order(p).unwrap();
        assert!((rep.observed_order - 2.0).abs() < 0.3, "{name}: {rep:?}");
    }
}

#[test]
fn constraint_drift_shrinks_under_joint_refinement() {
    let mut pairs = Vec::new();
    for (n, ne, nv) in [(17, 9, 3), (33, 17, 9), (65, 33, 33)] {
        let g = build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [n, ne, nv]).unwrap();
        let data = BoundaryData::constrained_pulse(&g, &pulse(0.04, Some(1.5))).unwrap();
        let out = evolve(&data, &g, &EvolveOptions::default()).unwrap();
        let mon = monitor_constraint(&out.fields).unwrap();
        assert_eq!(mon.max_abs_by_v, out.report.constraint_max_by_v);
        pairs.push((g.d_theta, mon.max_abs_by_v.iter().copied().fold(0.0, f64::max)));
    }
    assert!(pairs[2].1 < pairs[1].1 && pairs[1].1 < pairs[0].1, "{pairs:?}");
    assert!(pairs[2].1 < 5e-4, "{pairs:?}");
}

#[test]
fn eta_independent_data_reduce_to_colliding_waves() {
    let g = build_grid([(0.0, 1.0), (-1.0, 1.0), (0.0, 1.0)], [33, 5, 33]).unwrap();
    let data = BoundaryData::constrained_pulse(&g, &pulse(0.5, None)).unwrap();
    let out = evolve(&data, &g, &EvolveOptions::default()).unwrap();
    let plane = Grid3::plane((0.0, 1.0), 33, (0.0, 1.0), 33).unwrap();
    let col = solve_colliding(&data.row(&g, 2), &plane, &EvolveOptions::default()).unwrap();
    let mut d = 0.0f64;
    for k in 0..33 {
        for j in 0..5 {
            for i in 0..33 {
                d = d.max((out.fields.u.get(i, j, k) - col.u.get(i, 0, k)).abs());
                d = d.max((out.fields.v.get(i, j, k) - col.v.get(i, 0, k)).abs());
                d = d.max((out.fields.m.get(i, j, k) - col.m.get(i, 0, k)).abs());
            }
        }
    }
    assert!(d < 1e-10, "{d:e}");
    assert!(out.fields.y.max_abs() < 1e-14);
}

#[test]
fn linearization_defect_is_quadratic_in_amplitude() {
    let g = build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [33, 17, 33]).unwrap();
    let vh = Profile::Gaussian { amplitude: 1.0, theta_center: 0.5, theta_width: 0.2, eta_center: 0.0, eta_width: Some(1.0) };
    let reps: Vec<_> = [1e-2, 5e-3].iter().map(|&e| linearization_check(e, &vh, &g, &EvolveOptions::default()).unwrap()).collect();
    let slope = (reps[0].absolute_defect / reps[1].absolute_defect).log2();
    assert!((slope - 2.0).abs() < 0.3, "{slope}");
    let ratio = |r: &LinearizationReport| r.max_abs_u / (r.epsilon * r.epsilon);
    assert!((ratio(&reps[0]) / ratio(&reps[1]) - 1.0).abs() < 0.05);
}

#[test]
fn unsatisfied_constraint_is_rejected_unless_disabled() {
    let g = build_grid([(0.0, 1.0), (-1.0, 1.0), (0.0, 1.0)], [17, 5, 9]).unwrap();
    let t = mono(1.0, 1, 0, 0);
    let data = BoundaryData::from_profiles(&g, &BoundaryProfiles { u: t.clone(), v: t, m: Profile::Zero, y: Profile::Zero });
    assert!(evolve(&data, &g, &EvolveOptions::default()).is_err());
    let opts = EvolveOptions { constraint_tolerance: None, ..Default::default() };
    assert!(evolve(&data, &g, &opts).is_ok());
}
