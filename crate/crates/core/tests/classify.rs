use gwd_core::classify::*;
use gwd_core::dual::Real;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linear_speed() -> BuiltinSystem {
    BuiltinSystem::ScalarWave { space_dims: 2, speed: vec![1.0, 1.0] }
}

fn coupled_constant() -> BuiltinSystem {
    let e = |alpha, beta, p, q, c| PolynomialEntry { alpha, beta, p, q, terms: vec![Monomial { coeff: c, powers: vec![] }] };
    BuiltinSystem::Polynomial {
        space_dims: 1,
        fields: 2,
        entries: vec![e(0, 0, 0, 0, 1.0), e(0, 0, 1, 1, 1.0), e(1, 1, 0, 0, -1.0), e(1, 1, 0, 1, -0.3), e(1, 1, 1, 1, -2.0)],
    }
}

/// Quadratic three-component system with mixed space-time terms.
struct Coupled;

impl VariationalSystem for Coupled {
    fn spacetime_dim(&self) -> usize {
        3
    }
    fn fields(&self) -> usize {
        3
    }
    fn coefficient<R: Real>(&self, g: &[R], a: usize, b: usize, p: usize, q: usize) -> R {
        let (a, b, p, q) = (a.min(b), a.max(b), p.min(q), p.max(q));
        let base = match (a, b) {
            (0, 0) => 1.0,
            (1, 1) | (2, 2) => -1.0,
            (0, 1) => 0.1,
            _ => 0.0,
        };
        let diag = if p == q { R::cst(base) } else { R::zero() };
        diag + g[p] * g[q] * (0.2 * (a + b + 1) as f64) + g[(p + q + a + b) % 3] * 0.3
    }
}

#[test]
fn scalar_wave_lambda_on_random_characteristic_samples() {
    let sys = linear_speed();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let g0 = rng.random_range(-0.5..1.5);
        let k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let c = 1.0 + g0;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let du = [sign * c * (k[0] * k[0] + k[1] * k[1]).sqrt(), k[0], k[1]];
        let c_mat = eikonal_matrix(&sys, &[g0], &du).unwrap();
        let data = null_space_scaled(&c_mat, DEFAULT_KERNEL_TOLERANCE, eikonal_scale(&sys, &[g0], &du));
        assert_eq!(data.multiplicity, 1);
        let lam = lambda_tensor(&sys, &[g0], &du, &data.null_basis).unwrap();
        worst = worst.max((lam.values[0] - scalar_wave_lambda(&[1.0, 1.0], g0, &du)).abs());
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn g_independent_two_component_system_is_linearly_degenerate() {
    let sys = coupled_constant();
    sys.validate().unwrap();
    let spec = SampleSpec { g0: vec![vec![0.0, 0.0], vec![0.4, -1.0]], du: vec![], wave_vectors: vec![vec![1.0], vec![-0.7]] };
    let rep = classify_characteristic(&sys, &spec, &ClassifyOptions::default()).unwrap();
    assert_eq!(rep.samples.len(), 16);
    assert_eq!(rep.verdict, Verdict::LinearlyDegenerate);
}

#[test]
fn equal_speeds_give_a_double_characteristic() {
    let sys = BuiltinSystem::ConstantCoefficient { space_dims: 1, speeds: vec![2.0, 2.0] };
    let c = eikonal_matrix(&sys, &[0.0, 0.0], &[2.0, 1.0]).unwrap();
    let d = null_space(&c, DEFAULT_KERNEL_TOLERANCE);
    assert_eq!(d.multiplicity, 2);
    let lam = lambda_tensor(&sys, &[0.0, 0.0], &[2.0, 1.0], &d.null_basis).unwrap();
    assert_eq!(lam.n, 2);
    assert_eq!(lam.max_abs(), 0.0);
}

#[test]
fn characteristic_frequencies_of_scalar_wave() {
    let f = characteristic_frequencies(&linear_speed(), &[0.5], &[0.6, 0.8]).unwrap();
    assert_eq!(f.len(), 2);
    assert!((f[0] + 1.5).abs() < 1e-12 && (f[1] - 1.5).abs() < 1e-12, "{f:?}");
}

#[test]
fn coupled_system_samples_are_characteristic() {
    let spec = SampleSpec { g0: vec![vec![0.1, -0.2, 0.3]], du: vec![], wave_vectors: vec![vec![1.0, 0.5], vec![0.2, -1.0]] };
    let rep = classify_characteristic(&Coupled, &spec, &ClassifyOptions::default()).unwrap();
    assert!(rep.rejected.is_empty(), "{:?}", rep.rejected);
    assert!(!rep.samples.is_empty());
    for s in &rep.samples {
        let c = eikonal_matrix(&Coupled, &s.g0, &s.du).unwrap();
        assert!(c.determinant().abs() < 1e-10 * eikonal_scale(&Coupled, &s.g0, &s.du).powi(3));
    }
}

#[test]
fn scalar_transport_reduces_to_closed_form() {
    let sys = linear_speed();
    let field = AffineField { value: vec![0.2], gradient: vec![vec![0.1, 0.3, -0.4]] };
    let x = [0.5, 0.2, 0.7];
    let g0 = field.eval(&x)[0];
    let c0 = 1.0 + g0;
    let k = [0.6, 0.8];
    let du = [c0, k[0], k[1]];
    let t = transport_coefficients(&sys, &field, &du, &[1.0], &x).unwrap();
    // ½{u_tt − ∇·(c0²∇u)} with constant du is −c0 c0′ ∇g0·∇u.
    let grad_dot = 0.3 * k[0] - 0.4 * k[1];
    assert!((t.n + c0 * grad_dot).abs() < 1e-12, "{t:?}");
    assert!((t.n_displayed - t.n - c0 * grad_dot).abs() < 1e-12);
    assert!((t.ray[0] - c0).abs() < 1e-15);
    assert!((t.ray[1] + c0 * c0 * k[0]).abs() < 1e-14);
}

#[test]
fn transport_divergence_matches_hand_computation() {
    // One-component system with A⁰⁰ = ½(1 + g²), A¹¹ = −½ and g0 = x⁰ + 2x¹.
    let e = |alpha, beta, terms| PolynomialEntry { alpha, beta, p: 0, q: 0, terms };
    let sys = BuiltinSystem::Polynomial {
        space_dims: 1,
        fields: 1,
        entries: vec![
            e(0, 0, vec![Monomial { coeff: 0.5, powers: vec![] }, Monomial { coeff: 0.5, powers: vec![2] }]),
            e(1, 1, vec![Monomial { coeff: -0.5, powers: vec![] }]),
        ],
    };
    let field = AffineField { value: vec![0.0], gradient: vec![vec![1.0, 2.0]] };
    let x = [0.3, -0.1];
    let g = 0.3 - 0.2;
    let du = [1.7, -0.4];
    let t = transport_coefficients(&sys, &field, &du, &[1.0], &x).unwrap();
    assert!((t.n - du[0] * g * 1.0).abs() < 1e-14, "{t:?}");
}

proptest! {
    #[test]
    fn lambda_is_symmetric_in_last_two_indices(g in prop::collection::vec(-1.0f64..1.0, 3), k in prop::collection::vec(-1.0f64..1.0, 3)) {
        let basis = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8], vec![0.0, -0.8, 0.6]];
        let lam = lambda_tensor(&Coupled, &g, &k, &basis).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    prop_assert!((lam.get(i, j, l) - lam.get(i, l, j)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn eikonal_and_lambda_scale_quadratically(g in prop::collection::vec(-1.0f64..1.0, 3), k in prop::collection::vec(0.1f64..1.0, 3), s in 0.1f64..5.0) {
        let basis = vec![vec![0.0, 0.6, 0.8]];
        let ks: Vec<f64> = k.iter().map(|x| x * s).collect();
        let (c1, c2) = (eikonal_matrix(&Coupled, &g, &k).unwrap(), eikonal_matrix(&Coupled, &g, &ks).unwrap());
        prop_assert!((c2 - c1 * (s * s)).abs().max() < 1e-12 * s * s);
        let (l1, l2) = (lambda_tensor(&Coupled, &g, &k, &basis).unwrap(), lambda_tensor(&Coupled, &g, &ks, &basis).unwrap());
        prop_assert!((l2.values[0] - s * s * l1.values[0]).abs() < 1e-12 * s * s);
    }

    #[test]
    fn builtin_systems_are_symmetric(g in prop::collection::vec(-2.0f64..2.0, 2)) {
        prop_assert_eq!(symmetry_defect(&coupled_constant(), &g), 0.0);
        prop_assert!(symmetry_defect(&Coupled, &[g[0], g[1], 0.5]) < 1e-15);
    }
}
