//! Fixed workloads shared by the benchmarks.

use gwd_core::classify::BuiltinSystem;
use gwd_core::einstein::{BoundaryData, CollidingData, FieldSet, PulseSpec};
use gwd_core::grid::build_grid;
use gwd_core::optics::{WaveData, WaveformMode};
use gwd_core::{Grid3, Profile};

pub fn pulse_profile(eta_width: Option<f64>) -> Profile {
    Profile::Gaussian { amplitude: 0.04, theta_center: 0.5, theta_width: 0.2, eta_center: 0.0, eta_width }
}

/// Constraint-satisfying pulse data on a `[n, ne, nv]` grid over `[0,1]×[−4,4]×[0,1]`.
pub fn pulse_case(n: usize, ne: usize, nv: usize) -> (Grid3, BoundaryData) {
    let g = build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [n, ne, nv]).unwrap();
    let spec = PulseSpec { v: pulse_profile(Some(1.5)), m: Profile::Zero, substeps: 4 };
    let data = BoundaryData::constrained_pulse(&g, &spec).unwrap();
    (g, data)
}

pub fn colliding_case(n: usize) -> (Grid3, CollidingData) {
    let g = Grid3::plane((0.0, 1.0), n, (0.0, 1.0), n).unwrap();
    let u = Profile::LogLinear { scale: -1.0, offset: 2.0, c_theta: 1.0, c_eta: 0.0, c_v: 1.0 };
    let data = CollidingData::from_profiles(&g, &u, &Profile::Zero, &Profile::Zero);
    (g, data)
}

pub fn hs_case(n: usize) -> (Grid3, WaveData) {
    let g = Grid3::plane((0.0, 1.0), n, (0.0, 1.0), n).unwrap();
    let data = WaveData::from_profile(&g, &Profile::HsLinear { c0: 1.0 }, WaveformMode::Localized);
    (g, data)
}

/// Smooth non-solution fields for action evaluation.
pub fn smooth_fields(n: usize) -> FieldSet {
    let g = build_grid([(0.0, 1.0), (-4.0, 4.0), (0.0, 1.0)], [n, n, n]).unwrap();
    let pw = |a, kt, kv| Profile::PlaneWave { amplitude: a, k_theta: kt, k_eta: 0.5, k_v: kv, phase: 0.2 };
    FieldSet::from_profiles(g, &pw(0.1, 1.0, 2.0), &pw(0.2, 2.0, -1.0), &pw(0.1, 1.5, 1.0), &pw(0.05, 1.0, 1.0))
}

pub fn scalar_wave() -> BuiltinSystem {
    BuiltinSystem::ScalarWave { space_dims: 3, speed: vec![1.0, 1.0] }
}
