//! Scenario files: strict JSON, one command per file.

use std::path::PathBuf;

use gwd_core::classify::{BuiltinSystem, ClassifyOptions, SampleSpec};
use gwd_core::einstein::{BoundaryProfiles, EvolveOptions, ManufacturedSolution, PulseSpec};
use gwd_core::grid::{BoundaryMode, Grid3, GridError};
use gwd_core::optics::{RayCoefficients, WaveOptions, WaveformMode};
use gwd_core::profiles::Profile;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub nodes: usize,
}

/// Node counts and extents. Without `eta` the grid is a (θ, v) plane.
/// With `periodic_theta` the θ nodes tile `[min, max)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub theta: AxisSpec,
    #[serde(default)]
    pub eta: Option<AxisSpec>,
    pub v: AxisSpec,
    #[serde(default)]
    pub periodic_theta: bool,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid3, CliError> {
        let span = |a: &AxisSpec, name: &str| {
            if !(a.min.is_finite() && a.max.is_finite() && a.max > a.min) {
                Err(CliError::Config(format!("grid.{name}: need finite min < max, got [{}, {}]", a.min, a.max)))
            } else {
                Ok(a.max - a.min)
            }
        };
        let th = span(&self.theta, "theta")?;
        let v = span(&self.v, "v")?;
        let th_cells = if self.periodic_theta { self.theta.nodes } else { self.theta.nodes.saturating_sub(1) };
        if th_cells == 0 || self.v.nodes < 2 {
            return Err(CliError::Config("grid: theta and v need at least 2 nodes".into()));
        }
        let (n_eta, eta0, d_eta) = match &self.eta {
            None => (1, 0.0, 1.0),
            Some(e) => {
                let width = span(e, "eta")?;
                if e.nodes < 2 {
                    return Err(CliError::Config("grid.eta needs at least 2 nodes; omit it for a (theta, v) plane".into()));
                }
                (e.nodes, e.min, width / (e.nodes - 1) as f64)
            }
        };
        Grid3::from_spacing(
            [self.theta.nodes, n_eta, self.v.nodes],
            [self.theta.min, eta0, self.v.min],
            [th / th_cells as f64, d_eta, v / (self.v.nodes - 1) as f64],
        )
        .map_err(|e: GridError| CliError::Config(format!("grid: {e}")))
    }

    /// Same extents with new node counts; the η count is ignored for planes.
    pub fn with_nodes(&self, nodes: [usize; 3]) -> Self {
        let mut g = self.clone();
        g.theta.nodes = nodes[0];
        if let Some(e) = g.eta.as_mut() {
            e.nodes = nodes[1];
        }
        g.v.nodes = nodes[2];
        g
    }
}

/// Boundary data for the Einstein solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EinsteinData {
    Zero,
    /// Profiles sampled on both data faces.
    Profiles(BoundaryProfiles),
    /// U on v = 0 solved from the θ-constraint.
    Pulse(PulseSpec),
    /// Exact fields with the forcing that makes them a solution.
    Manufactured(ManufacturedSolution),
}

/// Where `verify-action` gets its fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// `u`, `v`, `m`, `y` snapshot pairs written by an earlier run.
    Snapshots { dir: PathBuf },
    /// Solver output for the given data.
    Solve {
        grid: GridSpec,
        data: EinsteinData,
        #[serde(default)]
        options: EvolveOptions,
    },
    /// Analytic fields sampled on the grid.
    Profiles {
        grid: GridSpec,
        #[serde(default)]
        u: Profile,
        #[serde(default)]
        v: Profile,
        #[serde(default)]
        m: Profile,
        #[serde(default)]
        y: Profile,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsScenario {
    pub grid: GridSpec,
    pub profile: Profile,
    #[serde(default)]
    pub coefficients: RayCoefficients,
    #[serde(default)]
    pub mode: WaveformMode,
    #[serde(default)]
    pub options: WaveOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicScenario {
    pub grid: GridSpec,
    pub profile: Profile,
    #[serde(default)]
    pub coefficients: RayCoefficients,
    #[serde(default)]
    pub options: WaveOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EinsteinScenario {
    pub grid: GridSpec,
    pub data: EinsteinData,
    #[serde(default)]
    pub options: EvolveOptions,
    /// Fail with exit code 3 when max|F| over the output exceeds this.
    #[serde(default)]
    pub constraint_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollidingScenario {
    pub grid: GridSpec,
    #[serde(default)]
    pub u: Profile,
    #[serde(default)]
    pub v: Profile,
    #[serde(default)]
    pub m: Profile,
    #[serde(default)]
    pub options: EvolveOptions,
}

fn default_points() -> usize {
    100
}

fn default_ricci_threshold() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicciScenario {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Base ε of the Richardson extraction.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_ricci_threshold")]
    pub threshold: f64,
}

fn default_probes() -> usize {
    10
}

fn default_action_step() -> f64 {
    1e-4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionScenario {
    pub fields: FieldSource,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_action_step")]
    pub step: f64,
    #[serde(default)]
    pub eta_boundary: BoundaryMode,
    /// Fail with exit code 3 when any |residual| exceeds this.
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyScenario {
    pub system: BuiltinSystem,
    pub samples: SampleSpec,
    #[serde(default)]
    pub options: ClassifyOptions,
}

/// Refinement studies against known solutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study {
    /// Forced Einstein system with exact (U, V, M, Y).
    ManufacturedEinstein {
        solution: ManufacturedSolution,
        grid: GridSpec,
        ladder: Vec<[usize; 3]>,
        #[serde(default)]
        options: EvolveOptions,
    },
    /// max|F| of unforced pulse evolutions.
    ConstraintPulse {
        pulse: PulseSpec,
        grid: GridSpec,
        ladder: Vec<[usize; 3]>,
        #[serde(default)]
        options: EvolveOptions,
    },
    /// Colliding-wave solver against an exact U; V and M are compared only when given
    /// and are zero on the data faces otherwise.
    Colliding {
        u: Profile,
        #[serde(default)]
        v: Option<Profile>,
        #[serde(default)]
        m: Option<Profile>,
        grid: GridSpec,
        ladder: Vec<[usize; 3]>,
        #[serde(default)]
        options: EvolveOptions,
    },
    /// Hunter–Saxton solver against an exact solution.
    HunterSaxton {
        exact: Profile,
        #[serde(default)]
        coefficients: RayCoefficients,
        #[serde(default)]
        mode: WaveformMode,
        grid: GridSpec,
        ladder: Vec<[usize; 3]>,
        #[serde(default)]
        options: WaveOptions,
    },
    /// Diffractive solver against an exact solution.
    Parabolic {
        exact: Profile,
        #[serde(default)]
        coefficients: RayCoefficients,
        grid: GridSpec,
        ladder: Vec<[usize; 3]>,
        #[serde(default)]
        options: WaveOptions,
    },
}

fn default_order_tolerance() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeScenario {
    pub study: Study,
    /// Fail with exit code 3 when a field's order is outside `expected_order ± order_tolerance`.
    #[serde(default)]
    pub expected_order: Option<f64>,
    #[serde(default = "default_order_tolerance")]
    pub order_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    SolveHs(HsScenario),
    SolveParabolic(ParabolicScenario),
    SolveEinstein(EinsteinScenario),
    SolveColliding(CollidingScenario),
    VerifyRicci(RicciScenario),
    VerifyAction(ActionScenario),
    Classify(ClassifyScenario),
    Converge(ConvergeScenario),
}

impl Scenario {
    pub fn command(&self) -> &'static str {
        match self {
            Scenario::SolveHs(_) => "solve-hs",
            Scenario::SolveParabolic(_) => "solve-parabolic",
            Scenario::SolveEinstein(_) => "solve-einstein",
            Scenario::SolveColliding(_) => "solve-colliding",
            Scenario::VerifyRicci(_) => "verify-ricci",
            Scenario::VerifyAction(_) => "verify-action",
            Scenario::Classify(_) => "classify",
            Scenario::Converge(_) => "converge",
        }
    }
}

/// Scenario plus the keys shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Parses a scenario file. `command` (from the command line) fills in or must
/// agree with the file's `command` key.
pub fn parse_scenario(text: &str, command: Option<&str>) -> Result<ScenarioFile, CliError> {
    let mut value: serde_json::Value = if text.trim().is_empty() {
        serde_json::Value::Object(Default::default())
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?
    };
    let obj = value.as_object_mut().ok_or_else(|| CliError::Config("scenario must be a JSON object".into()))?;
    match (obj.get("command"), command) {
        (None, None) => return Err(CliError::Config("missing command".into())),
        (None, Some(c)) => {
            obj.insert("command".into(), c.into());
        }
        (Some(serde_json::Value::String(s)), Some(c)) if s != c => {
            return Err(CliError::Config(format!("command mismatch: file says {s:?}, command line says {c:?}")));
        }
        (Some(serde_json::Value::String(_)), _) => {}
        (Some(_), _) => return Err(CliError::Config("command must be a string".into())),
    }
    let output = match obj.remove("output") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(CliError::Config("output must be a string".into())),
    };
    let seed = match obj.remove("seed") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| CliError::Config("seed must be a non-negative integer".into()))?),
    };
    let scenario: Scenario = serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid scenario: {e}")))?;
    validate(&scenario)?;
    Ok(ScenarioFile { scenario, output, seed })
}

fn validate(s: &Scenario) -> Result<(), CliError> {
    let ladder = |l: &[[usize; 3]]| {
        if l.len() < 3 {
            Err(CliError::Config(format!("ladder needs at least 3 grids, got {}", l.len())))
        } else {
            Ok(())
        }
    };
    match s {
        Scenario::Classify(c) => c.system.validate().map_err(|e| CliError::Config(e.to_string())),
        Scenario::SolveColliding(c) if c.grid.eta.is_some() => Err(CliError::Config("solve-colliding takes a (theta, v) plane: omit grid.eta".into())),
        Scenario::SolveHs(c) if c.grid.eta.is_some() => Err(CliError::Config("solve-hs takes a (theta, v) plane: omit grid.eta".into())),
        Scenario::VerifyRicci(r) if r.points == 0 => Err(CliError::Config("points must be positive".into())),
        Scenario::Converge(c) => match &c.study {
            Study::ManufacturedEinstein { ladder: l, .. }
            | Study::ConstraintPulse { ladder: l, .. }
            | Study::Colliding { ladder: l, .. }
            | Study::HunterSaxton { ladder: l, .. }
            | Study::Parabolic { ladder: l, .. } => ladder(l),
        },
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_commandless_files_are_rejected() {
        for text in ["", "  \n", "{}", "{\"grid\": {}}"] {
            let e = parse_scenario(text, None).unwrap_err();
            assert_eq!(e.to_string(), "configuration error: missing command");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_scenario(r#"{"command": "verify-ricci", "pointz": 3}"#, None).unwrap_err();
        assert!(e.to_string().contains("pointz"), "{e}");
        let e = parse_scenario(r#"{"command": "verify-ricci", "step": 1e-6, "extra": {}}"#, None).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn unknown_profiles_are_rejected() {
        let text = r#"{"command": "solve-hs", "grid": {"theta": {"min": 0, "max": 1, "nodes": 5}, "v": {"min": 0, "max": 1, "nodes": 5}},
                       "profile": {"kind": "sawtooth"}}"#;
        let e = parse_scenario(text, None).unwrap_err();
        assert!(e.to_string().contains("sawtooth"), "{e}");
    }

    #[test]
    fn command_line_fills_in_and_must_agree() {
        let f = parse_scenario("{}", Some("verify-ricci")).unwrap();
        assert_eq!(f.scenario, Scenario::VerifyRicci(RicciScenario { points: 100, step: None, threshold: 1e-6 }));
        assert!(parse_scenario(r#"{"command": "classify"}"#, Some("verify-ricci")).is_err());
    }

    #[test]
    fn shared_keys_are_split_off() {
        let f = parse_scenario(r#"{"command": "verify-ricci", "seed": 7, "output": "out/x"}"#, None).unwrap();
        assert_eq!(f.seed, Some(7));
        assert_eq!(f.output, Some(PathBuf::from("out/x")));
    }

    #[test]
    fn grid_spec_builds_planes_and_periodic_axes() {
        let spec = GridSpec {
            theta: AxisSpec { min: 0.0, max: 1.0, nodes: 4 },
            eta: None,
            v: AxisSpec { min: 0.0, max: 2.0, nodes: 5 },
            periodic_theta: true,
        };
        let g = spec.build().unwrap();
        assert_eq!((g.n_eta, g.d_theta, g.d_v), (1, 0.25, 0.5));
        let g = GridSpec { periodic_theta: false, eta: Some(AxisSpec { min: -1.0, max: 1.0, nodes: 3 }), ..spec.clone() }.build().unwrap();
        assert_eq!((g.n_eta, g.d_eta, g.d_theta), (3, 1.0, 1.0 / 3.0));
        assert!(GridSpec { v: AxisSpec { min: 1.0, max: 1.0, nodes: 5 }, ..spec }.build().is_err());
    }
}
