use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gwd_core::classify::classify_characteristic;
use gwd_core::einstein::{evolve_forced, solve_colliding, BoundaryData, CollidingData, EvolveOptions, Evolution, FieldSet};
use gwd_core::grid::{estimate_order, read_snapshot, write_snapshot, ConvergenceReport, Grid3, GridFunction};
use gwd_core::optics::{solve_diffractive, solve_hs, RayCoefficients, WaveData, WaveOptions, WaveState, WaveformMode};
use gwd_core::profiles::Profile;
use gwd_core::ricci::oracle::DEFAULT_STEP;
use gwd_core::ricci::verify::verify_random_plane_polarized;
use gwd_core::variational::verify_action;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{io, CliError};
use crate::scenario::*;

pub struct RunContext {
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    scenario_sha256: String,
    seed: u64,
    threads: Option<usize>,
    grids: Vec<Grid3>,
    tolerances: Value,
    scenario: &'a Scenario,
}

struct Outcome {
    report: Value,
    failure: Option<String>,
}

impl Outcome {
    fn pass(report: Value) -> Self {
        Self { report, failure: None }
    }
}

pub fn scenario_hash(s: &Scenario) -> String {
    let bytes = serde_json::to_vec(s).expect("scenario serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(io("serializing"))?;
    fs::write(path, text + "\n").map_err(io(&path.display().to_string()))
}

/// Runs a scenario, writing `manifest.json`, `report.json` and any snapshots under `ctx.out`.
pub fn run(file: &ScenarioFile, ctx: &RunContext) -> Result<(), CliError> {
    let s = &file.scenario;
    fs::create_dir_all(&ctx.out).map_err(io(&ctx.out.display().to_string()))?;
    let (grids, tolerances) = describe(s)?;
    let manifest = Manifest {
        tool: "gwd",
        version: env!("CARGO_PKG_VERSION"),
        command: s.command(),
        scenario_sha256: scenario_hash(s),
        seed: ctx.seed,
        threads: ctx.threads,
        grids,
        tolerances,
        scenario: s,
    };
    write_json(&ctx.out.join("manifest.json"), &manifest)?;
    let outcome = dispatch(s, ctx)?;
    let status = if outcome.failure.is_some() { "fail" } else { "pass" };
    write_json(&ctx.out.join("report.json"), &json!({ "command": s.command(), "status": status, "report": outcome.report }))?;
    match outcome.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn describe(s: &Scenario) -> Result<(Vec<Grid3>, Value), CliError> {
    let ladder = |g: &GridSpec, l: &[[usize; 3]]| l.iter().map(|n| g.with_nodes(*n).build()).collect::<Result<Vec<_>, _>>();
    Ok(match s {
        Scenario::SolveHs(c) => (vec![c.grid.build()?], val(&c.options)),
        Scenario::SolveParabolic(c) => (vec![c.grid.build()?], val(&c.options)),
        Scenario::SolveEinstein(c) => (vec![c.grid.build()?], json!({ "options": c.options, "constraint_threshold": c.constraint_threshold })),
        Scenario::SolveColliding(c) => (vec![c.grid.build()?], val(&c.options)),
        Scenario::VerifyRicci(c) => (vec![], json!({ "step": c.step.unwrap_or(DEFAULT_STEP), "threshold": c.threshold })),
        Scenario::VerifyAction(c) => {
            let grids = match &c.fields {
                FieldSource::Solve { grid, .. } | FieldSource::Profiles { grid, .. } => vec![grid.build()?],
                FieldSource::Snapshots { .. } => vec![],
            };
            (grids, json!({ "step": c.step, "threshold": c.threshold }))
        }
        Scenario::Classify(c) => (vec![], val(&c.options)),
        Scenario::Converge(c) => {
            let (grids, opts) = match &c.study {
                Study::ManufacturedEinstein { grid, ladder: l, options, .. } | Study::ConstraintPulse { grid, ladder: l, options, .. } | Study::Colliding { grid, ladder: l, options, .. } => {
                    (ladder(grid, l)?, val(options))
                }
                Study::HunterSaxton { grid, ladder: l, options, .. } | Study::Parabolic { grid, ladder: l, options, .. } => (ladder(grid, l)?, val(options)),
            };
            (grids, json!({ "options": opts, "expected_order": c.expected_order, "order_tolerance": c.order_tolerance }))
        }
    })
}

fn val<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or_default()
}

fn dispatch(s: &Scenario, ctx: &RunContext) -> Result<Outcome, CliError> {
    match s {
        Scenario::SolveHs(c) => {
            let grid = c.grid.build()?;
            let state = solve_hs(&WaveData::from_profile(&grid, &c.profile, c.mode), &c.coefficients, c.mode, &grid, &c.options)?;
            wave_outcome(&state, &ctx.out)
        }
        Scenario::SolveParabolic(c) => {
            let grid = c.grid.build()?;
            let state = solve_diffractive(&WaveData::from_profile(&grid, &c.profile, WaveformMode::Localized), &c.coefficients, &grid, &c.options)?;
            wave_outcome(&state, &ctx.out)
        }
        Scenario::SolveEinstein(c) => {
            let grid = c.grid.build()?;
            let (evo, exact) = einstein(&grid, &c.data, &c.options)?;
            let f = &evo.fields;
            for (name, g) in [("u", &f.u), ("v", &f.v), ("m", &f.m), ("y", &f.y)] {
                write_snapshot(g, &ctx.out, name).map_err(io("writing snapshot"))?;
            }
            let constraint_max = max_of(&evo.report.constraint_max_by_v);
            let errors = exact.map(|ex| field_errors(f, &ex)).transpose()?;
            let failure = c.constraint_threshold.filter(|t| constraint_max > *t).map(|t| format!("max|F| = {constraint_max:e} exceeds {t:e}"));
            Ok(Outcome { report: json!({ "constraint_max": constraint_max, "evolve": evo.report, "errors_vs_exact": errors }), failure })
        }
        Scenario::SolveColliding(c) => {
            let grid = c.grid.build()?;
            let sol = solve_colliding(&CollidingData::from_profiles(&grid, &c.u, &c.v, &c.m), &grid, &c.options)?;
            for (name, g) in [("u", &sol.u), ("v", &sol.v), ("m", &sol.m), ("v_constraint", &sol.v_constraint)] {
                write_snapshot(g, &ctx.out, name).map_err(io("writing snapshot"))?;
            }
            Ok(Outcome::pass(json!({
                "constraint_max": max_of(&sol.constraint_max_by_v),
                "constraint_max_by_v": sol.constraint_max_by_v,
                "v_constraint_max": sol.v_constraint_max(),
                "iterations": sol.iterations,
            })))
        }
        Scenario::VerifyRicci(c) => {
            let sweep = verify_random_plane_polarized(c.points, ctx.seed, c.step.unwrap_or(DEFAULT_STEP)).map_err(|e| CliError::Verification(e.to_string()))?;
            let failure = if sweep.max_defect > c.threshold {
                Some(format!("max defect {:e} in {} exceeds {:e}", sweep.max_defect, sweep.worst_component, c.threshold))
            } else if !sweep.zero_pattern_ok {
                Some("a declared-zero component is nonzero".into())
            } else {
                None
            };
            Ok(Outcome { report: serde_json::to_value(&sweep).map_err(io("serializing"))?, failure })
        }
        Scenario::VerifyAction(c) => {
            let fields = load_fields(&c.fields)?;
            let rep = verify_action(&fields, c.probes, ctx.seed, c.step, c.eta_boundary).map_err(|e| CliError::Config(e.to_string()))?;
            let worst = rep.residuals_by_direction.iter().fold(0.0f64, |m, d| m.max(d.max_abs));
            let failure = c.threshold.filter(|t| worst > *t).map(|t| format!("max |residual| = {worst:e} exceeds {t:e}"));
            Ok(Outcome { report: serde_json::to_value(&rep).map_err(io("serializing"))?, failure })
        }
        Scenario::Classify(c) => {
            let rep = classify_characteristic(&c.system, &c.samples, &c.options).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Outcome::pass(serde_json::to_value(&rep).map_err(io("serializing"))?))
        }
        Scenario::Converge(c) => converge(c),
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn wave_outcome(state: &WaveState, out: &Path) -> Result<Outcome, CliError> {
    write_snapshot(&state.a, out, "a").map_err(io("writing snapshot"))?;
    Ok(Outcome::pass(json!({
        "max_abs_a": state.a.max_abs(),
        "mode": state.mode,
        "period": state.period,
        "iterations": state.iterations,
    })))
}

fn einstein(grid: &Grid3, data: &EinsteinData, options: &EvolveOptions) -> Result<(Evolution, Option<FieldSet>), CliError> {
    Ok(match data {
        EinsteinData::Zero => (evolve_forced(&BoundaryData::zeros(grid), grid, options, None)?, None),
        EinsteinData::Profiles(p) => (evolve_forced(&BoundaryData::from_profiles(grid, p), grid, options, None)?, None),
        EinsteinData::Pulse(p) => (evolve_forced(&BoundaryData::constrained_pulse(grid, p)?, grid, options, None)?, None),
        EinsteinData::Manufactured(ms) => {
            let opts = EvolveOptions { constraint_tolerance: None, ..*options };
            let src = ms.source();
            (evolve_forced(&ms.boundary_data(grid), grid, &opts, Some(&src))?, Some(ms.exact(grid)))
        }
    })
}

fn field_errors(f: &FieldSet, exact: &FieldSet) -> Result<BTreeMap<&'static str, f64>, CliError> {
    let d = |a: &GridFunction, b: &GridFunction| a.max_abs_diff(b).map_err(|e| CliError::Config(e.to_string()));
    Ok(BTreeMap::from([("U", d(&f.u, &exact.u)?), ("V", d(&f.v, &exact.v)?), ("M", d(&f.m, &exact.m)?), ("Y", d(&f.y, &exact.y)?)]))
}

fn load_fields(src: &FieldSource) -> Result<FieldSet, CliError> {
    match src {
        FieldSource::Snapshots { dir } => {
            let read = |n: &str| read_snapshot(dir, n).map(|(_, f)| f).map_err(|e| CliError::Config(format!("snapshot {n} in {}: {e}", dir.display())));
            FieldSet::new(read("u")?, read("v")?, read("m")?, read("y")?, None).map_err(|e| CliError::Config(e.to_string()))
        }
        FieldSource::Solve { grid, data, options } => Ok(einstein(&grid.build()?, data, options)?.0.fields),
        FieldSource::Profiles { grid, u, v, m, y } => Ok(FieldSet::from_profiles(grid.build()?, u, v, m, y)),
    }
}

#[derive(Serialize)]
struct ConvergeReport {
    problem: &'static str,
    grids: Vec<[usize; 3]>,
    per_field: BTreeMap<&'static str, ConvergenceReport>,
    /// Smallest order over the fields.
    #[serde(serialize_with = "finite_or_null")]
    observed_order: f64,
}

fn finite_or_null<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn wave_error(exact: &Profile, coefficients: &RayCoefficients, mode: Option<WaveformMode>, grid: &Grid3, options: &WaveOptions) -> Result<f64, CliError> {
    let m = mode.unwrap_or(WaveformMode::Localized);
    let data = WaveData::from_profile(grid, exact, m);
    let state = match mode {
        Some(m) => solve_hs(&data, coefficients, m, grid, options)?,
        None => solve_diffractive(&data, coefficients, grid, options)?,
    };
    let ex = GridFunction::from_fn(*grid, |t, e, v| exact.value(t, e, v));
    state.a.max_abs_diff(&ex).map_err(|e| CliError::Config(e.to_string()))
}

fn converge(c: &ConvergeScenario) -> Result<Outcome, CliError> {
    let mut pairs: BTreeMap<&'static str, Vec<(f64, f64)>> = BTreeMap::new();
    let mut push = |name: &'static str, h: f64, e: f64| pairs.entry(name).or_default().push((h, e));
    let (problem, grid_spec, ladder) = match &c.study {
        Study::ManufacturedEinstein { grid, ladder, .. } => ("manufactured_einstein", grid, ladder),
        Study::ConstraintPulse { grid, ladder, .. } => ("constraint_pulse", grid, ladder),
        Study::Colliding { grid, ladder, .. } => ("colliding", grid, ladder),
        Study::HunterSaxton { grid, ladder, .. } => ("hunter_saxton", grid, ladder),
        Study::Parabolic { grid, ladder, .. } => ("parabolic", grid, ladder),
    };
    for nodes in ladder {
        let g = grid_spec.with_nodes(*nodes).build()?;
        match &c.study {
            Study::ManufacturedEinstein { solution, options, .. } => {
                let (evo, exact) = einstein(&g, &EinsteinData::Manufactured(solution.clone()), options)?;
                for (k, e) in field_errors(&evo.fields, &exact.expect("manufactured run has an exact solution"))? {
                    push(k, g.d_theta, e);
                }
            }
            Study::ConstraintPulse { pulse, options, .. } => {
                let (evo, _) = einstein(&g, &EinsteinData::Pulse(pulse.clone()), options)?;
                push("F", g.d_theta, max_of(&evo.report.constraint_max_by_v));
            }
            Study::Colliding { u, v, m, options, .. } => {
                let zero = Profile::Zero;
                let sol = solve_colliding(&CollidingData::from_profiles(&g, u, v.as_ref().unwrap_or(&zero), m.as_ref().unwrap_or(&zero)), &g, options)?;
                for (name, f, p) in [("U", &sol.u, Some(u)), ("V", &sol.v, v.as_ref()), ("M", &sol.m, m.as_ref())] {
                    let Some(p) = p else { continue };
                    let ex = GridFunction::from_fn(g, |t, e, s| p.value(t, e, s));
                    push(name, g.d_theta, f.max_abs_diff(&ex).map_err(|e| CliError::Config(e.to_string()))?);
                }
            }
            Study::HunterSaxton { exact, coefficients, mode, options, .. } => push("a", g.d_theta, wave_error(exact, coefficients, Some(*mode), &g, options)?),
            Study::Parabolic { exact, coefficients, options, .. } => push("a", g.d_theta, wave_error(exact, coefficients, None, &g, options)?),
        }
    }
    let mut per_field = BTreeMap::new();
    for (k, p) in pairs {
        per_field.insert(k, estimate_order(&p).map_err(|e| CliError::Config(e.to_string()))?);
    }
    let observed_order = per_field.values().map(|r| r.observed_order).fold(f64::INFINITY, f64::min);
    let failure = c.expected_order.and_then(|target| {
        let bad: Vec<String> = per_field
            .iter()
            .filter(|(_, r)| !(r.observed_order.is_infinite() || r.order_within(target, c.order_tolerance)))
            .map(|(k, r)| format!("{k}: {:.3}", r.observed_order))
            .collect();
        (!bad.is_empty()).then(|| format!("observed order outside {target} ± {}: {}", c.order_tolerance, bad.join(", ")))
    });
    let report = ConvergeReport { problem, grids: ladder.clone(), per_field, observed_order };
    Ok(Outcome { report: serde_json::to_value(&report).map_err(io("serializing"))?, failure })
}
