//! Command-line front end: configuration, command dispatch and exit codes.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
//! optimization, 3 integration failure.

pub mod figures;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::drive::PulseSpec;
use crate::effective::{
    constraint_residuals_for, operator_coefficients, ConstraintSet, EffectiveCoefficients, OPERATOR_LABELS,
};
use crate::error::Error;
use crate::fock::{BasisIndex, SpaceConfig, DEFAULT_BUFFER};
use crate::functionals::{
    cycle_infidelity_in, gate_infidelity_asymptotic, gate_infidelity_truncated, state_infidelity, timing_sensitivity,
    ImprovementReport,
};
use crate::magnus::verify_coefficients;
use crate::optimizer::{improvement_sweep, solve, OptimizationProblem, OptimizationResult};
use crate::propagate::{cycle_length, pair_level, simulate, uniform_grid};

use io::{csv, OutputDir};

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sideband", version, about = "Polychromatic red-sideband pulse design and simulation")]
pub struct Cli {
    /// JSON run configuration (schema 1).
    #[arg(long, global = true, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Override a configuration key, e.g. `--set problem.n=6`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output time points per drive period.
    #[arg(long, global = true, default_value_t = 200)]
    pub grid: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Optimize a pulse: δ scan plus constrained minimization.
    Optimize,
    /// Exact populations from a basis state over `cycles` target cycles.
    Simulate,
    /// Perturbative and numerical infidelities of a pulse.
    Evaluate,
    /// Effective-Hamiltonian coefficients and constraint residuals.
    Coeffs,
    /// Closed-form coefficients against their defining integrals.
    VerifyMagnus,
    /// Improvement ratio over the sideband counts in `ns`.
    SweepN,
    /// |dP/dt| of the initial population at t = qT, q = 1..q_max.
    TimingScan,
    /// Data series of one figure.
    Figure {
        #[arg(value_enum)]
        tag: FigureTag,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Optimize => "optimize".into(),
            Command::Simulate => "simulate".into(),
            Command::Evaluate => "evaluate".into(),
            Command::Coeffs => "coeffs".into(),
            Command::VerifyMagnus => "verify-magnus".into(),
            Command::SweepN => "sweep-n".into(),
            Command::TimingScan => "timing-scan".into(),
            Command::Figure { tag } => format!("figure {}", tag.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureTag {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureTag {
    pub fn name(&self) -> &'static str {
        match self {
            FigureTag::Fig1 => "fig1",
            FigureTag::Fig2 => "fig2",
            FigureTag::Fig3 => "fig3",
            FigureTag::Fig4 => "fig4",
            FigureTag::Fig5 => "fig5",
            FigureTag::Fig6 => "fig6",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPulse {
    /// Result of optimizing `problem`.
    Optimized,
    /// Single resonant tone with f₀ = f_tg/η.
    Monochromatic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PulseSource {
    Named(NamedPulse),
    Explicit(PulseSpec),
}

/// Contents of the `--spec` file. Every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub problem: OptimizationProblem,
    pub pulse: PulseSource,
    /// Initial basis state, e.g. `g1` or `e0`.
    pub initial: String,
    /// Simulation length in target cycles.
    pub cycles: f64,
    /// Guard levels above the highest populated level.
    pub buffer: usize,
    pub ns: Vec<u32>,
    pub q_max: u32,
    /// Subspace dimension of the truncated gate infidelity.
    pub d: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            problem: OptimizationProblem::paper(5),
            pulse: PulseSource::Named(NamedPulse::Optimized),
            initial: "g1".into(),
            cycles: 2.0,
            buffer: DEFAULT_BUFFER,
            ns: (3..=9).collect(),
            q_max: 8,
            d: 2,
        }
    }
}

impl RunConfig {
    pub fn initial_state(&self) -> Result<BasisIndex, Failure> {
        Ok(self.initial.parse::<BasisIndex>()?)
    }

    pub fn space_for(&self, initial: BasisIndex) -> Result<SpaceConfig, Failure> {
        Ok(SpaceConfig::for_initial(pair_level(initial), self.buffer)?)
    }
}

/// Why a command did not complete, mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Infeasible(String),
    Integration(String),
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Other(_) => EXIT_USAGE,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Integration(_) => EXIT_INTEGRATION,
        }
    }

    fn status(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::Infeasible(m) => format!("infeasible: {m}"),
            Failure::Integration(m) => format!("integration failure: {m}"),
            Failure::Other(m) => format!("error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Integration { .. } => Failure::Integration(e.to_string()),
            Error::Usage(_) | Error::Config(_) | Error::UnsupportedRegime { .. } | Error::Json(_) | Error::Index(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Merges `file` into `base`, rejecting keys `base` does not declare.
/// Objects carrying a `kind` tag, and values replacing a non-object, are
/// taken whole.
fn merge(base: &mut Value, file: Value, path: &str) -> Result<(), Failure> {
    match (base, file) {
        (Value::Object(b), Value::Object(f)) if !f.contains_key("kind") => {
            for (k, v) in f {
                let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &key)?,
                    None => return Err(usage(format!("unknown configuration key '{key}'"))),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), Failure> {
    let mut slot = doc;
    for part in key.split('.') {
        slot = match slot {
            Value::Object(map) if map.contains_key(part) => map.get_mut(part).unwrap(),
            _ => return Err(usage(format!("unknown configuration key '{key}'"))),
        };
    }
    *slot = value;
    Ok(())
}

/// Default config, overlaid by the spec file, then by `--set` overrides.
/// Returns the parsed config and its canonical JSON.
pub fn load_config(spec: Option<&Path>, sets: &[String]) -> Result<(RunConfig, Value), Failure> {
    let mut doc = serde_json::to_value(RunConfig::default())?;
    if let Some(path) = spec {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("{} is not valid JSON: {e}", path.display())))?;
        match file.get("schema") {
            Some(v) if v.as_u64() == Some(SCHEMA as u64) => {}
            Some(v) => return Err(usage(format!("unsupported schema {v}; expected {SCHEMA}"))),
            None => return Err(usage("configuration is missing \"schema\": 1")),
        }
        if !file.is_object() {
            return Err(usage("configuration must be a JSON object"));
        }
        merge(&mut doc, file, "")?;
    }
    for s in sets {
        let (key, raw) = s.split_once('=').ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{s}'")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut doc, key.trim(), value)?;
    }
    let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| usage(format!("invalid configuration: {e}")))?;
    if cfg.schema != SCHEMA {
        return Err(usage(format!("unsupported schema {}", cfg.schema)));
    }
    cfg.problem.validate()?;
    cfg.initial_state()?;
    if cfg.cycles.is_nan() || cfg.cycles <= 0.0 {
        return Err(usage("cycles must be positive"));
    }
    let canonical = serde_json::to_value(&cfg)?;
    Ok((cfg, canonical))
}

/// Everything a command needs.
pub struct Context {
    pub config: RunConfig,
    pub grid: usize,
    pub out: OutputDir,
}

impl Context {
    /// The pulse named by `config.pulse`, with the optimization behind it.
    pub fn pulse(&mut self) -> Result<(PulseSpec, Option<OptimizationResult>), Failure> {
        match &self.config.pulse {
            PulseSource::Explicit(spec) => {
                spec.validate()?;
                Ok((spec.clone(), None))
            }
            PulseSource::Named(NamedPulse::Monochromatic) => Ok((self.config.problem.monochromatic()?, None)),
            PulseSource::Named(NamedPulse::Optimized) => {
                let problem = self.config.problem.clone();
                let (spec, res) = optimized(&problem)?;
                Ok((spec, Some(res)))
            }
        }
    }

    pub fn leakage_note(&mut self, what: &str, leakage: f64, flagged: bool) {
        if flagged {
            self.out.note(format!("{what}: guard-band leakage {leakage:.3e} exceeds tolerance"));
        }
    }
}

/// Solves `problem` and insists on a feasible result.
pub fn optimized(problem: &OptimizationProblem) -> Result<(PulseSpec, OptimizationResult), Failure> {
    let res = solve(problem)?;
    if !res.feasible {
        return Err(Failure::Infeasible(format!(
            "no feasible pulse for n = {} (best max residual {:.3e} at delta {:.4})",
            problem.n,
            res.max_residual(),
            res.delta_opt
        )));
    }
    Ok((res.spec(problem)?, res))
}

fn pulse_json(spec: &PulseSpec, res: &Option<OptimizationResult>) -> Value {
    json!({ "pulse": spec, "optimization": res })
}

fn run_optimize(ctx: &mut Context) -> Result<(), Failure> {
    let problem = ctx.config.problem.clone();
    let res = solve(&problem)?;
    let rows = res
        .delta_profile
        .iter()
        .map(|p| vec![p.delta, p.objective.unwrap_or(f64::NAN), if p.feasible { 1.0 } else { 0.0 }]);
    let params = json!({ "n": problem.n, "constraints": problem.constraints, "objective": problem.objective });
    ctx.out.write(
        "delta_profile.csv",
        &csv(&["delta", "objective", "feasible"], rows),
        "objective per scanned delta",
        params.clone(),
    )?;
    let spec = res.spec(&problem)?;
    ctx.out.write_json(
        "optimize.json",
        &json!({ "problem": problem, "pulse": spec, "result": res }),
        "optimal pulse",
        params,
    )?;
    if !res.feasible {
        return Err(Failure::Infeasible(format!("max residual {:.3e}", res.max_residual())));
    }
    Ok(())
}

fn run_simulate(ctx: &mut Context) -> Result<(), Failure> {
    let (spec, res) = ctx.pulse()?;
    let initial = ctx.config.initial_state()?;
    let cfg = ctx.config.space_for(initial)?;
    let t_end = ctx.config.cycles * cycle_length(spec.f_tg, pair_level(initial))?;
    let trace = simulate(&spec, cfg, initial, &uniform_grid(t_end, ctx.grid))?;
    ctx.leakage_note("simulate", trace.leakage, trace.leakage_flagged);
    let params = json!({ "initial": ctx.config.initial, "t_end": t_end, "d": cfg.d() });
    ctx.out.write("trace.csv", &trace.to_csv(), "populations, unitarity defect and leakage", params.clone())?;
    let mut summary = pulse_json(&spec, &res);
    summary["unitarity_defect"] = json!(trace.unitarity_defect);
    summary["leakage"] = json!(trace.leakage);
    summary["leakage_flagged"] = json!(trace.leakage_flagged);
    summary["population_drift"] = json!(trace.population_drift());
    ctx.out.write_json("simulate.json", &summary, "simulation summary", params)?;
    Ok(())
}

fn run_evaluate(ctx: &mut Context) -> Result<(), Failure> {
    let (spec, res) = ctx.pulse()?;
    let initial = ctx.config.initial_state()?;
    let cfg = ctx.config.space_for(initial)?;
    let cycle = cycle_infidelity_in(&spec, cfg, initial)?;
    ctx.leakage_note("cycle infidelity", cycle.leakage, cycle.leakage_flagged);
    let mono = ctx.config.problem.monochromatic()?;
    let mono_cycle = cycle_infidelity_in(&mono, cfg, initial)?;
    let improvement = ImprovementReport::new(mono_cycle.value.value, cycle.value.value).ok();
    let mut report = pulse_json(&spec, &res);
    report["state"] = json!(state_infidelity(&spec, initial)?);
    report["gate_truncated"] = json!(gate_infidelity_truncated(&spec, ctx.config.d)?);
    report["gate_asymptotic"] = json!(gate_infidelity_asymptotic(&spec)?);
    report["cycle"] = json!(cycle);
    report["monochromatic_cycle"] = json!(mono_cycle);
    report["improvement"] = json!(improvement);
    let params = json!({ "initial": ctx.config.initial, "d": ctx.config.d });
    ctx.out.write_json("evaluate.json", &report, "infidelity functionals", params)?;
    Ok(())
}

fn run_coeffs(ctx: &mut Context) -> Result<(), Failure> {
    let (spec, res) = ctx.pulse()?;
    let coeffs = EffectiveCoefficients::new(&spec)?;
    let operators: Map<String, Value> =
        OPERATOR_LABELS.iter().zip(operator_coefficients(&coeffs, 2)).map(|(l, c)| (l.to_string(), json!(c))).collect();
    let mut residuals = Map::new();
    for set in [ConstraintSet::Five, ConstraintSet::FiveWithSecondOrderSideband, ConstraintSet::Seven] {
        let key = serde_json::to_value(set)?.as_str().unwrap_or_default().to_string();
        residuals.insert(key, json!(constraint_residuals_for(&spec, set)?.r));
    }
    let mut report = pulse_json(&spec, &res);
    report["alpha"] = json!(coeffs);
    report["operator_coefficients"] = Value::Object(operators);
    report["constraint_residuals"] = Value::Object(residuals);
    ctx.out.write_json("coeffs.json", &report, "effective Hamiltonian coefficients", Value::Null)?;
    Ok(())
}

fn run_verify_magnus(ctx: &mut Context) -> Result<(), Failure> {
    let (spec, _) = ctx.pulse()?;
    let checks = verify_coefficients(&spec)?;
    let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    let passed = worst < 1e-8;
    let report = json!({ "pulse": spec, "max_rel_err": worst, "passed": passed, "checks": checks });
    ctx.out.write_json(
        "verify_magnus.json",
        &report,
        "closed form vs quadrature oracle",
        json!({ "tolerance": 1e-8 }),
    )?;
    if !passed {
        return Err(Failure::Other(format!("coefficient check failed: max rel_err {worst:.3e}")));
    }
    Ok(())
}

fn run_sweep(ctx: &mut Context) -> Result<(), Failure> {
    let problem = ctx.config.problem.clone();
    let rows = improvement_sweep(&problem, &ctx.config.ns)?;
    let nan = f64::NAN;
    let table = rows.iter().map(|r| {
        vec![
            r.n as f64,
            r.r_cycle.unwrap_or(nan),
            r.r_theory.unwrap_or(nan),
            r.i_mono,
            r.i_poly.unwrap_or(nan),
            r.delta_opt.unwrap_or(nan),
            if r.feasible { 1.0 } else { 0.0 },
        ]
    });
    let header = ["n", "R_cycle", "R_theory", "I_mono", "I_poly", "delta_opt", "feasible"];
    let params = json!({ "objective": problem.objective, "constraints": problem.constraints, "ns": ctx.config.ns });
    ctx.out.write("sweep.csv", &csv(&header, table), "improvement ratio per n", params.clone())?;
    ctx.out.write_json("sweep.json", &rows, "sweep rows with optimal amplitudes", params)?;
    let failed: Vec<String> =
        rows.iter().filter(|r| !r.feasible || r.error.is_some()).map(|r| r.n.to_string()).collect();
    if !failed.is_empty() {
        return Err(Failure::Infeasible(format!("no usable pulse for n = {}", failed.join(", "))));
    }
    Ok(())
}

fn run_timing(ctx: &mut Context) -> Result<(), Failure> {
    let (spec, _) = ctx.pulse()?;
    let mono = ctx.config.problem.monochromatic()?;
    let initial = ctx.config.initial_state()?;
    let mut rows = Vec::new();
    for q in 1..=ctx.config.q_max {
        let poly = timing_sensitivity(&spec, initial, q)?;
        let reference = timing_sensitivity(&mono, initial, q)?;
        rows.push(vec![q as f64, q as f64 * crate::drive::PERIOD, poly, reference]);
    }
    let params = json!({ "initial": ctx.config.initial, "q_max": ctx.config.q_max });
    ctx.out.write("timing.csv", &csv(&["q", "t", "rate_poly", "rate_mono"], rows), "|dP/dt| at t = qT", params)?;
    Ok(())
}

pub fn execute(command: Command, ctx: &mut Context) -> Result<(), Failure> {
    match command {
        Command::Optimize => run_optimize(ctx),
        Command::Simulate => run_simulate(ctx),
        Command::Evaluate => run_evaluate(ctx),
        Command::Coeffs => run_coeffs(ctx),
        Command::VerifyMagnus => run_verify_magnus(ctx),
        Command::SweepN => run_sweep(ctx),
        Command::TimingScan => run_timing(ctx),
        Command::Figure { tag } => figures::reproduce(tag, ctx),
    }
}

/// Parses arguments, runs one command, writes the manifest and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let name = cli.command.name();
    let (config, canonical) = match load_config(cli.spec.as_deref(), &cli.set) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("sideband {name}: {}", f.status());
            return f.exit_code();
        }
    };
    if cli.grid == 0 {
        eprintln!("sideband {name}: --grid must be positive");
        return EXIT_USAGE;
    }
    let out = match OutputDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("sideband {name}: cannot create {}: {e}", cli.out.display());
            return EXIT_USAGE;
        }
    };
    let mut ctx = Context { config, grid: cli.grid, out };
    let outcome = execute(cli.command, &mut ctx);
    let (code, status) = match &outcome {
        Ok(()) => (EXIT_OK, "ok".to_string()),
        Err(f) => (f.exit_code(), f.status()),
    };
    if code != EXIT_OK {
        eprintln!("sideband {name}: {status}");
    }
    match ctx.out.finish(&name, canonical, cli.grid, code, &status) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("sideband {name}: cannot write manifest: {e}");
            if code == EXIT_OK {
                EXIT_USAGE
            } else {
                code
            }
        }
    }
}
