//! Data series behind each figure, with the caption parameters as defaults.

use serde_json::json;

use super::io::csv;
use super::{optimized, Context, Failure, FigureTag, PulseSource};
use crate::drive::{PulseSpec, PERIOD};
use crate::effective::{assemble_order, ConstraintSet};
use crate::fock::{BasisIndex, Electronic};
use crate::functionals::Objective;
use crate::optimizer::{improvement_sweep, OptimizationProblem, SweepRow};
use crate::propagate::{
    cycle_length, pair_level, simulate, simulate_effective, simulate_target, uniform_grid, SimulationTrace,
};

pub fn reproduce(tag: FigureTag, ctx: &mut Context) -> Result<(), Failure> {
    match tag {
        FigureTag::Fig1 => dynamics(ctx, tag, None, None),
        FigureTag::Fig2 => improvement(ctx),
        FigureTag::Fig3 => dynamics(ctx, tag, None, Some((7.8 * PERIOD, 8.2 * PERIOD))),
        FigureTag::Fig4 => dynamics(ctx, tag, Some(ConstraintSet::Seven), None),
        FigureTag::Fig5 => effective_orders(ctx),
        FigureTag::Fig6 => objective_comparison(ctx),
    }
}

/// Same motional level, other electronic state.
fn carrier_partner(s: BasisIndex) -> BasisIndex {
    match s.electronic {
        Electronic::G => BasisIndex::e(s.k),
        Electronic::E => BasisIndex::g(s.k),
    }
}

/// The state the red sideband couples to.
fn sideband_partner(s: BasisIndex) -> Result<BasisIndex, Failure> {
    match s.electronic {
        Electronic::G if s.k > 0 => Ok(BasisIndex::e(s.k - 1)),
        Electronic::E => Ok(BasisIndex::g(s.k + 1)),
        _ => Err(Failure::Usage("the initial state must have a red-sideband partner".into())),
    }
}

fn column(trace: &SimulationTrace, s: BasisIndex) -> Result<Vec<f64>, Failure> {
    trace.column(s).ok_or_else(|| Failure::Other(format!("state {s} outside the truncated space")))
}

/// Window grid prefixed by t = 0; the caller drops the first row.
fn window_grid(lo: f64, hi: f64, per_period: usize) -> Vec<f64> {
    let n = (((hi - lo) / PERIOD) * per_period as f64).ceil().max(1.0) as usize;
    let mut grid = vec![0.0];
    grid.extend((0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64));
    grid
}

fn transpose(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..columns[0].len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}

/// Monochromatic, target and polychromatic populations of the initial state
/// and its carrier partner.
fn dynamics(
    ctx: &mut Context,
    tag: FigureTag,
    constraints: Option<ConstraintSet>,
    window: Option<(f64, f64)>,
) -> Result<(), Failure> {
    let (spec, res) = match constraints {
        Some(set) => {
            let problem = OptimizationProblem { constraints: set, ..ctx.config.problem.clone() };
            let (spec, res) = optimized(&problem)?;
            (spec, Some(res))
        }
        None => ctx.pulse()?,
    };
    let mono = ctx.config.problem.monochromatic()?;
    let initial = ctx.config.initial_state()?;
    let partner = carrier_partner(initial);
    let cfg = ctx.config.space_for(initial)?;
    let (grid, skip) = match window {
        Some((lo, hi)) => (window_grid(lo, hi, ctx.grid), 1),
        None => (uniform_grid(ctx.config.cycles * cycle_length(spec.f_tg, pair_level(initial))?, ctx.grid), 0),
    };
    let mono_trace = simulate(&mono, cfg, initial, &grid)?;
    let poly_trace = simulate(&spec, cfg, initial, &grid)?;
    let target_trace = simulate_target(spec.f_tg, cfg, initial, &grid)?;
    ctx.leakage_note("monochromatic", mono_trace.leakage, mono_trace.leakage_flagged);
    ctx.leakage_note("polychromatic", poly_trace.leakage, poly_trace.leakage_flagged);
    let mut columns = vec![grid.clone()];
    for s in [initial, partner] {
        for trace in [&mono_trace, &target_trace, &poly_trace] {
            columns.push(column(trace, s)?);
        }
    }
    let rows = transpose(&columns).into_iter().skip(skip);
    let (a, b) = (initial.label(), partner.label());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain([&a, &b].iter().flat_map(|l| ["mono", "target", "poly"].map(|w| format!("{l}_{w}"))))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let name = tag.name();
    let params = json!({ "n": spec.n, "initial": ctx.config.initial, "window": window, "constraints": constraints });
    ctx.out.write(&format!("{name}.csv"), &csv(&header, rows), "mono, target and poly populations", params.clone())?;
    ctx.out.write_json(
        &format!("{name}_pulse.json"),
        &json!({ "pulse": spec, "optimization": res }),
        "plotted pulse",
        params,
    )?;
    Ok(())
}

/// Exact populations against the zeroth, first and second order effective
/// dynamics for a single resonant tone.
fn effective_orders(ctx: &mut Context) -> Result<(), Failure> {
    let p = &ctx.config.problem;
    let spec = match &ctx.config.pulse {
        PulseSource::Explicit(s) => s.clone(),
        PulseSource::Named(_) => PulseSpec::uniform(p.m, 0, 0.2, vec![2.0], p.eta, p.f_tg)?,
    };
    let initial = ctx.config.initial_state()?;
    let partner = sideband_partner(initial)?;
    let cfg = ctx.config.space_for(initial)?;
    let grid = uniform_grid(ctx.config.cycles * cycle_length(spec.f_tg, pair_level(initial))?, ctx.grid);
    let mut traces = vec![simulate(&spec, cfg, initial, &grid)?];
    ctx.leakage_note("exact", traces[0].leakage, traces[0].leakage_flagged);
    for order in 0..=2 {
        let h = assemble_order(&spec, cfg, order)?.h_eff;
        traces.push(simulate_effective(&h, cfg, initial, &grid)?);
    }
    let mut columns = vec![grid];
    let mut header = vec!["t".to_string()];
    for s in [initial, partner] {
        for (trace, w) in traces.iter().zip(["exact", "zeroth", "first", "second"]) {
            columns.push(column(trace, s)?);
            header.push(format!("{}_{w}", s.label()));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let params = json!({ "pulse": spec, "initial": ctx.config.initial });
    ctx.out.write("fig5.csv", &csv(&header, transpose(&columns)), "exact vs effective populations", params)?;
    Ok(())
}

fn sweep(ctx: &mut Context, objective: Objective) -> Result<Vec<SweepRow>, Failure> {
    let problem = OptimizationProblem { objective, ..ctx.config.problem.clone() };
    let rows = improvement_sweep(&problem, &ctx.config.ns)?;
    for r in rows.iter().filter(|r| r.r_cycle.is_none()) {
        ctx.out.note(format!("{}: no improvement ratio for n = {}: {:?}", objective.label(), r.n, r.error));
    }
    Ok(rows)
}

/// Theoretical and one-cycle improvement against n.
fn improvement(ctx: &mut Context) -> Result<(), Failure> {
    let rows = sweep(ctx, ctx.config.problem.objective)?;
    let nan = f64::NAN;
    let table = rows.iter().map(|r| vec![r.n as f64, r.r_theory.unwrap_or(nan), r.r_cycle.unwrap_or(nan)]);
    let params = json!({ "objective": ctx.config.problem.objective, "ns": ctx.config.ns });
    ctx.out.write("fig2.csv", &csv(&["n", "R_theory", "R_cycle"], table), "improvement against n", params)?;
    Ok(())
}

/// One-cycle improvement of state-optimized against gate-optimized pulses.
fn objective_comparison(ctx: &mut Context) -> Result<(), Failure> {
    let initial = ctx.config.initial_state()?;
    let state = sweep(ctx, Objective::State { initial })?;
    let gate = sweep(ctx, Objective::GateTruncated { d: ctx.config.d })?;
    let nan = f64::NAN;
    let table =
        state.iter().zip(&gate).map(|(s, g)| vec![s.n as f64, s.r_cycle.unwrap_or(nan), g.r_cycle.unwrap_or(nan)]);
    let params = json!({ "d": ctx.config.d, "initial": ctx.config.initial, "ns": ctx.config.ns });
    ctx.out.write(
        "fig6.csv",
        &csv(&["n", "R_state", "R_truncated"], table),
        "state vs truncated gate objective",
        params,
    )?;
    Ok(())
}
