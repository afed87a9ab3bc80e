//! Optimizes a polychromatic pulse at the caption parameters and compares its
//! one-cycle infidelity with the monochromatic reference.
//!
//! cargo run --example optimize_pulse -- 6

use sideband::fock::BasisIndex;
use sideband::functionals::cycle_infidelity;
use sideband::optimizer::{solve, OptimizationProblem};

fn main() -> sideband::error::Result<()> {
    let ns: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ns = if ns.is_empty() { vec![5] } else { ns };
    let base = OptimizationProblem::default();
    let mono = base.monochromatic()?;
    let i_mono = cycle_infidelity(&mono, BasisIndex::g(1))?.value.value;
    let obj_mono = base.objective.evaluate(&mono)?;
    println!("monochromatic: I_cycle = {i_mono:.6e}, objective = {obj_mono:.6e}");
    for n in ns {
        let problem = OptimizationProblem::paper(n);
        let t = std::time::Instant::now();
        let r = solve(&problem)?;
        let solved = t.elapsed();
        let i_poly = cycle_infidelity(&r.spec(&problem)?, BasisIndex::g(1))?.value.value;
        println!(
            "n = {n}: delta = {:.5}, objective = {:.6e}, feasible = {}, R = {:.4}, R_theory = {:.4} ({:.1?} solve, {:.1?} total)",
            r.delta_opt,
            r.objective_value,
            r.feasible,
            i_mono / i_poly,
            obj_mono / r.objective_value,
            solved,
            t.elapsed()
        );
        let f: Vec<String> = r.f_opt.iter().map(|x| format!("{x:.4}")).collect();
        println!("  f = [{}]", f.join(", "));
    }
    Ok(())
}
