//! Perturbative state and gate infidelities next to the numerical one-cycle
//! infidelity, for the monochromatic and an optimized pulse.
//!
//! cargo run --example infidelity_functionals

use sideband::drive::PulseSpec;
use sideband::fock::BasisIndex;
use sideband::functionals::{
    cycle_infidelity, gate_infidelity_asymptotic, gate_infidelity_truncated, state_infidelity,
};
use sideband::optimizer::{solve, OptimizationProblem};

fn show(name: &str, spec: &PulseSpec) -> sideband::error::Result<()> {
    let g1 = BasisIndex::g(1);
    println!(
        "{name:<14} state(g1) {:.4e}  state(e0) {:.4e}  gate d=2 {:.4e}  gate asymptotic {:.4e}  cycle {:.4e}",
        state_infidelity(spec, g1)?.value,
        state_infidelity(spec, BasisIndex::e(0))?.value,
        gate_infidelity_truncated(spec, 2)?.value,
        gate_infidelity_asymptotic(spec)?.value,
        cycle_infidelity(spec, g1)?.value.value,
    );
    Ok(())
}

fn main() -> sideband::error::Result<()> {
    let problem = OptimizationProblem::paper(5);
    show("monochromatic", &problem.monochromatic()?)?;
    show("n = 5", &solve(&problem)?.spec(&problem)?)?;
    Ok(())
}
