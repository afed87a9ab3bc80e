//! Sensitivity of the final population to the stopping time, for the
//! optimized pulse and the monochromatic reference.
//!
//! cargo run --example timing_error -- 5

use sideband::fock::BasisIndex;
use sideband::functionals::timing_sensitivity;
use sideband::optimizer::{solve, OptimizationProblem};

fn main() -> sideband::error::Result<()> {
    let n: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let problem = OptimizationProblem::paper(n);
    let poly = solve(&problem)?.spec(&problem)?;
    let mono = problem.monochromatic()?;
    println!("{:>3} {:>14} {:>14}", "q", "|dP/dt| poly", "|dP/dt| mono");
    for q in 1..=8 {
        let a = timing_sensitivity(&poly, BasisIndex::g(1), q)?;
        let b = timing_sensitivity(&mono, BasisIndex::g(1), q)?;
        println!("{q:>3} {a:>14.4e} {b:>14.4e}");
    }
    Ok(())
}
