//! One-cycle improvement over the monochromatic pulse as the number of
//! sidebands grows.
//!
//! cargo run --example improvement_sweep -- 3 4 5 6 7 8 9

use sideband::optimizer::{improvement_sweep, OptimizationProblem};

fn main() -> sideband::error::Result<()> {
    let ns: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ns = if ns.is_empty() { (3..=9).collect() } else { ns };
    let rows = improvement_sweep(&OptimizationProblem::default(), &ns)?;
    println!("I_mono = {:.6e}", rows[0].i_mono);
    println!("{:>3} {:>10} {:>10} {:>10}", "n", "delta", "R_cycle", "R_theory");
    for r in rows {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!("{:>3} {:>10} {:>10} {:>10}", r.n, show(r.delta_opt), show(r.r_cycle), show(r.r_theory));
    }
    Ok(())
}
