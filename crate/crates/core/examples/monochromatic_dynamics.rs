//! Exact dynamics of the resonant single-tone drive against the ideal red
//! sideband rotation, sampled every quarter of a target cycle.
//!
//! cargo run --example monochromatic_dynamics

use sideband::drive::monochromatic_reference;
use sideband::fock::{BasisIndex, SpaceConfig, DEFAULT_BUFFER};
use sideband::propagate::{cycle_length, simulate, simulate_target};

fn main() -> sideband::error::Result<()> {
    let spec = monochromatic_reference(0.1, 0.05, 10)?;
    let initial = BasisIndex::g(1);
    let cfg = SpaceConfig::for_initial(1, DEFAULT_BUFFER)?;
    let tc = cycle_length(spec.f_tg, 1)?;
    let grid: Vec<f64> = (0..=8).map(|q| q as f64 * tc / 4.0).collect();
    let exact = simulate(&spec, cfg, initial, &grid)?;
    let target = simulate_target(spec.f_tg, cfg, initial, &grid)?;
    let (pg, pe) = (exact.column(initial).unwrap(), exact.column(BasisIndex::e(1)).unwrap());
    let pt = target.column(initial).unwrap();
    println!("{:>10} {:>12} {:>12} {:>12}", "t/Tc", "P_g1", "target", "P_e1");
    for (i, t) in grid.iter().enumerate() {
        println!("{:>10.2} {:>12.6} {:>12.6} {:>12.3e}", t / tc, pg[i], pt[i], pe[i]);
    }
    println!("unitarity defect {:.1e}, leakage {:.1e}", exact.unitarity_defect, exact.leakage);
    Ok(())
}
