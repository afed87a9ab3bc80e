//! How well the zeroth, first and second order effective Hamiltonians track
//! the exact single-tone dynamics, over the full grid and at t = qT only.
//!
//! cargo run --example effective_vs_exact

use sideband::drive::PulseSpec;
use sideband::effective::assemble_order;
use sideband::fock::{BasisIndex, SpaceConfig, DEFAULT_BUFFER};
use sideband::propagate::{cycle_length, simulate, simulate_effective, uniform_grid};

fn main() -> sideband::error::Result<()> {
    let spec = PulseSpec::uniform(10, 0, 0.2, vec![2.0], 0.05, 0.1)?;
    let initial = BasisIndex::g(1);
    let cfg = SpaceConfig::for_initial(1, DEFAULT_BUFFER)?;
    let per_period = 100;
    let grid = uniform_grid(2.0 * cycle_length(spec.f_tg, 1)?, per_period);
    let exact = simulate(&spec, cfg, initial, &grid)?.column(initial).unwrap();
    for order in 0..=2 {
        let h = assemble_order(&spec, cfg, order)?.h_eff;
        let p = simulate_effective(&h, cfg, initial, &grid)?.column(initial).unwrap();
        let dev = |idx: &mut dyn Iterator<Item = usize>| idx.map(|i| (p[i] - exact[i]).abs()).fold(0.0, f64::max);
        println!(
            "order {order}: max |dP_g1| {:.4} everywhere, {:.4} at t = qT",
            dev(&mut (0..grid.len())),
            dev(&mut (0..grid.len()).step_by(per_period))
        );
    }
    Ok(())
}
