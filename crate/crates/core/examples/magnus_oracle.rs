//! Checks every closed-form coefficient of a random pulse against its
//! defining time integral, and reports the size of the numeric Magnus terms.
//!
//! cargo run --example magnus_oracle -- 7

use rand::{Rng, SeedableRng};
use sideband::drive::PulseSpec;
use sideband::fock::SpaceConfig;
use sideband::linalg::max_abs;
use sideband::magnus::{magnus_numeric, verify_coefficients};

fn main() -> sideband::error::Result<()> {
    let n: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let f = (0..2 * n + 1).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let spec = PulseSpec::uniform(10, n, rng.gen_range(0.0..0.5), f, 0.05, 0.1)?;
    for c in verify_coefficients(&spec)? {
        println!(
            "{:<10} closed {:>26.14e}  oracle {:>26.14e}  rel {:.1e}",
            c.label, c.closed_form, c.oracle, c.rel_err
        );
    }
    let m = magnus_numeric(&spec, SpaceConfig::new(6, 2)?)?;
    println!(
        "max|M0| {:.3e}  max|M1| {:.3e}  max|M2| {:.3e}  ({} nodes per axis)",
        max_abs(&m.m0),
        max_abs(&m.m1),
        max_abs(&m.m2),
        m.nodes_per_axis
    );
    Ok(())
}
