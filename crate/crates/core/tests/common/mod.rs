#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sideband::drive::PulseSpec;

pub const SUITE_NS: [u32; 6] = [3, 4, 5, 6, 7, 9];

/// Random pulse at m = 10 with per-tone Lamb-Dicke parameters.
pub fn random_spec(rng: &mut StdRng, n: u32) -> PulseSpec {
    let len = 2 * n as usize + 1;
    PulseSpec {
        m: 10,
        n,
        delta: rng.gen_range(0.0..0.5),
        f: (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        eta: (0..len).map(|_| rng.gen_range(0.02..0.1)).collect(),
        f_tg: 0.1,
    }
}

/// 54 specs cycling through the sideband counts of the suite.
pub fn spec_suite(seed: u64) -> Vec<PulseSpec> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..54).map(|k| random_spec(&mut rng, SUITE_NS[k % SUITE_NS.len()])).collect()
}
