//! Closed-form effective Hamiltonian of a pulse: the α coefficients, the
//! operator-basis coefficients and the constraint residuals.
//!
//! cargo run --example effective_coefficients

use sideband::drive::PulseSpec;
use sideband::effective::{
    constraint_residuals_for, operator_coefficients, ConstraintSet, EffectiveCoefficients, OPERATOR_LABELS,
};

fn main() -> sideband::error::Result<()> {
    let spec = PulseSpec::uniform(10, 0, 0.2, vec![2.0], 0.05, 0.1)?;
    let c = EffectiveCoefficients::new(&spec)?;
    println!("branch {:?}, alpha11 branch {:?}", c.branch, c.alpha11_branch);
    for (k, a) in c.alpha0.iter().enumerate() {
        println!("alpha{}^(0) = {a:.6e}", k + 1);
    }
    for (order, list) in [(1, &c.alpha1), (2, &c.alpha2)] {
        for (k, a) in list.iter().enumerate() {
            println!("alpha{}^({order}) = {a:.6e}", k + 1);
        }
    }
    for (label, z) in OPERATOR_LABELS.iter().zip(operator_coefficients(&c, 2)) {
        println!("c[{label}] = {z:.6e}");
    }
    for set in [ConstraintSet::Five, ConstraintSet::Seven] {
        println!("{set:?} residuals: {:?}", constraint_residuals_for(&spec, set)?.r);
    }
    Ok(())
}
