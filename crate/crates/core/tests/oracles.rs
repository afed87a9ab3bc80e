mod common;

use sideband::effective::{Alpha11Branch, Tones};
use sideband::magnus::verify_coefficients;

#[test]
fn suite_covers_all_branches() {
    let branches: Vec<_> =
        common::spec_suite(7).iter().map(|s| Tones::from_spec(s).unwrap().alpha11_branch()).collect();
    for b in [Alpha11Branch::MGt2N, Alpha11Branch::Upper, Alpha11Branch::Lower] {
        assert!(branches.contains(&b), "{b:?} missing");
    }
}

#[test]
fn closed_forms_match_defining_integrals() {
    for spec in common::spec_suite(7).iter().take(12) {
        for c in verify_coefficients(spec).unwrap() {
            assert!(
                c.rel_err < 1e-8,
                "n={} {}: {} vs {} ({:.2e})",
                spec.n,
                c.label,
                c.closed_form,
                c.oracle,
                c.rel_err
            );
        }
    }
}

#[test]
fn assembled_effective_matches_oracle_up_to_eta_squared() {
    use sideband::drive::PulseSpec;
    use sideband::effective::assemble;
    use sideband::fock::SpaceConfig;
    use sideband::magnus::magnus_numeric;

    let cfg = SpaceConfig::new(8, 2).unwrap();
    let residual = |eta: f64| {
        let spec = PulseSpec::uniform(10, 2, 0.15, vec![0.4, -0.6, 1.2, 0.3, -0.5], eta, 0.1).unwrap();
        (assemble(&spec, cfg).unwrap().h_eff - magnus_numeric(&spec, cfg).unwrap().effective(2)).norm()
    };
    let r: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&e| residual(e)).collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "halving eta shrinks the residual by {ratio:.2}");
    }
}
