//! Quadrature oracle for the Magnus terms and for the scalar α integrals.
//!
//! Nothing here is used when optimizing; it exists to check the closed
//! forms in [`crate::effective`] against their defining integrals.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::drive::{h_funcs, DriveCoefficients, PulseSpec, PERIOD};
use crate::error::{Error, Result};
use crate::fock::{build_operators, Operator, SpaceConfig};
use crate::linalg::{commutator, max_abs};
use crate::quadrature::{agrees, Cumulative, NestedGrid, Samples};

/// Gauss–Legendre nodes per panel.
const NODES_PER_PANEL: usize = 16;
/// Panels on the first refinement level (32 nodes per axis).
const FIRST_PANELS: usize = 2;
/// Refinement cap: 1024 nodes per axis.
const MAX_PANELS: usize = 64;

/// Label of one scalar coefficient, α_index^(order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlphaLabel {
    pub order: usize,
    pub index: usize,
}

impl AlphaLabel {
    pub fn new(order: usize, index: usize) -> Result<Self> {
        let valid = match order {
            1 => (1..=8).contains(&index),
            2 => (1..=11).contains(&index),
            _ => false,
        };
        if !valid {
            return Err(Error::Usage(format!("no coefficient alpha{index}^({order})")));
        }
        Ok(Self { order, index })
    }

    /// All labels with an oracle, first order then second.
    pub fn all() -> Vec<Self> {
        let first = (1..=8).map(|index| Self { order: 1, index });
        let second = (1..=11).map(|index| Self { order: 2, index });
        first.chain(second).collect()
    }
}

impl fmt::Display for AlphaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha{}^({})", self.index, self.order)
    }
}

impl FromStr for AlphaLabel {
    type Err = Error;

    /// Accepts `alpha5^(1)` or `a5_1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("unknown coefficient label '{s}'"));
        let (index, order) = if let Some(rest) = s.strip_prefix("alpha") {
            let (i, o) = rest.split_once("^(").ok_or_else(bad)?;
            (i, o.strip_suffix(')').ok_or_else(bad)?)
        } else if let Some(rest) = s.strip_prefix('a') {
            rest.split_once('_').ok_or_else(bad)?
        } else {
            return Err(bad());
        };
        let index = index.parse().map_err(|_| bad())?;
        let order = order.parse().map_err(|_| bad())?;
        Self::new(order, index).map_err(|_| bad())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum F {
    One,
    H1,
    H2,
    H3,
    C1,
    C2,
    C3,
}

const FUNCS: [F; 7] = [F::One, F::H1, F::H2, F::H3, F::C1, F::C2, F::C3];

/// Drive functions and their running integrals sampled on one grid.
struct Sampled {
    grid: NestedGrid,
    samples: Vec<Samples>,
    cumulative: Vec<Cumulative>,
}

impl Sampled {
    fn new(spec: &PulseSpec, panels: usize) -> Self {
        let grid = NestedGrid::new(PERIOD, panels, NODES_PER_PANEL);
        let at = |nodes: &[f64]| nodes.iter().map(|&t| h_funcs(spec, t)).collect::<Vec<_>>();
        let (hx, hy, hz) = (at(&grid.x), at(&grid.y), at(&grid.z));
        let pick = |g: fn(&DriveCoefficients) -> C64| Samples {
            x: hx.iter().map(g).collect(),
            y: hy.iter().map(g).collect(),
            z: hz.iter().map(g).collect(),
        };
        let samples = vec![
            grid.one(),
            pick(|h| h.h1),
            pick(|h| h.h2),
            pick(|h| h.h3),
            pick(|h| h.h1.conj()),
            pick(|h| h.h2.conj()),
            pick(|h| h.h3.conj()),
        ];
        let cumulative = samples.iter().map(|s| grid.cumulative(s)).collect();
        Self { grid, samples, cumulative }
    }

    fn id(f: F) -> usize {
        FUNCS.iter().position(|g| *g == f).unwrap()
    }

    fn n1(&self, a: F) -> C64 {
        self.grid.integral(&self.samples[Self::id(a)])
    }

    fn n2(&self, a: F, b: F) -> C64 {
        self.grid.nested2(&self.samples[Self::id(a)], &self.cumulative[Self::id(b)])
    }

    fn n3(&self, a: F, b: F, c: F) -> C64 {
        self.grid.nested3(&self.samples[Self::id(a)], &self.samples[Self::id(b)], &self.cumulative[Self::id(c)])
    }

    /// The defining integral of one coefficient.
    fn alpha(&self, label: AlphaLabel, delta: f64) -> C64 {
        use F::*;
        let t = PERIOD;
        let i = C64::i();
        let n2 = |a, b| self.n2(a, b);
        let n3 = |a, b, c| self.n3(a, b, c);
        let antisym = |x, y| n2(x, y) - n2(y, x);
        let quad = |x, y| n3(x, One, y) + n3(y, One, x) - n3(x, y, One) - n3(One, y, x);
        let p = -1.0 / (6.0 * t);
        match (label.order, label.index) {
            (1, k @ 1..=3) => {
                let h = [H1, H2, H3][k - 1];
                -i / (2.0 * t) * delta * antisym(h, One)
            }
            (1, 4) => -i / (4.0 * t) * antisym(H1, C1),
            (1, 5) => -i / (2.0 * t) * (-n2(C1, H2) + n2(H1, C3) + n2(H2, C1) - n2(C3, H1)),
            (1, 6) => -i / (2.0 * t) * antisym(H2, C3),
            (1, 7) => -i / (4.0 * t) * antisym(H2, C2),
            (1, 8) => -i / (4.0 * t) * antisym(H3, C3),
            (2, k @ 1..=3) => {
                let h = [H1, H2, H3][k - 1];
                p * delta * delta * (n3(One, One, h) + n3(h, One, One) - 2.0 * n3(One, h, One))
            }
            (2, 4) => p * delta * quad(C1, H1),
            (2, 5) => p * delta * (quad(C1, H2) + quad(H1, C3) + quad(H2, C1) + quad(C3, H1)),
            (2, 6) => p * delta * (quad(H2, C3) + quad(C3, H2)),
            (2, 7) => p * delta * quad(C2, H2),
            (2, 8) => p * delta * quad(C3, H3),
            (2, 9) => p * (-2.0 * n3(H1, H1, C1) + 4.0 * n3(H1, C1, H1) - 2.0 * n3(C1, H1, H1)),
            (2, 10) => p * self.mixed(H2, C3),
            (2, 11) => p * self.mixed(H3, C2),
            _ => unreachable!("labels are validated on construction"),
        }
    }

    /// Shared shape of α₁₀^(2) and α₁₁^(2); `s` is the sideband function and `c` the other conjugate.
    fn mixed(&self, s: F, c: F) -> C64 {
        use F::*;
        let n3 = |a, b, c| self.n3(a, b, c);
        -2.0 * n3(H1, H1, c) - 2.0 * n3(H1, s, C1) + 4.0 * n3(H1, C1, s) + 4.0 * n3(H1, c, H1) - 2.0 * n3(s, H1, C1)
            + 4.0 * n3(s, C1, H1)
            - 2.0 * n3(c, H1, H1)
            - 2.0 * n3(C1, s, H1)
            - 2.0 * n3(C1, H1, s)
    }
}

/// Oracle values for a set of coefficients.
#[derive(Clone, Debug)]
pub struct AlphaOracle {
    pub values: Vec<(AlphaLabel, C64)>,
    pub nodes_per_axis: usize,
}

impl AlphaOracle {
    pub fn get(&self, label: AlphaLabel) -> Option<C64> {
        self.values.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }
}

/// Evaluates the defining integrals of `labels`, doubling the node count
/// until two successive levels agree within `rel` (with an absolute floor).
pub fn alpha_oracle(spec: &PulseSpec, labels: &[AlphaLabel], rel: f64, floor: f64) -> Result<AlphaOracle> {
    spec.validate()?;
    let eval = |panels| {
        let s = Sampled::new(spec, panels);
        labels.iter().map(|&l| (l, s.alpha(l, spec.delta))).collect::<Vec<_>>()
    };
    let mut panels = FIRST_PANELS;
    let mut prev = eval(panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = eval(panels);
        if prev.iter().zip(&next).all(|((_, a), (_, b))| agrees(*a, *b, rel, floor)) {
            return Ok(AlphaOracle { values: next, nodes_per_axis: panels * NODES_PER_PANEL });
        }
        prev = next;
    }
    Err(Error::OracleFailure(format!("alpha integrals not converged at {} nodes per axis", panels * NODES_PER_PANEL)))
}

/// One coefficient's defining integral, converged to 1e−10 relative.
pub fn scalar_alpha_numeric(spec: &PulseSpec, label: AlphaLabel) -> Result<C64> {
    let o = alpha_oracle(spec, &[label], 1e-10, 1e-15)?;
    Ok(o.values[0].1)
}

/// M₀, M₁, M₂ evaluated at t = T.
#[derive(Clone, Debug)]
pub struct MagnusTerms {
    pub m0: Operator,
    pub m1: Operator,
    pub m2: Operator,
    pub nodes_per_axis: usize,
}

impl MagnusTerms {
    /// (M₀ + … + M_order)/T, the effective Hamiltonian through that order.
    pub fn effective(&self, order: usize) -> Operator {
        let mut h = self.m0.clone();
        if order >= 1 {
            h += &self.m1;
        }
        if order >= 2 {
            h += &self.m2;
        }
        h / C64::new(PERIOD, 0.0)
    }
}

/// Operator skeleton of H(t) = Σ_k c_k(t) O_k with the commutators each
/// Magnus order needs, so refinement levels only redo scalar integrals.
struct Skeleton {
    dim: usize,
    singles: Vec<(F, Operator)>,
    pairs: Vec<(F, F, Operator)>,
    triples: Vec<(F, F, F, Operator)>,
}

impl Skeleton {
    fn new(delta: f64, cfg: SpaceConfig) -> Self {
        let o = build_operators(cfg);
        let singles = vec![
            (F::One, o.sigma_z.scale(-0.5 * delta)),
            (F::H1, o.sigma_plus.clone()),
            (F::C1, o.sigma_minus.clone()),
            (F::H2, &o.sigma_plus * &o.a),
            (F::C2, &o.sigma_minus * &o.a_dag),
            (F::H3, &o.sigma_plus * &o.a_dag),
            (F::C3, &o.sigma_minus * &o.a),
        ];
        let i = C64::i();
        let mut pairs = Vec::new();
        let mut triples = Vec::new();
        for (fa, oa) in &singles {
            for (fb, ob) in &singles {
                let ab = commutator(oa, ob);
                if max_abs(&ab) != 0.0 {
                    pairs.push((*fa, *fb, &ab * (-0.5 * i)));
                }
                let ba = commutator(ob, oa);
                for (fc, oc) in &singles {
                    // (−i/3)∫[H, M₁(τ)] with M₁(τ) = (−i/2)∫∫[H, H]
                    let running = commutator(oa, &commutator(ob, oc)).scale(-1.0 / 6.0);
                    // (−1/6)∫∫∫[H(t₃), [H(t₂), H(t₁)]]
                    let ordered = commutator(oc, &ba).scale(-1.0 / 6.0);
                    let total = running + ordered;
                    if max_abs(&total) != 0.0 {
                        triples.push((*fa, *fb, *fc, total));
                    }
                }
            }
        }
        Self { dim: cfg.dim(), singles, pairs, triples }
    }
}

fn magnus_at(spec: &PulseSpec, sk: &Skeleton, panels: usize) -> (Operator, Operator, Operator) {
    let s = Sampled::new(spec, panels);
    let mut m0 = Operator::zeros(sk.dim, sk.dim);
    let mut m1 = Operator::zeros(sk.dim, sk.dim);
    let mut m2 = Operator::zeros(sk.dim, sk.dim);
    for (fa, op) in &sk.singles {
        m0 += op * s.n1(*fa);
    }
    for (fa, fb, op) in &sk.pairs {
        m1 += op * s.n2(*fa, *fb);
    }
    for (fa, fb, fc, op) in &sk.triples {
        m2 += op * s.n3(*fa, *fb, *fc);
    }
    (m0, m1, m2)
}

/// Magnus terms at t = T by nested quadrature, refined until successive
/// levels agree within 1e−8 relative in max-norm.
pub fn magnus_numeric(spec: &PulseSpec, cfg: SpaceConfig) -> Result<MagnusTerms> {
    magnus_numeric_tol(spec, cfg, 1e-8)
}

pub fn magnus_numeric_tol(spec: &PulseSpec, cfg: SpaceConfig, rel: f64) -> Result<MagnusTerms> {
    spec.validate()?;
    let sk = Skeleton::new(spec.delta, cfg);
    let close = |a: &Operator, b: &Operator| max_abs(&(a - b)) <= rel * max_abs(b) + 1e-15;
    let mut panels = FIRST_PANELS;
    let mut prev = magnus_at(spec, &sk, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = magnus_at(spec, &sk, panels);
        if close(&prev.0, &next.0) && close(&prev.1, &next.1) && close(&prev.2, &next.2) {
            let (m0, m1, m2) = next;
            return Ok(MagnusTerms { m0, m1, m2, nodes_per_axis: panels * NODES_PER_PANEL });
        }
        prev = next;
    }
    Err(Error::OracleFailure(format!("Magnus terms not converged at {} nodes per axis", panels * NODES_PER_PANEL)))
}

/// One row of the closed-form vs oracle report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub label: String,
    pub closed_form: C64,
    pub oracle: C64,
    pub rel_err: f64,
}

/// Relative error with an absolute floor in the denominator.
pub fn relative_error(closed: C64, oracle: C64, floor: f64) -> f64 {
    (closed - oracle).norm() / oracle.norm().max(closed.norm()).max(floor)
}

/// Compares every closed-form α against its defining integral.
pub fn verify_coefficients(spec: &PulseSpec) -> Result<Vec<CoefficientCheck>> {
    let closed = crate::effective::EffectiveCoefficients::new(spec)?;
    let labels = AlphaLabel::all();
    let oracle = alpha_oracle(spec, &labels, 1e-10, 1e-15)?;
    Ok(labels
        .iter()
        .map(|&l| {
            let c = closed.get(l.order, l.index).unwrap();
            let o = oracle.get(l).unwrap();
            CoefficientCheck { label: l.to_string(), closed_form: c, oracle: o, rel_err: relative_error(c, o, 1e-12) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{alpha_first, assemble};
    use crate::linalg::hermiticity_defect;

    fn fig5() -> PulseSpec {
        PulseSpec::uniform(10, 0, 0.2, vec![2.0], 0.05, 0.1).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        for l in AlphaLabel::all() {
            assert_eq!(l.to_string().parse::<AlphaLabel>().unwrap(), l);
        }
        assert_eq!("a5_1".parse::<AlphaLabel>().unwrap(), AlphaLabel::new(1, 5).unwrap());
        assert!("alpha9^(1)".parse::<AlphaLabel>().is_err());
        assert!("beta".parse::<AlphaLabel>().is_err());
    }

    #[test]
    fn single_tone_oracle_values() {
        let a1 = scalar_alpha_numeric(&fig5(), AlphaLabel::new(1, 1).unwrap()).unwrap();
        assert!((a1 - C64::new(-0.02, 0.0)).norm() < 1e-12);
        let a4 = scalar_alpha_numeric(&fig5(), AlphaLabel::new(1, 4).unwrap()).unwrap();
        assert!((a4 - C64::new(0.05, 0.0)).norm() < 1e-12);
        let a2 = scalar_alpha_numeric(&fig5(), AlphaLabel::new(1, 2).unwrap()).unwrap();
        assert!(a2.norm() < 1e-14);
    }

    #[test]
    fn resonant_pair_branch_is_needed() {
        let spec =
            PulseSpec::uniform(10, 5, 0.13, vec![0.4, -0.3, 0.2, 0.1, -0.5, 1.9, 0.3, 0.6, -0.2, 0.1, 0.7], 0.05, 0.1)
                .unwrap();
        let oracle = scalar_alpha_numeric(&spec, AlphaLabel::new(1, 5).unwrap()).unwrap();
        let closed = alpha_first(&spec).unwrap()[4];
        assert!(relative_error(closed, oracle, 1e-12) < 1e-8);
        // Without the resonant-pair sums the expression misses the oracle.
        let i = C64::i();
        let no_pairs: C64 =
            spec.js().map(|j| -i * spec.eta_at(0) * spec.f_at(0) * spec.f_at(j) / (4.0 * (10 - j) as f64)).sum();
        assert!(relative_error(no_pairs, oracle, 1e-12) > 1e-3);
    }

    #[test]
    fn undriven_magnus() {
        let spec = PulseSpec::uniform(10, 1, 0.3, vec![0.0; 3], 0.05, 0.0).unwrap();
        let cfg = SpaceConfig::new(3, 0).unwrap();
        let m = magnus_numeric(&spec, cfg).unwrap();
        let ops = build_operators(cfg);
        let expected = ops.sigma_z.scale(-0.15 * PERIOD);
        assert!(max_abs(&(&m.m0 - expected)) < 1e-12);
        assert!(max_abs(&m.m1) < 1e-15 && max_abs(&m.m2) < 1e-15);
    }

    #[test]
    fn mean_sideband_element() {
        let cfg = SpaceConfig::new(3, 0).unwrap();
        let m = magnus_numeric(&fig5(), cfg).unwrap();
        let h = m.m0 / C64::new(PERIOD, 0.0);
        assert!((h[(1, 2)] - C64::new(0.0, 0.05)).norm() < 1e-12);
        assert!(hermiticity_defect(&m.m1) < 1e-10 && hermiticity_defect(&m.m2) < 1e-10);
    }

    #[test]
    fn third_order_term_scales_cubically() {
        let spec = PulseSpec::uniform(10, 2, 0.0, vec![0.3, -0.4, 1.2, 0.2, 0.5], 0.05, 0.1).unwrap();
        let cfg = SpaceConfig::new(4, 0).unwrap();
        let a = magnus_numeric(&spec, cfg).unwrap();
        let b = magnus_numeric(&spec.scaled(2.0), cfg).unwrap();
        let ratio = max_abs(&b.m2) / max_abs(&a.m2);
        assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn assembled_matches_oracle_through_first_order() {
        let spec = PulseSpec::uniform(10, 3, 0.21, vec![0.3, -0.8, 0.2, 1.7, 0.4, -0.3, 0.5], 0.05, 0.1).unwrap();
        let cfg = SpaceConfig::new(5, 0).unwrap();
        let m = magnus_numeric(&spec, cfg).unwrap();
        let first = crate::effective::assemble_order(&spec, cfg, 1).unwrap().h_eff;
        // Compare away from the truncation edge.
        let diff = m.effective(1) - first;
        let inner = diff.view((0, 0), (6, 6)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(inner < 1e-10, "{inner}");
        assert!(assemble(&spec, cfg).is_ok());
    }
}
