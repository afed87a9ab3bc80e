//! Closed-form effective Hamiltonian up to second order, its assembly into
//! independent operators, and the constraint sets imposed on it.

mod first;
pub mod poly;
mod second;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::drive::PulseSpec;
use crate::error::{Error, Result};
use crate::fock::{build_operators, Operator, SpaceConfig};
use poly::{Poly, PolyBuilder};

pub use first::alpha_first_polys;
pub use second::alpha_second_polys;

/// Which printed expression a branch-dependent coefficient uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    /// m > 2n
    MGt2N,
    /// 2n ≥ m > n
    TwoNGeMGtN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Alpha11Branch {
    /// m > 2n
    MGt2N,
    /// 2n ≥ m and 2m > 3n
    Upper,
    /// 2m ≤ 3n (and m > n)
    Lower,
}

/// Integer tone lattice with the fixed parameters (η_j, δ) folded in.
#[derive(Clone, Debug)]
pub struct Tones {
    pub m: i64,
    pub n: i64,
    pub delta: f64,
    eta: Vec<f64>,
}

impl Tones {
    pub fn new(m: u32, n: u32, eta: &[f64], delta: f64) -> Result<Self> {
        if m <= n {
            return Err(Error::UnsupportedRegime { m, n });
        }
        if eta.len() != 2 * n as usize + 1 {
            return Err(Error::Config(format!("expected {} Lamb-Dicke parameters", 2 * n + 1)));
        }
        Ok(Self { m: m as i64, n: n as i64, delta, eta: eta.to_vec() })
    }

    pub fn from_spec(spec: &PulseSpec) -> Result<Self> {
        Self::new(spec.m, spec.n, &spec.eta, spec.delta)
    }

    pub fn vars(&self) -> usize {
        (2 * self.n + 1) as usize
    }

    pub fn js(&self) -> std::ops::RangeInclusive<i64> {
        -self.n..=self.n
    }

    pub fn pairs(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.js().flat_map(move |j| self.js().map(move |q| (j, q)))
    }

    pub fn triples(&self) -> impl Iterator<Item = (i64, i64, i64)> + '_ {
        self.pairs().flat_map(move |(j, q)| self.js().map(move |r| (j, q, r)))
    }

    pub fn eta(&self, j: i64) -> f64 {
        self.eta[(j + self.n) as usize]
    }

    fn var(&self, j: i64) -> usize {
        (j + self.n) as usize
    }

    pub fn m_gt_2n(&self) -> bool {
        self.m > 2 * self.n
    }

    pub fn m_gt_3n(&self) -> bool {
        self.m > 3 * self.n
    }

    pub fn branch(&self) -> Branch {
        if self.m_gt_2n() {
            Branch::MGt2N
        } else {
            Branch::TwoNGeMGtN
        }
    }

    pub fn alpha11_branch(&self) -> Alpha11Branch {
        if self.m_gt_2n() {
            Alpha11Branch::MGt2N
        } else if 2 * self.m > 3 * self.n {
            Alpha11Branch::Upper
        } else {
            Alpha11Branch::Lower
        }
    }
}

/// Collects `coef / den · Π f_j` terms with exact integer denominators.
pub(crate) struct Emitter<'a> {
    tones: &'a Tones,
    builder: PolyBuilder<C64>,
}

impl<'a> Emitter<'a> {
    pub(crate) fn new(tones: &'a Tones) -> Self {
        Self { tones, builder: PolyBuilder::new(tones.vars()) }
    }

    pub(crate) fn add(&mut self, coef: C64, den: i64, js: &[i64]) -> Result<()> {
        if den == 0 {
            return Err(Error::Logic(format!("zero denominator reached for tones {js:?}")));
        }
        let vars: Vec<usize> = js.iter().map(|&j| self.tones.var(j)).collect();
        self.builder.add(coef * (1.0 / den as f64), &vars);
        Ok(())
    }

    pub(crate) fn build(self) -> Poly<C64> {
        self.builder.build()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Re,
    Im,
}

const AXES0: [Axis; 2] = [Axis::Re, Axis::Im];
const AXES1: [Axis; 8] = [Axis::Re, Axis::Im, Axis::Im, Axis::Re, Axis::Im, Axis::Re, Axis::Re, Axis::Re];
const AXES2: [Axis; 11] =
    [Axis::Re, Axis::Im, Axis::Im, Axis::Re, Axis::Im, Axis::Re, Axis::Re, Axis::Re, Axis::Re, Axis::Im, Axis::Im];

const AXIS_TOL: f64 = 1e-12;

fn off_axis(z: C64, axis: Axis) -> f64 {
    match axis {
        Axis::Re => z.im.abs(),
        Axis::Im => z.re.abs(),
    }
}

fn project(z: C64, axis: Axis, what: &str) -> Result<f64> {
    if off_axis(z, axis) > AXIS_TOL * z.norm().max(1.0) {
        return Err(Error::Logic(format!("{what} = {z} is off its {axis:?} axis")));
    }
    Ok(match axis {
        Axis::Re => z.re,
        Axis::Im => z.im,
    })
}

/// The α coefficients at one pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoefficients {
    pub alpha0: [C64; 2],
    pub alpha1: Vec<C64>,
    pub alpha2: Vec<C64>,
    pub branch: Branch,
    pub alpha11_branch: Alpha11Branch,
}

impl EffectiveCoefficients {
    pub fn new(spec: &PulseSpec) -> Result<Self> {
        let tones = Tones::from_spec(spec)?;
        let polys = CoefficientPolys::new(&tones)?;
        let out = polys.eval(&spec.f);
        out.check_axes()?;
        Ok(out)
    }

    fn check_axes(&self) -> Result<()> {
        let groups: [(&str, &[C64], &[Axis]); 3] =
            [("alpha0", &self.alpha0, &AXES0), ("alpha1", &self.alpha1, &AXES1), ("alpha2", &self.alpha2, &AXES2)];
        for (name, vals, axes) in groups {
            for (k, (z, axis)) in vals.iter().zip(axes).enumerate() {
                project(*z, *axis, &format!("{name}[{}]", k + 1))?;
            }
        }
        Ok(())
    }

    /// Coefficient by label, e.g. `(1, 5)` for α₅^(1).
    pub fn get(&self, order: usize, index: usize) -> Option<C64> {
        match order {
            0 => self.alpha0.get(index.checked_sub(1)?).copied(),
            1 => self.alpha1.get(index.checked_sub(1)?).copied(),
            2 => self.alpha2.get(index.checked_sub(1)?).copied(),
            _ => None,
        }
    }
}

/// α₁^(0) = −δ/4, α₂^(0) = iη₀f₀/2.
pub fn alpha_zeroth(spec: &PulseSpec) -> [C64; 2] {
    let f0 = spec.f_at(0);
    [C64::new(-spec.delta / 4.0, 0.0), C64::new(0.0, 0.5 * spec.eta_at(0) * f0)]
}

pub fn alpha_first(spec: &PulseSpec) -> Result<Vec<C64>> {
    Ok(EffectiveCoefficients::new(spec)?.alpha1)
}

pub fn alpha_second(spec: &PulseSpec) -> Result<Vec<C64>> {
    Ok(EffectiveCoefficients::new(spec)?.alpha2)
}

/// All α as polynomials in f at fixed (m, n, η, δ).
#[derive(Clone, Debug)]
pub struct CoefficientPolys {
    pub tones: Tones,
    pub alpha0: [Poly<C64>; 2],
    pub alpha1: Vec<Poly<C64>>,
    pub alpha2: Vec<Poly<C64>>,
}

impl CoefficientPolys {
    pub fn new(tones: &Tones) -> Result<Self> {
        let vars = tones.vars();
        let mut a1 = PolyBuilder::new(vars);
        a1.add(C64::new(-tones.delta / 4.0, 0.0), &[]);
        let mut a2 = PolyBuilder::new(vars);
        a2.add(C64::new(0.0, 0.5 * tones.eta(0)), &[tones.var(0)]);
        Ok(Self {
            tones: tones.clone(),
            alpha0: [a1.build(), a2.build()],
            alpha1: alpha_first_polys(tones)?,
            alpha2: alpha_second_polys(tones)?,
        })
    }

    pub fn eval(&self, f: &[f64]) -> EffectiveCoefficients {
        EffectiveCoefficients {
            alpha0: [self.alpha0[0].eval(f), self.alpha0[1].eval(f)],
            alpha1: self.alpha1.iter().map(|p| p.eval(f)).collect(),
            alpha2: self.alpha2.iter().map(|p| p.eval(f)).collect(),
            branch: self.tones.branch(),
            alpha11_branch: self.tones.alpha11_branch(),
        }
    }

    fn a1(&self, k: usize) -> &Poly<C64> {
        &self.alpha1[k - 1]
    }

    fn a2(&self, k: usize) -> &Poly<C64> {
        &self.alpha2[k - 1]
    }

    /// Constraint expressions as real polynomials, right-hand sides folded in.
    pub fn constraints(&self, set: ConstraintSet, f_tg: f64) -> Vec<Poly<f64>> {
        let sum = |ps: &[&Poly<C64>]| Poly::combine(&ps.iter().map(|p| (1.0, *p)).collect::<Vec<_>>());
        let mut out = vec![
            sum(&[self.a1(5), self.a2(5)]).im(),
            sum(&[self.a1(6), self.a2(6)]).re(),
            sum(&[&self.alpha0[0], self.a1(4), self.a2(4)]).re(),
            sum(&[self.a1(7), self.a2(7), self.a1(8), self.a2(8)]).re(),
        ];
        let sideband = match set {
            ConstraintSet::Five => sum(&[&self.alpha0[1], self.a1(2), self.a2(10)]),
            ConstraintSet::FiveWithSecondOrderSideband | ConstraintSet::Seven => {
                sum(&[&self.alpha0[1], self.a1(2), self.a2(2), self.a2(10)])
            }
        };
        let mut rhs = PolyBuilder::new(self.tones.vars());
        rhs.add(-0.5 * f_tg, &[]);
        out.push(Poly::combine(&[(1.0, &sideband.im()), (1.0, &rhs.build())]));
        if set == ConstraintSet::Seven {
            out.push(sum(&[self.a1(1), self.a2(1), self.a2(9)]).re());
            out.push(sum(&[self.a1(3), self.a2(3), self.a2(11)]).im());
        }
        out
    }
}

/// Which equalities the effective Hamiltonian must satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    /// σz a, σz a², σz, σz a†a zeroed; red sideband matched without α₂^(2).
    #[default]
    Five,
    /// As `Five` but with α₂^(2) in the red-sideband equality.
    FiveWithSecondOrderSideband,
    /// All seven non-identity terms constrained.
    Seven,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        match self {
            ConstraintSet::Seven => 7,
            _ => 5,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// On-axis constraint residuals at a pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResidual {
    pub r: Vec<f64>,
}

impl ConstraintResidual {
    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |a, x| a.max(x.abs()))
    }
}

fn residuals(spec: &PulseSpec, set: ConstraintSet) -> Result<ConstraintResidual> {
    let c = EffectiveCoefficients::new(spec)?;
    let (a0, a1, a2) = (&c.alpha0, &c.alpha1, &c.alpha2);
    let i = C64::i();
    let sideband = match set {
        ConstraintSet::Five => a0[1] + a1[1] + a2[9],
        _ => a0[1] + a1[1] + a2[1] + a2[9],
    } - i * (0.5 * spec.f_tg);
    let mut exprs = vec![
        (a1[4] + a2[4], Axis::Im),
        (a1[5] + a2[5], Axis::Re),
        (a0[0] + a1[3] + a2[3], Axis::Re),
        (a1[6] + a2[6] + a1[7] + a2[7], Axis::Re),
        (sideband, Axis::Im),
    ];
    if set == ConstraintSet::Seven {
        exprs.push((a1[0] + a2[0] + a2[8], Axis::Re));
        exprs.push((a1[2] + a2[2] + a2[10], Axis::Im));
    }
    let r = exprs
        .iter()
        .enumerate()
        .map(|(k, (z, axis))| project(*z, *axis, &format!("constraint {}", k + 1)))
        .collect::<Result<_>>()?;
    Ok(ConstraintResidual { r })
}

/// The five default residuals.
pub fn constraint_residuals(spec: &PulseSpec) -> Result<ConstraintResidual> {
    residuals(spec, ConstraintSet::Five)
}

/// Seven residuals, sideband including α₂^(2).
pub fn full_constraint_residuals(spec: &PulseSpec) -> Result<ConstraintResidual> {
    residuals(spec, ConstraintSet::Seven)
}

pub fn constraint_residuals_for(spec: &PulseSpec, set: ConstraintSet) -> Result<ConstraintResidual> {
    residuals(spec, set)
}

/// Labels of the assembled operator coefficients, in order.
pub const OPERATOR_LABELS: [&str; 8] = ["1", "sz", "sz a", "sz a^2", "sz ad a", "sp", "sp a", "sp ad"];

/// H_eff = Σ c_i O_i + h.c. over O = 𝟙, σz, σz a, σz a², σz a†a, σ₊, σ₊a, σ₊a†.
#[derive(Clone, Debug)]
pub struct AssembledEffective {
    pub c: [C64; 8],
    pub h_eff: Operator,
}

/// Operator coefficients keeping Magnus orders up to `max_order`.
pub fn operator_coefficients(coeffs: &EffectiveCoefficients, max_order: usize) -> [C64; 8] {
    let zero = C64::new(0.0, 0.0);
    let pick = |v: &[C64], k: usize, order: usize| if order <= max_order { v[k - 1] } else { zero };
    let a1 = |k| pick(&coeffs.alpha1, k, 1);
    let a2 = |k| pick(&coeffs.alpha2, k, 2);
    let s7 = a1(7) + a2(7);
    let s8 = a1(8) + a2(8);
    [
        0.5 * (s7 - s8),
        coeffs.alpha0[0] + a1(4) + a2(4) + 0.5 * (s7 + s8),
        a1(5) + a2(5),
        a1(6) + a2(6),
        s7 + s8,
        a1(1) + a2(1) + a2(9),
        coeffs.alpha0[1] + a1(2) + a2(2) + a2(10),
        a1(3) + a2(3) + a2(11),
    ]
}

/// Materializes Σ c_i O_i + h.c. on a truncated space.
pub fn operator_from_coefficients(c: &[C64; 8], cfg: SpaceConfig) -> Operator {
    let ops = build_operators(cfg);
    let sz_a = &ops.sigma_z * &ops.a;
    let basis = [
        ops.identity.clone(),
        ops.sigma_z.clone(),
        sz_a.clone(),
        &sz_a * &ops.a,
        &ops.sigma_z * &ops.a_dag * &ops.a,
        ops.sigma_plus.clone(),
        &ops.sigma_plus * &ops.a,
        &ops.sigma_plus * &ops.a_dag,
    ];
    let dim = cfg.dim();
    let mut h = Operator::zeros(dim, dim);
    for (ci, op) in c.iter().zip(basis.iter()) {
        let term = op * *ci;
        h += &term + term.adjoint();
    }
    h
}

/// Assembled H_eff through second order.
pub fn assemble(spec: &PulseSpec, cfg: SpaceConfig) -> Result<AssembledEffective> {
    assemble_order(spec, cfg, 2)
}

/// Assembled H_eff truncated at Magnus order `max_order` (0, 1 or 2).
pub fn assemble_order(spec: &PulseSpec, cfg: SpaceConfig, max_order: usize) -> Result<AssembledEffective> {
    let coeffs = EffectiveCoefficients::new(spec)?;
    let c = operator_coefficients(&coeffs, max_order);
    Ok(AssembledEffective { c, h_eff: operator_from_coefficients(&c, cfg) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermiticity_defect;
    use proptest::prelude::*;

    fn fig5() -> PulseSpec {
        PulseSpec::uniform(10, 0, 0.2, vec![2.0], 0.05, 0.1).unwrap()
    }

    fn zeros(n: u32, delta: f64, f_tg: f64) -> PulseSpec {
        PulseSpec::uniform(10, n, delta, vec![0.0; 2 * n as usize + 1], 0.05, f_tg).unwrap()
    }

    fn assert_close(z: C64, re: f64, im: f64, tol: f64) {
        assert!((z - C64::new(re, im)).norm() <= tol, "{z} vs {re}+{im}i");
    }

    #[test]
    fn zeroth_order() {
        let a = alpha_zeroth(&fig5());
        assert_close(a[0], -0.05, 0.0, 1e-15);
        assert_close(a[1], 0.0, 0.05, 1e-15);
        assert_close(alpha_zeroth(&zeros(0, 0.2, 0.1))[1], 0.0, 0.0, 0.0);
    }

    #[test]
    fn single_tone_first_order() {
        let a = alpha_first(&fig5()).unwrap();
        assert_close(a[0], -0.02, 0.0, 1e-15);
        assert_close(a[1], 0.0, 0.0, 0.0);
        assert_close(a[3], 0.05, 0.0, 1e-15);
        assert_close(a[7], 6.25e-5, 0.0, 1e-18);
    }

    #[test]
    fn single_tone_second_order() {
        let a = alpha_second(&fig5()).unwrap();
        assert_close(a[0], -4e-4, 0.0, 1e-16);
        assert_close(a[3], 2e-3, 0.0, 1e-16);
    }

    #[test]
    fn undriven_coefficients_vanish() {
        for n in [0, 3, 6, 9] {
            let c = EffectiveCoefficients::new(&zeros(n, 0.3, 0.1)).unwrap();
            assert!(c.alpha1.iter().chain(&c.alpha2).all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn branch_selection() {
        let b = |n| Tones::new(10, n, &vec![0.05; 2 * n as usize + 1], 0.0).unwrap();
        assert_eq!(b(4).branch(), Branch::MGt2N);
        assert_eq!(b(5).branch(), Branch::TwoNGeMGtN);
        assert_eq!(b(5).alpha11_branch(), Alpha11Branch::Upper);
        assert_eq!(b(6).alpha11_branch(), Alpha11Branch::Upper);
        assert_eq!(b(7).alpha11_branch(), Alpha11Branch::Lower);
        assert!(b(3).m_gt_3n() && !b(4).m_gt_3n());
        assert!(Tones::new(5, 5, &[0.05; 11], 0.0).is_err());
    }

    #[test]
    fn lamb_shift_cancellation() {
        let r = constraint_residuals(&fig5()).unwrap();
        let a2 = alpha_second(&fig5()).unwrap();
        assert!((r.r[2] - a2[3].re).abs() < 1e-16);
    }

    #[test]
    fn undriven_residuals() {
        let r = constraint_residuals(&zeros(3, 0.0, 0.0)).unwrap();
        assert!(r.r.iter().all(|x| *x == 0.0));
        let full = full_constraint_residuals(&zeros(3, 0.0, 0.1)).unwrap();
        assert_eq!(full.r.len(), 7);
        for (k, x) in full.r.iter().enumerate() {
            let expected = if k == 4 { -0.05 } else { 0.0 };
            assert!((x - expected).abs() < 1e-16);
        }
    }

    #[test]
    fn undriven_assembly() {
        let cfg = SpaceConfig::new(3, 0).unwrap();
        let a = assemble(&zeros(2, 0.4, 0.1), cfg).unwrap();
        for (k, c) in a.c.iter().enumerate() {
            let expected = if k == 1 { -0.1 } else { 0.0 };
            assert_close(*c, expected, 0.0, 1e-16);
        }
    }

    #[test]
    fn assembled_groupings() {
        let spec = PulseSpec::uniform(10, 3, 0.17, vec![0.3, -0.5, 0.2, 1.8, 0.4, -0.1, 0.6], 0.05, 0.1).unwrap();
        let co = EffectiveCoefficients::new(&spec).unwrap();
        let a = assemble(&spec, SpaceConfig::new(4, 0).unwrap()).unwrap();
        let expected = co.alpha1[6] + co.alpha2[6] + co.alpha1[7] + co.alpha2[7];
        assert!((a.c[4] - expected).norm() < 1e-16);
        assert_eq!(hermiticity_defect(&a.h_eff), 0.0);
    }

    #[test]
    fn polynomial_constraints_match_direct_residuals() {
        let spec = PulseSpec::uniform(10, 6, 0.21, (0..13).map(|k| 0.3 * (k as f64 - 5.5).sin()).collect(), 0.05, 0.1)
            .unwrap();
        let polys = CoefficientPolys::new(&Tones::from_spec(&spec).unwrap()).unwrap();
        for set in [ConstraintSet::Five, ConstraintSet::FiveWithSecondOrderSideband, ConstraintSet::Seven] {
            let direct = constraint_residuals_for(&spec, set).unwrap();
            let via_poly: Vec<f64> = polys.constraints(set, spec.f_tg).iter().map(|p| p.eval(&spec.f)).collect();
            assert_eq!(direct.r.len(), set.len());
            for (a, b) in direct.r.iter().zip(&via_poly) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    fn spec_strategy() -> impl Strategy<Value = PulseSpec> {
        prop::sample::select(vec![0u32, 2, 3, 4, 5, 6, 7, 9]).prop_flat_map(|n| {
            let len = 2 * n as usize + 1;
            (Just(n), 0.0f64..0.5, prop::collection::vec(-2.0f64..2.0, len), prop::collection::vec(0.02f64..0.1, len))
                .prop_map(|(n, delta, f, eta)| PulseSpec { m: 10, n, delta, f, eta, f_tg: 0.1 })
        })
    }

    proptest! {
        #[test]
        fn coefficients_stay_on_axis(spec in spec_strategy()) {
            prop_assert!(EffectiveCoefficients::new(&spec).is_ok());
        }

        #[test]
        fn amplitude_scaling_ladder(spec in spec_strategy(), s in 0.2f64..3.0) {
            let base = EffectiveCoefficients::new(&spec).unwrap();
            let mut scaled = spec.scaled(s);
            scaled.delta *= s;
            let sc = EffectiveCoefficients::new(&scaled).unwrap();
            for (a, b) in base.alpha1.iter().zip(&sc.alpha1) {
                prop_assert!((a * (s * s) - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
            for (a, b) in base.alpha2.iter().zip(&sc.alpha2) {
                prop_assert!((a * (s * s * s) - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }
    }
}
