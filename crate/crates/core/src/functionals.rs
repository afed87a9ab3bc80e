//! Infidelity measures: closed-form fluctuation integrals, perturbative state
//! and gate infidelities, the numerical one-cycle infidelity and timing
//! sensitivity.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::drive::{h_funcs, PulseSpec, PERIOD};
use crate::effective::poly::{Poly, PolyBuilder};
use crate::effective::Tones;
use crate::error::{Error, Result};
use crate::fock::{BasisIndex, Electronic, SpaceConfig, DEFAULT_BUFFER};
use crate::propagate::{cycle_length, pair_level, propagate_state, target_state, IntegratorOptions, LEAKAGE_TOL};
use crate::quadrature::NestedGrid;

/// Time averages (1/T)∫|g₁|², ∫|g₂|², ∫|g₃|² and ∫cos(f_tg√k t)|g₃|².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GIntegrals {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g3cos: f64,
}

/// (e^{2πix} − 1)/x, continuous at 0.
fn phase_ratio(x: f64) -> C64 {
    if x == 0.0 {
        C64::new(0.0, 2.0 * PI)
    } else {
        (C64::cis(2.0 * PI * x) - 1.0) / x
    }
}

/// Amplitude weights a_j with (1/T)∫|Σ a_j f_j (e^{iν_j t} − 1)|² = Σ a_j²f_j² + (Σ a_j f_j)².
struct Weights {
    carrier: Vec<f64>,
    red: Vec<f64>,
    blue: Vec<f64>,
}

impl Weights {
    fn new(t: &Tones) -> Self {
        let m = t.m;
        Self {
            carrier: t.js().map(|j| 1.0 / (2 * (m - j)) as f64).collect(),
            red: t.js().map(|j| if j == 0 { 0.0 } else { t.eta(j) / (2 * j) as f64 }).collect(),
            blue: t.js().map(|j| t.eta(j) / (2 * (2 * m - j)) as f64).collect(),
        }
    }
}

/// Σ_{j,q} M_jq f_j f_q = (1/T)∫cos(F t)|g₃|² with F = f_tg√k.
fn interference_matrix(t: &Tones, big_f: f64) -> Vec<f64> {
    let m = t.m;
    let vars = t.vars();
    let mut out = vec![0.0; vars * vars];
    for (a, j) in t.js().enumerate() {
        for (b, q) in t.js().enumerate() {
            let pre = C64::new(0.0, t.eta(j) * t.eta(q) / (16.0 * PI * ((2 * m - j) * (2 * m - q)) as f64));
            let x = (2 * m - q) as f64 - big_f;
            let second = (C64::cis(-2.0 * PI * x) - 1.0) / x;
            let bracket = phase_ratio((2 * m - j) as f64 + big_f)
                - second
                - phase_ratio(big_f)
                - phase_ratio((q - j) as f64 + big_f);
            out[a * vars + b] = 2.0 * (pre * bracket).re;
        }
    }
    out
}

fn square_plus_sum(w: &[f64]) -> Vec<f64> {
    let v = w.len();
    let mut out = vec![0.0; v * v];
    for a in 0..v {
        for b in 0..v {
            out[a * v + b] = w[a] * w[b] + if a == b { w[a] * w[a] } else { 0.0 };
        }
    }
    out
}

fn quadratic_form(mat: &[f64], f: &[f64]) -> f64 {
    let v = f.len();
    (0..v).map(|a| (0..v).map(|b| mat[a * v + b] * f[a] * f[b]).sum::<f64>()).sum()
}

/// Quadratic forms of the four integrals in the amplitudes.
#[derive(Clone, Debug)]
pub struct GForms {
    vars: usize,
    g1: Vec<f64>,
    g2: Vec<f64>,
    g3: Vec<f64>,
    g3cos: Vec<f64>,
}

impl GForms {
    pub fn new(tones: &Tones, f_tg: f64, k: usize) -> Self {
        let w = Weights::new(tones);
        Self {
            vars: tones.vars(),
            g1: square_plus_sum(&w.carrier),
            g2: square_plus_sum(&w.red),
            g3: square_plus_sum(&w.blue),
            g3cos: interference_matrix(tones, f_tg * (k as f64).sqrt()),
        }
    }

    pub fn eval(&self, f: &[f64]) -> GIntegrals {
        GIntegrals {
            g1: quadratic_form(&self.g1, f),
            g2: quadratic_form(&self.g2, f),
            g3: quadratic_form(&self.g3, f),
            g3cos: quadratic_form(&self.g3cos, f),
        }
    }

    /// Σ_l c_l G_l as a polynomial, coefficients (c₁, c₂, c₃, c_cos).
    pub fn combination(&self, c: [f64; 4]) -> Poly<f64> {
        let mut b = PolyBuilder::new(self.vars);
        for (weight, mat) in c.iter().zip([&self.g1, &self.g2, &self.g3, &self.g3cos]) {
            if *weight == 0.0 {
                continue;
            }
            for a in 0..self.vars {
                for q in 0..self.vars {
                    let x = weight * mat[a * self.vars + q];
                    if x != 0.0 {
                        b.add(x, &[a, q]);
                    }
                }
            }
        }
        b.build()
    }
}

/// Closed forms of the four fluctuation integrals; `k` enters only G3cos.
pub fn g_integrals(spec: &PulseSpec, k: usize) -> Result<GIntegrals> {
    spec.validate()?;
    let tones = Tones::from_spec(spec)?;
    Ok(GForms::new(&tones, spec.f_tg, k).eval(&spec.f))
}

/// The same four averages by direct quadrature of the fluctuation integrals
/// g_l(t) = ∫₀ᵗ (h_l − h̄_l).
pub fn g_integrals_numeric(spec: &PulseSpec, k: usize) -> Result<GIntegrals> {
    spec.validate()?;
    let grid = NestedGrid::new(PERIOD, 16, 16);
    let hs = grid.sample(|t| h_funcs(spec, t).h1);
    let mean2 = C64::new(0.0, 0.5 * spec.eta_at(0) * spec.f_at(0));
    let h2 = grid.sample(|t| h_funcs(spec, t).h2 - mean2);
    let h3 = grid.sample(|t| h_funcs(spec, t).h3);
    let c1 = grid.cumulative(&hs);
    let c2 = grid.cumulative(&h2);
    let c3 = grid.cumulative(&h3);
    let big_f = spec.f_tg * (k as f64).sqrt();
    let mut out = GIntegrals { g1: 0.0, g2: 0.0, g3: 0.0, g3cos: 0.0 };
    for (i, (&t, &w)) in grid.x.iter().zip(grid.weights()).enumerate() {
        let w = w / PERIOD;
        out.g1 += w * c1.at_x()[i].norm_sqr();
        out.g2 += w * c2.at_x()[i].norm_sqr();
        out.g3 += w * c3.at_x()[i].norm_sqr();
        out.g3cos += w * (big_f * t).cos() * c3.at_x()[i].norm_sqr();
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    StatePerturbative,
    GateTruncated,
    GateAsymptotic,
    CycleNumeric,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub f_tg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub kind: FunctionalKind,
    pub value: f64,
    pub params: FunctionalParams,
}

/// Sign of the interference term: + for |g,k⟩, − for |e,k−1⟩.
fn interference_sign(initial: BasisIndex) -> f64 {
    match initial.electronic {
        Electronic::G => 1.0,
        Electronic::E => -1.0,
    }
}

/// G1 + kG2 + kG3 ± G3cos(k).
pub fn state_infidelity(spec: &PulseSpec, initial: BasisIndex) -> Result<FunctionalValue> {
    let k = pair_level(initial);
    let g = g_integrals(spec, k)?;
    let value = if k == 0 { g.g1 } else { g.g1 + k as f64 * (g.g2 + g.g3) + interference_sign(initial) * g.g3cos };
    Ok(FunctionalValue {
        kind: FunctionalKind::StatePerturbative,
        value,
        params: FunctionalParams {
            initial: Some(initial.to_string()),
            k: Some(k),
            f_tg: spec.f_tg,
            ..Default::default()
        },
    })
}

/// 2d·G1 + d²·G2 + d²·G3.
pub fn gate_infidelity_truncated(spec: &PulseSpec, d: usize) -> Result<FunctionalValue> {
    let g = g_integrals(spec, 1)?;
    let d_f = d as f64;
    Ok(FunctionalValue {
        kind: FunctionalKind::GateTruncated,
        value: 2.0 * d_f * g.g1 + d_f * d_f * (g.g2 + g.g3),
        params: FunctionalParams { d: Some(d), f_tg: spec.f_tg, ..Default::default() },
    })
}

/// G2 + G3.
pub fn gate_infidelity_asymptotic(spec: &PulseSpec) -> Result<FunctionalValue> {
    let g = g_integrals(spec, 1)?;
    Ok(FunctionalValue {
        kind: FunctionalKind::GateAsymptotic,
        value: g.g2 + g.g3,
        params: FunctionalParams { f_tg: spec.f_tg, ..Default::default() },
    })
}

/// A perturbative functional to minimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// State infidelity of one initial state.
    State {
        initial: BasisIndex,
    },
    /// Mean over {|g,k⟩, |e,k−1⟩}; the interference terms cancel.
    StateAveraged {
        k: usize,
    },
    GateTruncated {
        d: usize,
    },
    GateAsymptotic,
}

impl Default for Objective {
    fn default() -> Self {
        Objective::State { initial: BasisIndex::g(1) }
    }
}

impl Objective {
    /// Weights on (G1, G2, G3, G3cos) and the k that enters G3cos.
    fn weights(&self) -> ([f64; 4], usize) {
        match *self {
            Objective::State { initial } => {
                let k = pair_level(initial);
                if k == 0 {
                    ([1.0, 0.0, 0.0, 0.0], 0)
                } else {
                    let kf = k as f64;
                    ([1.0, kf, kf, interference_sign(initial)], k)
                }
            }
            Objective::StateAveraged { k } => {
                let kf = k as f64;
                ([1.0, kf, kf, 0.0], k)
            }
            Objective::GateTruncated { d } => {
                let d = d as f64;
                ([2.0 * d, d * d, d * d, 0.0], 1)
            }
            Objective::GateAsymptotic => ([0.0, 1.0, 1.0, 0.0], 1),
        }
    }

    /// The objective as a quadratic polynomial in the amplitudes.
    pub fn poly(&self, tones: &Tones, f_tg: f64) -> Poly<f64> {
        let (w, k) = self.weights();
        GForms::new(tones, f_tg, k).combination(w)
    }

    pub fn evaluate(&self, spec: &PulseSpec) -> Result<f64> {
        let (w, k) = self.weights();
        let g = g_integrals(spec, k)?;
        Ok(w[0] * g.g1 + w[1] * g.g2 + w[2] * g.g3 + w[3] * g.g3cos)
    }

    pub fn label(&self) -> String {
        match self {
            Objective::State { initial } => format!("state {initial}"),
            Objective::StateAveraged { k } => format!("state averaged k={k}"),
            Objective::GateTruncated { d } => format!("gate truncated d={d}"),
            Objective::GateAsymptotic => "gate asymptotic".into(),
        }
    }
}

/// Numerical one-cycle infidelity with its propagation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleInfidelity {
    pub value: FunctionalValue,
    /// Output points per drive period at convergence.
    pub per_period: usize,
    pub leakage: f64,
    pub leakage_flagged: bool,
    pub norm_drift: f64,
}

/// Relative change below which the Simpson average is accepted.
pub const CYCLE_REL_TOL: f64 = 1e-6;
const CYCLE_START_PER_PERIOD: usize = 64;
const CYCLE_MAX_PER_PERIOD: usize = 8192;

struct CycleSamples {
    infidelity: Vec<f64>,
    leakage: f64,
    norm_drift: f64,
}

fn cycle_samples(spec: &PulseSpec, cfg: SpaceConfig, initial: BasisIndex, grid: &[f64]) -> Result<CycleSamples> {
    let states = propagate_state(spec, cfg, initial, grid, IntegratorOptions::default())?;
    let mut out = CycleSamples { infidelity: Vec::with_capacity(grid.len()), leakage: 0.0, norm_drift: 0.0 };
    for (t, psi) in grid.iter().zip(&states) {
        let target = target_state(spec.f_tg, cfg, initial, *t)?;
        let overlap: C64 = target.iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
        out.infidelity.push(1.0 - overlap.norm_sqr());
        let leak: f64 = psi.iter().enumerate().filter(|(i, _)| cfg.in_guard_band(*i)).map(|(_, z)| z.norm_sqr()).sum();
        out.leakage = out.leakage.max(leak);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        out.norm_drift = out.norm_drift.max((norm - 1.0).abs());
    }
    Ok(out)
}

/// Composite Simpson mean over an even number of uniform intervals.
fn simpson_mean(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    let mut s = v[0] + v[n];
    for (i, x) in v.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s / (3.0 * n as f64)
}

/// Time average of 1 − |⟨i|Ū†U_tg|i⟩|² over one target cycle 4π/(f_tg√k),
/// on a uniform grid doubled until the average settles.
pub fn cycle_infidelity(spec: &PulseSpec, initial: BasisIndex) -> Result<CycleInfidelity> {
    let k = pair_level(initial);
    let cfg = SpaceConfig::for_initial(k, DEFAULT_BUFFER)?;
    cycle_infidelity_in(spec, cfg, initial)
}

pub fn cycle_infidelity_in(spec: &PulseSpec, cfg: SpaceConfig, initial: BasisIndex) -> Result<CycleInfidelity> {
    let k = pair_level(initial);
    let tc = cycle_length(spec.f_tg, k)?;
    let periods = tc / PERIOD;
    let mut per_period = CYCLE_START_PER_PERIOD;
    let mut previous: Option<f64> = None;
    loop {
        let intervals = 2 * ((periods * per_period as f64 / 2.0).ceil() as usize).max(1);
        let grid: Vec<f64> = (0..=intervals).map(|i| tc * i as f64 / intervals as f64).collect();
        let samples = cycle_samples(spec, cfg, initial, &grid)?;
        let value = simpson_mean(&samples.infidelity);
        if let Some(prev) = previous {
            if (value - prev).abs() <= CYCLE_REL_TOL * value.abs() {
                let leakage_flagged = samples.leakage >= LEAKAGE_TOL;
                if leakage_flagged {
                    log::warn!("cycle infidelity: guard-band population {:.3e}", samples.leakage);
                }
                return Ok(CycleInfidelity {
                    value: FunctionalValue {
                        kind: FunctionalKind::CycleNumeric,
                        value,
                        params: FunctionalParams {
                            initial: Some(initial.to_string()),
                            k: Some(k),
                            f_tg: spec.f_tg,
                            ..Default::default()
                        },
                    },
                    per_period,
                    leakage: samples.leakage,
                    leakage_flagged,
                    norm_drift: samples.norm_drift,
                });
            }
        }
        if per_period >= CYCLE_MAX_PER_PERIOD {
            return Err(Error::OracleFailure(format!("cycle average not settled at {per_period} points per period")));
        }
        previous = Some(value);
        per_period *= 2;
    }
}

/// One-cycle improvement of a polychromatic pulse over the monochromatic one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub i_mono: f64,
    pub i_poly: f64,
    pub r: f64,
}

impl ImprovementReport {
    pub fn new(i_mono: f64, i_poly: f64) -> Result<Self> {
        if !(i_mono > 0.0 && i_poly > 0.0) {
            return Err(Error::Validation(format!("improvement needs positive infidelities, got {i_mono}, {i_poly}")));
        }
        Ok(Self { i_mono, i_poly, r: i_mono / i_poly })
    }
}

fn population_at(spec: &PulseSpec, cfg: SpaceConfig, initial: BasisIndex, times: &[f64]) -> Result<Vec<f64>> {
    let mut grid = vec![0.0];
    grid.extend_from_slice(times);
    let i = cfg.flat_index(initial)?;
    let opts = IntegratorOptions::with_rtol(1e-12);
    let states = propagate_state(spec, cfg, initial, &grid, opts)?;
    Ok(states[1..].iter().map(|psi| psi[i].norm_sqr()).collect())
}

/// |dP/dt| of the initial-state population at t = qT by central differences,
/// with the stencil halved until successive estimates agree.
pub fn timing_sensitivity(spec: &PulseSpec, initial: BasisIndex, q: u32) -> Result<f64> {
    let cfg = SpaceConfig::for_initial(pair_level(initial), DEFAULT_BUFFER)?;
    let t = q as f64 * PERIOD;
    let mut h = PERIOD / 200.0;
    let mut previous: Option<f64> = None;
    for _ in 0..8 {
        let p = population_at(spec, cfg, initial, &[t - h, t + h])?;
        let d = ((p[1] - p[0]) / (2.0 * h)).abs();
        if let Some(prev) = previous {
            if (d - prev).abs() <= 1e-4 * d.max(1e-6) {
                return Ok(d);
            }
        }
        previous = Some(d);
        h *= 0.5;
    }
    previous.ok_or_else(|| Error::Logic("no estimate".into()))
}

/// dP/dt from the Schrödinger equation: 2 Re(ψ_i* (−iHψ)_i).
pub fn population_rate(spec: &PulseSpec, initial: BasisIndex, t: f64) -> Result<f64> {
    let cfg = SpaceConfig::for_initial(pair_level(initial), DEFAULT_BUFFER)?;
    let psi = propagate_state(spec, cfg, initial, &[0.0, t], IntegratorOptions::with_rtol(1e-12))?.pop().unwrap();
    let ops = crate::fock::build_operators(cfg);
    let h = crate::drive::hamiltonian(spec, t, &ops)?;
    let i = cfg.flat_index(initial)?;
    let hpsi: C64 = (0..cfg.dim()).map(|c| h[(i, c)] * psi[c]).sum();
    Ok(2.0 * (psi[i].conj() * C64::new(0.0, -1.0) * hpsi).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::monochromatic_reference;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig5() -> PulseSpec {
        PulseSpec::uniform(10, 0, 0.2, vec![2.0], 0.05, 0.1).unwrap()
    }

    #[test]
    fn monochromatic_values() {
        let g = g_integrals(&fig5(), 1).unwrap();
        assert_relative_eq!(g.g1, 0.02, max_relative = 1e-14);
        assert_eq!(g.g2, 0.0);
        assert_relative_eq!(g.g3, 1.25e-5, max_relative = 1e-12);
    }

    #[test]
    fn zero_drive_is_zero() {
        let spec = PulseSpec::uniform(10, 3, 0.0, vec![0.0; 7], 0.05, 0.1).unwrap();
        for v in [
            state_infidelity(&spec, BasisIndex::g(1)).unwrap().value,
            gate_infidelity_truncated(&spec, 2).unwrap().value,
            gate_infidelity_asymptotic(&spec).unwrap().value,
        ] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn truncated_at_one() {
        let spec = PulseSpec::uniform(10, 2, 0.1, vec![0.3, -0.2, 1.9, 0.1, 0.4], 0.05, 0.1).unwrap();
        let g = g_integrals(&spec, 1).unwrap();
        let v = gate_infidelity_truncated(&spec, 1).unwrap().value;
        assert_relative_eq!(v, 2.0 * g.g1 + g.g2 + g.g3, max_relative = 1e-14);
        assert_eq!(gate_infidelity_asymptotic(&spec).unwrap().value, g.g2 + g.g3);
    }

    #[test]
    fn ground_level_is_carrier_only() {
        let spec = fig5();
        let v = state_infidelity(&spec, BasisIndex::g(0)).unwrap().value;
        assert_eq!(v, g_integrals(&spec, 0).unwrap().g1);
    }

    #[test]
    fn interference_at_zero_rabi_frequency() {
        let spec = PulseSpec::uniform(10, 2, 0.1, vec![0.3, -0.2, 1.9, 0.1, 0.4], 0.05, 0.0).unwrap();
        let g = g_integrals(&spec, 1).unwrap();
        assert_relative_eq!(g.g3cos, g.g3, max_relative = 1e-10);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let spec =
            PulseSpec::uniform(10, 4, 0.1, vec![0.3, -0.2, 1.1, 0.7, 1.9, 0.1, 0.4, -1.2, 0.5], 0.07, 0.1).unwrap();
        for k in [1, 3] {
            let a = g_integrals(&spec, k).unwrap();
            let b = g_integrals_numeric(&spec, k).unwrap();
            for (x, y) in [(a.g1, b.g1), (a.g2, b.g2), (a.g3, b.g3), (a.g3cos, b.g3cos)] {
                assert_relative_eq!(x, y, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn objective_poly_matches_direct() {
        let spec = PulseSpec::uniform(10, 3, 0.1, vec![0.3, -0.2, 1.1, 1.9, 0.1, 0.4, -1.2], 0.05, 0.1).unwrap();
        let tones = Tones::from_spec(&spec).unwrap();
        for obj in [
            Objective::default(),
            Objective::State { initial: BasisIndex::e(0) },
            Objective::StateAveraged { k: 1 },
            Objective::GateTruncated { d: 2 },
            Objective::GateAsymptotic,
        ] {
            let direct = obj.evaluate(&spec).unwrap();
            assert_relative_eq!(obj.poly(&tones, spec.f_tg).eval(&spec.f), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn improvement_rejects_zero() {
        assert!(ImprovementReport::new(0.02, 0.0).is_err());
        assert_relative_eq!(ImprovementReport::new(0.02, 0.01).unwrap().r, 2.0);
    }

    #[test]
    fn target_dynamics_at_extremum_is_flat() {
        // Undriven, δ = 0: P_g1 stays 1.
        let spec = PulseSpec::uniform(10, 0, 0.0, vec![0.0], 0.05, 0.1).unwrap();
        assert!(timing_sensitivity(&spec, BasisIndex::g(1), 8).unwrap() < 1e-10);
    }

    #[test]
    fn timing_sensitivity_matches_schrodinger_rate() {
        let spec = monochromatic_reference(0.1, 0.05, 10).unwrap();
        let fd = timing_sensitivity(&spec, BasisIndex::g(1), 2).unwrap();
        let exact = population_rate(&spec, BasisIndex::g(1), 2.0 * PERIOD).unwrap().abs();
        assert_relative_eq!(fd, exact, max_relative = 1e-3);
    }

    #[test]
    fn monochromatic_cycle_settles() {
        let spec = monochromatic_reference(0.1, 0.05, 10).unwrap();
        let c = cycle_infidelity(&spec, BasisIndex::g(1)).unwrap();
        assert!(c.value.value > 0.015 && c.value.value < 0.025, "{}", c.value.value);
        assert!(!c.leakage_flagged);
        assert!(c.norm_drift < 1e-8);
    }

    fn spec_strategy() -> impl Strategy<Value = (PulseSpec, usize)> {
        (1u32..=7, prop::collection::vec(-2.0f64..2.0, 15), 0.02f64..0.1, 1usize..4).prop_map(|(n, f, eta, k)| {
            let f = f[..(2 * n + 1) as usize].to_vec();
            (PulseSpec::uniform(10, n, 0.1, f, eta, 0.1).unwrap(), k)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn paired_states_cancel_interference((spec, k) in spec_strategy()) {
            let g = g_integrals(&spec, k).unwrap();
            let a = state_infidelity(&spec, BasisIndex::g(k)).unwrap().value;
            let b = state_infidelity(&spec, BasisIndex::e(k - 1)).unwrap().value;
            let kf = k as f64;
            prop_assert!((a + b - 2.0 * (g.g1 + kf * g.g2 + kf * g.g3)).abs() <= 1e-14 * (a + b).max(1e-300));
            prop_assert!((a - b - 2.0 * g.g3cos).abs() <= 1e-14 * (a + b).max(1e-300));
            prop_assert!(a >= 0.0 && b >= -1e-18);
        }

        #[test]
        fn quadrature_oracle((spec, k) in spec_strategy()) {
            let a = g_integrals(&spec, k).unwrap();
            let b = g_integrals_numeric(&spec, k).unwrap();
            for (x, y) in [(a.g1, b.g1), (a.g2, b.g2), (a.g3, b.g3), (a.g3cos, b.g3cos)] {
                prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(y.abs()) + 1e-16);
            }
        }
    }
}
