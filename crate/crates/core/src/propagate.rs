//! Time-ordered propagation under H(t), the analytic target propagator and
//! propagation under a time-independent effective Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::drive::{h_funcs, HamiltonianParts, PulseSpec, PERIOD};
use crate::error::{Error, Result};
use crate::fock::{build_operators, BasisIndex, Electronic, Operator, SpaceConfig};
use crate::linalg::{unitarity_defect, HermitianExp};

/// Unitarity tolerance for accepted propagators.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Guard-band population above which a trace is flagged.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Step control for the embedded Runge–Kutta integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps never exceed T / (cap_divisor · (2m + n)).
    pub cap_divisor: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, cap_divisor: 40.0, max_steps: 50_000_000 }
    }
}

impl IntegratorOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, ..Self::default() }
    }

    fn max_step(&self, spec: &PulseSpec) -> f64 {
        PERIOD / (self.cap_divisor * (2 * spec.m + spec.n) as f64)
    }
}

/// H(t) in sparse form: diagonal plus raising entries and their mirrors.
struct SparseH {
    diag: Vec<C64>,
    /// (row, col, weights of σ₊, σ₊a, σ₊a†) for the lower-triangle entries.
    raising: Vec<(usize, usize, [f64; 3])>,
    values: Vec<C64>,
}

impl SparseH {
    fn new(spec: &PulseSpec, cfg: SpaceConfig) -> Self {
        let ops = build_operators(cfg);
        let parts = HamiltonianParts::new(spec.delta, &ops);
        let diag = (0..cfg.dim()).map(|i| parts.static_part[(i, i)]).collect();
        let raising = parts.raising().to_vec();
        let values = vec![C64::new(0.0, 0.0); raising.len()];
        Self { diag, raising, values }
    }

    fn update(&mut self, spec: &PulseSpec, t: f64) {
        let h = h_funcs(spec, t);
        for (v, (_, _, w)) in self.values.iter_mut().zip(&self.raising) {
            *v = h.h1 * w[0] + h.h2 * w[1] + h.h3 * w[2];
        }
    }

    /// out = −i H y
    fn apply(&self, y: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let minus_i = C64::new(0.0, -1.0);
        for c in 0..y.ncols() {
            for (r, d) in self.diag.iter().enumerate() {
                out[(r, c)] = *d * y[(r, c)];
            }
            for (&(r, k, _), v) in self.raising.iter().zip(&self.values) {
                out[(r, c)] += *v * y[(k, c)];
                out[(k, c)] += v.conj() * y[(r, c)];
            }
            for r in 0..self.diag.len() {
                out[(r, c)] *= minus_i;
            }
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn axpy(y: &mut DMatrix<C64>, a: f64, x: &DMatrix<C64>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

/// Dormand–Prince 5(4) integration of dY/dt = −iH(t)Y.
struct Integrator<'a> {
    spec: &'a PulseSpec,
    h: SparseH,
    opts: IntegratorOptions,
    max_step: f64,
}

impl<'a> Integrator<'a> {
    fn new(spec: &'a PulseSpec, cfg: SpaceConfig, opts: IntegratorOptions) -> Self {
        Self { spec, h: SparseH::new(spec, cfg), max_step: opts.max_step(spec), opts }
    }

    fn rhs(&mut self, t: f64, y: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        self.h.update(self.spec, t);
        self.h.apply(y, out);
    }

    /// Advances `y` from `t0` through every time in `grid` (ascending, ≥ t0),
    /// calling `visit` at each.
    fn run(
        &mut self,
        mut y: DMatrix<C64>,
        t0: f64,
        grid: &[f64],
        mut visit: impl FnMut(usize, f64, &DMatrix<C64>) -> Result<()>,
    ) -> Result<DMatrix<C64>> {
        let (rows, cols) = y.shape();
        let zero = || DMatrix::<C64>::zeros(rows, cols);
        let mut k: Vec<DMatrix<C64>> = (0..7).map(|_| zero()).collect();
        let mut stage = zero();
        let mut err = zero();
        let mut t = t0;
        let mut step = self.max_step;
        let mut steps = 0usize;
        let mut k1 = zero();
        self.rhs(t, &y, &mut k1);
        for (idx, &target) in grid.iter().enumerate() {
            if target < t - 1e-12 {
                return Err(Error::Config(format!("time grid not ascending at t = {target}")));
            }
            while target - t > 1e-13 * target.abs().max(1.0) {
                steps += 1;
                if steps > self.opts.max_steps {
                    return Err(Error::Integration { t, reason: "step budget exhausted".into() });
                }
                let h = step.min(self.max_step).min(target - t);
                k[0].copy_from(&k1);
                for s in 1..7 {
                    stage.copy_from(&y);
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            axpy(&mut stage, h * a, &k[j]);
                        }
                    }
                    let mut ks = std::mem::take(&mut k[s]);
                    self.rhs(t + C[s] * h, &stage, &mut ks);
                    k[s] = ks;
                }
                // The last stage argument is the fifth-order solution.
                err.fill(C64::new(0.0, 0.0));
                for (j, e) in E.iter().enumerate() {
                    if *e != 0.0 {
                        axpy(&mut err, h * e, &k[j]);
                    }
                }
                let mut ratio: f64 = 0.0;
                for ((e, a), b) in err.iter().zip(y.iter()).zip(stage.iter()) {
                    let scale = self.opts.atol + self.opts.rtol * a.norm().max(b.norm());
                    ratio = ratio.max(e.norm() / scale);
                }
                if ratio <= 1.0 {
                    t += h;
                    std::mem::swap(&mut y, &mut stage);
                    k1.copy_from(&k[6]);
                }
                let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                let clipped = h < step.min(self.max_step);
                step = if ratio <= 1.0 && clipped { step.max(h * factor) } else { h * factor };
                if step < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration { t, reason: "step size underflow".into() });
                }
            }
            t = target;
            visit(idx, t, &y)?;
        }
        Ok(y)
    }
}

/// U(t) at one grid time.
#[derive(Clone, Debug)]
pub struct PropagatorSample {
    pub t: f64,
    pub u: Operator,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        Some(t) if *t == 0.0 => {}
        _ => return Err(Error::Config("time grid must start at 0".into())),
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("time grid must be ascending".into()));
    }
    Ok(())
}

/// Full propagator U(t) of H(t) sampled on `t_grid` (starting at 0).
pub fn propagate_exact(spec: &PulseSpec, cfg: SpaceConfig, t_grid: &[f64]) -> Result<Vec<PropagatorSample>> {
    propagate_exact_with(spec, cfg, t_grid, IntegratorOptions::default())
}

pub fn propagate_exact_with(
    spec: &PulseSpec,
    cfg: SpaceConfig,
    t_grid: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<PropagatorSample>> {
    spec.validate()?;
    check_grid(t_grid)?;
    let mut out = Vec::with_capacity(t_grid.len());
    let u0 = Operator::identity(cfg.dim(), cfg.dim());
    Integrator::new(spec, cfg, opts).run(u0, 0.0, t_grid, |_, t, u| {
        let defect = unitarity_defect(u);
        if defect > UNITARITY_TOL {
            return Err(Error::Integration { t, reason: format!("unitarity defect {defect:.3e}") });
        }
        out.push(PropagatorSample { t, u: u.clone() });
        Ok(())
    })?;
    Ok(out)
}

/// Propagator from `t0` to each time of `t_grid` (all ≥ t0).
pub fn propagate_between(
    spec: &PulseSpec,
    cfg: SpaceConfig,
    t0: f64,
    t_grid: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<PropagatorSample>> {
    let mut out = Vec::with_capacity(t_grid.len());
    let u0 = Operator::identity(cfg.dim(), cfg.dim());
    Integrator::new(spec, cfg, opts).run(u0, t0, t_grid, |_, t, u| {
        out.push(PropagatorSample { t, u: u.clone() });
        Ok(())
    })?;
    Ok(out)
}

/// Single-ket propagation from a basis state; returns the ket at each grid time.
pub fn propagate_state(
    spec: &PulseSpec,
    cfg: SpaceConfig,
    initial: BasisIndex,
    t_grid: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<Vec<C64>>> {
    spec.validate()?;
    check_grid(t_grid)?;
    let mut psi = DMatrix::<C64>::zeros(cfg.dim(), 1);
    psi[(cfg.flat_index(initial)?, 0)] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    Integrator::new(spec, cfg, opts).run(psi, 0.0, t_grid, |_, _, y| {
        out.push(y.iter().copied().collect());
        Ok(())
    })?;
    Ok(out)
}

/// Analytic propagator of the target red-sideband Hamiltonian
/// (i f_tg/2)(σ₊a − σ₋a†): each pair {|g,k⟩, |e,k−1⟩} rotates by f_tg√k·t/2.
/// |g,0⟩ and the unpaired top state |e,d−1⟩ are left invariant.
pub fn target_propagator(f_tg: f64, cfg: SpaceConfig, t: f64) -> Operator {
    let dim = cfg.dim();
    let mut u = Operator::identity(dim, dim);
    for k in 1..cfg.d() {
        let th = 0.5 * f_tg * (k as f64).sqrt() * t;
        let (g, e) = (2 * k, 2 * (k - 1) + 1);
        let (c, s) = (th.cos(), th.sin());
        u[(g, g)] = C64::new(c, 0.0);
        u[(e, e)] = C64::new(c, 0.0);
        u[(e, g)] = C64::new(s, 0.0);
        u[(g, e)] = C64::new(-s, 0.0);
    }
    u
}

/// Target state for a basis initial state at time `t`.
pub fn target_state(f_tg: f64, cfg: SpaceConfig, initial: BasisIndex, t: f64) -> Result<Vec<C64>> {
    let u = target_propagator(f_tg, cfg, t);
    let i = cfg.flat_index(initial)?;
    Ok(u.column(i).iter().copied().collect())
}

/// exp(−iH_eff t) on each grid time.
pub fn propagate_effective(h_eff: &Operator, t_grid: &[f64]) -> Result<Vec<PropagatorSample>> {
    let exp = HermitianExp::new(h_eff)?;
    Ok(t_grid.iter().map(|&t| PropagatorSample { t, u: exp.at(t) }).collect())
}

/// Populations, unitarity and leakage along a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// One row per time, one column per flat basis index.
    pub populations: Vec<Vec<f64>>,
    pub defects: Vec<f64>,
    pub leakages: Vec<f64>,
    /// Max over the grid of max|U†U − 1|.
    pub unitarity_defect: f64,
    /// Max over the grid of the guard-band population.
    pub leakage: f64,
    pub leakage_flagged: bool,
}

impl SimulationTrace {
    fn from_columns(cfg: SpaceConfig, samples: &[(f64, Vec<C64>, f64)]) -> Self {
        let labels = cfg.states().map(|s| s.label()).collect();
        let mut times = Vec::new();
        let mut populations = Vec::new();
        let mut defects = Vec::new();
        let mut leakages = Vec::new();
        for (t, psi, defect) in samples {
            let pops: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let leak = pops.iter().enumerate().filter(|(i, _)| cfg.in_guard_band(*i)).map(|(_, p)| p).sum();
            times.push(*t);
            populations.push(pops);
            defects.push(*defect);
            leakages.push(leak);
        }
        let unitarity_defect = defects.iter().copied().fold(0.0, f64::max);
        let leakage = leakages.iter().copied().fold(0.0, f64::max);
        Self {
            labels,
            times,
            populations,
            defects,
            leakages,
            unitarity_defect,
            leakage,
            leakage_flagged: leakage >= LEAKAGE_TOL,
        }
    }

    pub fn column(&self, state: BasisIndex) -> Option<Vec<f64>> {
        let i = self.labels.iter().position(|l| *l == state.label())?;
        Some(self.populations.iter().map(|row| row[i]).collect())
    }

    /// Largest |Σ populations − 1| over the grid.
    pub fn population_drift(&self) -> f64 {
        self.populations.iter().map(|row| (row.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `t,p_g0,p_e0,…,defect,leakage`, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,");
        out.push_str(&self.labels.join(","));
        out.push_str(",defect,leakage\n");
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            row.extend(self.populations[k].iter().map(|p| format!("{p:e}")));
            row.push(format!("{:e}", self.defects[k]));
            row.push(format!("{:e}", self.leakages[k]));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Full-propagator simulation from a basis state.
pub fn simulate(spec: &PulseSpec, cfg: SpaceConfig, initial: BasisIndex, t_grid: &[f64]) -> Result<SimulationTrace> {
    let col = cfg.flat_index(initial)?;
    let samples: Vec<_> = propagate_exact(spec, cfg, t_grid)?
        .into_iter()
        .map(|s| (s.t, s.u.column(col).iter().copied().collect(), unitarity_defect(&s.u)))
        .collect();
    Ok(SimulationTrace::from_columns(cfg, &samples))
}

/// Populations under a time-independent generator from a basis state.
pub fn simulate_effective(
    h_eff: &Operator,
    cfg: SpaceConfig,
    initial: BasisIndex,
    t_grid: &[f64],
) -> Result<SimulationTrace> {
    let col = cfg.flat_index(initial)?;
    let samples: Vec<_> = propagate_effective(h_eff, t_grid)?
        .into_iter()
        .map(|s| (s.t, s.u.column(col).iter().copied().collect(), unitarity_defect(&s.u)))
        .collect();
    Ok(SimulationTrace::from_columns(cfg, &samples))
}

/// Populations under the target propagator.
pub fn simulate_target(f_tg: f64, cfg: SpaceConfig, initial: BasisIndex, t_grid: &[f64]) -> Result<SimulationTrace> {
    let samples =
        t_grid.iter().map(|&t| Ok((t, target_state(f_tg, cfg, initial, t)?, 0.0))).collect::<Result<Vec<_>>>()?;
    Ok(SimulationTrace::from_columns(cfg, &samples))
}

/// Uniform grid with `per_period` points per drive period on [0, t_end].
pub fn uniform_grid(t_end: f64, per_period: usize) -> Vec<f64> {
    let n = ((t_end / PERIOD) * per_period as f64).ceil().max(1.0) as usize;
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

/// Length of one target cycle, 4π/(f_tg√k), for initial level k.
pub fn cycle_length(f_tg: f64, k: usize) -> Result<f64> {
    if f_tg <= 0.0 || k == 0 {
        return Err(Error::Config("a target cycle needs f_tg > 0 and k ≥ 1".into()));
    }
    Ok(4.0 * std::f64::consts::PI / (f_tg * (k as f64).sqrt()))
}

/// |g,k⟩ or |e,k−1⟩ → k.
pub fn pair_level(initial: BasisIndex) -> usize {
    match initial.electronic {
        Electronic::G => initial.k,
        Electronic::E => initial.k + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::monochromatic_reference;
    use crate::linalg::{expm_pade, max_abs};
    use std::f64::consts::PI;

    fn paper_mono() -> PulseSpec {
        monochromatic_reference(0.1, 0.05, 10).unwrap()
    }

    #[test]
    fn undriven_propagator_is_diagonal_phase() {
        let spec = PulseSpec::uniform(10, 1, 0.3, vec![0.0; 3], 0.05, 0.1).unwrap();
        let cfg = SpaceConfig::new(3, 0).unwrap();
        let grid = [0.0, 1.0, 7.5];
        let us = propagate_exact(&spec, cfg, &grid).unwrap();
        for s in &us {
            for i in 0..6 {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                let expected = C64::cis(0.5 * spec.delta * sign * s.t);
                assert!((s.u[(i, i)] - expected).norm() < 1e-9, "t={} i={i}", s.t);
            }
        }
        assert!(max_abs(&(&us[0].u - Operator::identity(6, 6))) == 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let cfg = SpaceConfig::new(3, 0).unwrap();
        assert!(propagate_exact(&paper_mono(), cfg, &[0.5, 1.0]).is_err());
        assert!(propagate_exact(&paper_mono(), cfg, &[0.0, 1.0, 0.5]).is_err());
    }

    #[test]
    fn target_rotation() {
        let cfg = SpaceConfig::new(4, 0).unwrap();
        assert_eq!(target_propagator(0.1, cfg, 0.0), Operator::identity(8, 8));
        let half = target_propagator(0.1, cfg, 10.0 * PI);
        assert!((half[(1, 2)].norm_sqr() - 1.0).abs() < 1e-14);
        let full = target_propagator(0.1, cfg, 20.0 * PI);
        assert!((full[(2, 2)].norm_sqr() - 1.0).abs() < 1e-14);
        assert!(unitarity_defect(&half) < 1e-15);
        assert_eq!(half[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(half[(7, 7)], C64::new(1.0, 0.0));
    }

    #[test]
    fn effective_route_agrees_with_pade() {
        let cfg = SpaceConfig::new(4, 0).unwrap();
        let h = crate::effective::assemble(&paper_mono(), cfg).unwrap().h_eff;
        let us = propagate_effective(&h, &[0.0, 3.0, 40.0]).unwrap();
        for s in &us {
            assert!(max_abs(&(&s.u - expm_pade(&h, s.t))) < 1e-10);
        }
        let zero = propagate_effective(&Operator::zeros(8, 8), &[2.0]).unwrap();
        assert!(max_abs(&(&zero[0].u - Operator::identity(8, 8))) < 1e-15);
    }

    #[test]
    fn composition_over_split_points() {
        let spec = PulseSpec::uniform(10, 2, 0.21, vec![0.2, -0.4, 1.9, 0.3, 0.1], 0.05, 0.1).unwrap();
        let cfg = SpaceConfig::new(4, 0).unwrap();
        let opts = IntegratorOptions::default();
        for (t1, t2) in [(0.37, 5.1), (2.0, 2.9)] {
            let direct = propagate_exact(&spec, cfg, &[0.0, t1, t2]).unwrap();
            let tail = propagate_between(&spec, cfg, t1, &[t2], opts).unwrap();
            let composed = &tail[0].u * &direct[1].u;
            assert!(max_abs(&(composed - &direct[2].u)) < 1e-9);
        }
    }

    #[test]
    fn monochromatic_follows_sideband_rotation() {
        let spec = paper_mono();
        let cfg = SpaceConfig::for_initial(1, 8).unwrap();
        let tc = cycle_length(0.1, 1).unwrap();
        let grid = uniform_grid(tc, 4);
        let trace = simulate(&spec, cfg, BasisIndex::g(1), &grid).unwrap();
        let pg1 = trace.column(BasisIndex::g(1)).unwrap();
        for (t, p) in trace.times.iter().zip(&pg1) {
            let target = (0.05 * t).cos().powi(2);
            assert!((p - target).abs() < 0.1, "t={t}: {p} vs {target}");
        }
        assert!(trace.unitarity_defect < UNITARITY_TOL);
        assert!(trace.population_drift() < 1e-8);
        assert!(!trace.leakage_flagged, "leakage {}", trace.leakage);
    }

    #[test]
    fn tolerance_self_convergence() {
        let spec = paper_mono();
        let cfg = SpaceConfig::for_initial(1, 8).unwrap();
        let grid = [0.0, 10.0 * PERIOD];
        let loose = propagate_state(&spec, cfg, BasisIndex::g(1), &grid, IntegratorOptions::with_rtol(1e-10)).unwrap();
        let tight = propagate_state(&spec, cfg, BasisIndex::g(1), &grid, IntegratorOptions::with_rtol(1e-12)).unwrap();
        let pops = |v: &Vec<C64>| v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>();
        for (a, b) in pops(&loose[1]).iter().zip(pops(&tight[1]).iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        let norm: f64 = loose[1].iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let cfg = SpaceConfig::new(2, 0).unwrap();
        let trace = simulate(&paper_mono(), cfg, BasisIndex::g(1), &[0.0, 0.5]).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,p_g0,p_e0,p_g1,p_e1,defect,leakage");
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[3], 1.0);
    }
}
