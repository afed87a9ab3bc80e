//! Equality-constrained minimization of a perturbative functional over the
//! tone amplitudes, with an outer scan over the detuning δ.

mod auglag;
mod sqp;

pub use auglag::AugmentedLagrangian;
pub use sqp::Sqp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::drive::{monochromatic_reference, PulseSpec};
use crate::effective::poly::Poly;
use crate::effective::{constraint_residuals_for, CoefficientPolys, ConstraintSet, Tones};
use crate::error::{Error, Result};
use crate::fock::BasisIndex;
use crate::functionals::{cycle_infidelity, ImprovementReport, Objective};

/// Constraint residual below which a point counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Projected-gradient norm required of a KKT point.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// Smooth equality-constrained problem: min f(x) s.t. c(x) = 0.
#[derive(Clone, Debug)]
pub struct Nlp {
    pub objective: Poly<f64>,
    pub constraints: Vec<Poly<f64>>,
}

impl Nlp {
    pub fn vars(&self) -> usize {
        self.objective.vars()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    pub fn residuals(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| c.eval(x)))
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.constraints.len(), self.vars());
        for (i, c) in self.constraints.iter().enumerate() {
            a.set_row(i, &c.gradient_vector(x).transpose());
        }
        a
    }

    /// ∇²f + Σ wᵢ ∇²cᵢ.
    pub fn lagrangian_hessian(&self, x: &[f64], w: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.objective.hessian_matrix(x);
        for (c, wi) in self.constraints.iter().zip(w.iter()) {
            if *wi != 0.0 {
                h += c.hessian_matrix(x) * *wi;
            }
        }
        h
    }
}

/// Range and null-space split of a constraint Jacobian.
pub struct JacobianSplit {
    /// Pseudo-inverse A⁺ (n × p).
    pub pinv: DMatrix<f64>,
    /// Orthonormal null-space basis Z (n × (n − rank)).
    pub null: DMatrix<f64>,
}

impl JacobianSplit {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (p, n) = a.shape();
        let mut padded = DMatrix::zeros(n.max(p), n);
        padded.view_mut((0, 0), (p, n)).copy_from(a);
        let svd = padded.svd(true, true);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let smax = svd.singular_values.max();
        let tol = 1e-11 * smax.max(1e-300);
        let mut pinv = DMatrix::zeros(n, p);
        let mut null_cols = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            let v = vt.row(i).transpose();
            if *s > tol {
                let ui = u.column(i).rows(0, p).into_owned();
                pinv += (&v * ui.transpose()) / *s;
            } else {
                null_cols.push(v);
            }
        }
        let null = if null_cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&null_cols) };
        Self { pinv, null }
    }
}

/// Stationarity and feasibility at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kkt {
    pub max_residual: f64,
    pub projected_gradient: f64,
}

pub fn kkt(nlp: &Nlp, x: &[f64]) -> Kkt {
    let split = JacobianSplit::new(&nlp.jacobian(x));
    let g = nlp.objective.gradient_vector(x);
    Kkt { max_residual: nlp.residuals(x).amax(), projected_gradient: (split.null.transpose() * g).norm() }
}

/// Outcome of a local solve.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub kkt: Kkt,
    pub iterations: usize,
    pub converged: bool,
}

/// Equality-constrained local solver.
pub trait LocalSolver {
    fn solve(&self, nlp: &Nlp, x0: &[f64]) -> LocalResult;
}

/// Symmetric matrix with eigenvalues pushed to at least `floor` in magnitude.
pub(crate) fn positive_definite(h: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    if h.nrows() == 0 {
        return h.clone();
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1e-300);
    let lam = eig.eigenvalues.map(|l| l.abs().max(floor * scale));
    &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Sqp,
    AugmentedLagrangian,
}

impl SolverKind {
    fn solver(&self) -> Box<dyn LocalSolver> {
        match self {
            SolverKind::Sqp => Box::new(Sqp::default()),
            SolverKind::AugmentedLagrangian => Box::new(AugmentedLagrangian::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeltaScan {
    pub lo: f64,
    pub hi: f64,
    pub coarse_step: f64,
    pub refine_iters: usize,
}

impl Default for DeltaScan {
    fn default() -> Self {
        Self { lo: 0.0, hi: 0.5, coarse_step: 0.01, refine_iters: 20 }
    }
}

impl DeltaScan {
    pub fn grid(&self) -> Vec<f64> {
        let steps = ((self.hi - self.lo) / self.coarse_step + 1e-9).floor() as usize;
        (0..=steps).map(|i| self.lo + i as f64 * self.coarse_step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizationProblem {
    pub m: u32,
    pub n: u32,
    pub eta: f64,
    pub f_tg: f64,
    pub objective: Objective,
    pub constraints: ConstraintSet,
    pub delta_scan: DeltaScan,
    pub solver: SolverKind,
}

impl Default for OptimizationProblem {
    fn default() -> Self {
        Self {
            m: 10,
            n: 3,
            eta: 0.05,
            f_tg: 0.1,
            objective: Objective::default(),
            constraints: ConstraintSet::Five,
            delta_scan: DeltaScan::default(),
            solver: SolverKind::Sqp,
        }
    }
}

impl OptimizationProblem {
    pub fn paper(n: u32) -> Self {
        Self { n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m <= self.n {
            return Err(Error::UnsupportedRegime { m: self.m, n: self.n });
        }
        let s = &self.delta_scan;
        if s.lo.partial_cmp(&s.hi) != Some(std::cmp::Ordering::Less) || s.coarse_step.is_nan() || s.coarse_step <= 0.0 {
            return Err(Error::Config(format!("bad delta scan {s:?}")));
        }
        self.spec_at(0.0, self.warm_start())?.validate()
    }

    pub fn spec_at(&self, delta: f64, f: Vec<f64>) -> Result<PulseSpec> {
        PulseSpec::uniform(self.m, self.n, delta, f, self.eta, self.f_tg)
    }

    /// f₀ = f_tg/η₀, all other amplitudes zero.
    pub fn warm_start(&self) -> Vec<f64> {
        let mut f = vec![0.0; 2 * self.n as usize + 1];
        f[self.n as usize] = self.f_tg / self.eta;
        f
    }

    pub fn nlp_at(&self, delta: f64) -> Result<Nlp> {
        let tones = Tones::new(self.m, self.n, &vec![self.eta; 2 * self.n as usize + 1], delta)?;
        let polys = CoefficientPolys::new(&tones)?;
        Ok(Nlp {
            objective: self.objective.poly(&tones, self.f_tg),
            constraints: polys.constraints(self.constraints, self.f_tg),
        })
    }

    pub fn monochromatic(&self) -> Result<PulseSpec> {
        monochromatic_reference(self.f_tg, self.eta, self.m)
    }
}

/// Best objective found at one δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub delta: f64,
    pub objective: Option<f64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub delta_opt: f64,
    pub f_opt: Vec<f64>,
    pub objective_value: f64,
    pub residuals: Vec<f64>,
    pub feasible: bool,
    pub converged: bool,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub delta_profile: Vec<DeltaPoint>,
}

impl OptimizationResult {
    pub fn spec(&self, problem: &OptimizationProblem) -> Result<PulseSpec> {
        problem.spec_at(self.delta_opt, self.f_opt.clone())
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// Local solve at fixed δ from the warm start.
pub fn solve_at_delta(problem: &OptimizationProblem, delta: f64) -> Result<OptimizationResult> {
    solve_at_delta_from(problem, delta, &problem.warm_start())
}

pub fn solve_at_delta_from(problem: &OptimizationProblem, delta: f64, x0: &[f64]) -> Result<OptimizationResult> {
    problem.validate()?;
    let nlp = problem.nlp_at(delta)?;
    let local = problem.solver.solver().solve(&nlp, x0);
    let spec = problem.spec_at(delta, local.x.clone())?;
    let residuals = constraint_residuals_for(&spec, problem.constraints)?.r;
    let max_res = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let feasible = max_res < FEASIBILITY_TOL && local.x.iter().all(|v| v.is_finite());
    let objective_value = problem.objective.evaluate(&spec)?;
    Ok(OptimizationResult {
        delta_opt: delta,
        f_opt: local.x,
        objective_value,
        residuals,
        feasible,
        converged: local.converged && local.kkt.projected_gradient < STATIONARITY_TOL,
        projected_gradient: local.kkt.projected_gradient,
        iterations: local.iterations,
        delta_profile: vec![DeltaPoint { delta, objective: feasible.then_some(objective_value), feasible }],
    })
}

/// Ranking key: feasible points by objective, then infeasible ones by
/// residual norm.
fn rank(r: &OptimizationResult) -> (u8, f64) {
    if r.feasible {
        (0, r.objective_value)
    } else {
        (1, r.residuals.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

fn better(a: &OptimizationResult, b: &OptimizationResult) -> bool {
    let (ka, kb) = (rank(a), rank(b));
    ka < kb || (ka == kb && a.delta_opt < b.delta_opt)
}

/// Coarse δ scan, then golden-section refinement around the best grid point.
pub fn solve(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let mut profile = Vec::new();
    let mut best: Option<OptimizationResult> = None;
    let mut iterations = 0;
    let mut consider = |r: OptimizationResult, profile: &mut Vec<DeltaPoint>, best: &mut Option<OptimizationResult>| {
        iterations += r.iterations;
        profile.push(r.delta_profile[0]);
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            *best = Some(r);
        }
    };
    for delta in problem.delta_scan.grid() {
        let r = solve_at_delta(problem, delta)?;
        log::debug!("delta {delta:.3}: objective {:.6e} feasible {}", r.objective_value, r.feasible);
        consider(r, &mut profile, &mut best);
    }
    let center = best.as_ref().map(|b| b.delta_opt);
    if let Some(center) = center {
        let s = &problem.delta_scan;
        let (mut a, mut b) = ((center - s.coarse_step).max(s.lo), (center + s.coarse_step).min(s.hi));
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let rc = solve_at_delta(problem, c)?;
        let rd = solve_at_delta(problem, d)?;
        let (mut fc, mut fd) = (rank(&rc), rank(&rd));
        consider(rc, &mut profile, &mut best);
        consider(rd, &mut profile, &mut best);
        for _ in 0..s.refine_iters {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                let r = solve_at_delta(problem, c)?;
                fc = rank(&r);
                consider(r, &mut profile, &mut best);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                let r = solve_at_delta(problem, d)?;
                fd = rank(&r);
                consider(r, &mut profile, &mut best);
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::Config("empty delta scan".into()))?;
    if !best.feasible {
        log::warn!("no feasible delta found for n = {}", problem.n);
    }
    best.iterations = iterations;
    best.delta_profile = profile;
    Ok(best)
}

/// One row of an improvement sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub r_cycle: Option<f64>,
    pub r_theory: Option<f64>,
    pub i_mono: f64,
    pub i_poly: Option<f64>,
    pub delta_opt: Option<f64>,
    pub feasible: bool,
    pub f_opt: Vec<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn report(&self) -> Option<ImprovementReport> {
        ImprovementReport::new(self.i_mono, self.i_poly?).ok()
    }
}

/// For each n: optimize, then compare one-cycle infidelities from |g,1⟩
/// against the monochromatic reference. Failures are recorded per row.
pub fn improvement_sweep(base: &OptimizationProblem, ns: &[u32]) -> Result<Vec<SweepRow>> {
    let initial = BasisIndex::g(1);
    let mono = base.monochromatic()?;
    let i_mono = cycle_infidelity(&mono, initial)?.value.value;
    let theory_mono = base.objective.evaluate(&mono)?;
    let mut rows = Vec::new();
    for &n in ns {
        let problem = OptimizationProblem { n, ..base.clone() };
        let mut row = SweepRow {
            n,
            r_cycle: None,
            r_theory: None,
            i_mono,
            i_poly: None,
            delta_opt: None,
            feasible: false,
            f_opt: Vec::new(),
            error: None,
        };
        let outcome = solve(&problem).and_then(|res| {
            row.delta_opt = Some(res.delta_opt);
            row.feasible = res.feasible;
            row.f_opt = res.f_opt.clone();
            if !res.feasible {
                return Err(Error::Validation("no feasible pulse".into()));
            }
            row.r_theory = Some(theory_mono / res.objective_value);
            let c = cycle_infidelity(&res.spec(&problem)?, initial)?;
            row.i_poly = Some(c.value.value);
            row.r_cycle = Some(ImprovementReport::new(i_mono, c.value.value)?.r);
            Ok(())
        });
        if let Err(e) = outcome {
            log::warn!("sweep n = {n}: {e}");
            row.error = Some(e.to_string());
        }
        log::info!("sweep n = {n}: R = {:?}, R_theory = {:?}", row.r_cycle, row.r_theory);
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_nlp_point(n: u32, seed: u64) -> (Nlp, Vec<f64>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let problem = OptimizationProblem::paper(n);
        let nlp = problem.nlp_at(rng.gen_range(0.0..0.5)).unwrap();
        let x = (0..nlp.vars()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        (nlp, x)
    }

    #[test]
    fn gradients_match_central_differences() {
        for seed in 0..20u64 {
            let (nlp, x) = random_nlp_point([3, 5, 6, 9][seed as usize % 4], seed);
            let h = 1e-5;
            let mut polys = vec![&nlp.objective];
            polys.extend(nlp.constraints.iter());
            for p in polys {
                let g = p.gradient_vector(&x);
                for i in 0..x.len() {
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (p.eval(&xp) - p.eval(&xm)) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3), "seed {seed} var {i}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn split_is_orthogonal() {
        let (nlp, x) = random_nlp_point(4, 7);
        let a = nlp.jacobian(&x);
        let s = JacobianSplit::new(&a);
        assert_eq!(s.null.ncols(), nlp.vars() - nlp.constraints.len());
        assert!((&a * &s.null).amax() < 1e-12);
        assert!((&a * &s.pinv - DMatrix::identity(5, 5)).amax() < 1e-10);
    }

    #[test]
    fn zero_target_stays_at_zero() {
        let problem = OptimizationProblem { f_tg: 0.0, n: 3, ..Default::default() };
        let r = solve_at_delta(&problem, 0.0).unwrap();
        assert!(r.feasible);
        assert_eq!(r.objective_value, 0.0);
        assert!(r.f_opt.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn paper_n3_solution_is_kkt() {
        for solver in [SolverKind::Sqp, SolverKind::AugmentedLagrangian] {
            let problem = OptimizationProblem { solver, ..OptimizationProblem::paper(3) };
            let r = solve_at_delta(&problem, 0.26).unwrap();
            assert!(r.feasible, "{solver:?}: {:?}", r.residuals);
            assert!(r.converged, "{solver:?}: projected gradient {}", r.projected_gradient);
            let again = solve_at_delta_from(&problem, 0.26, &r.f_opt).unwrap();
            assert!((again.objective_value - r.objective_value).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_grid() {
        let g = DeltaScan::default().grid();
        assert_eq!(g.len(), 51);
        assert!((g[50] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(OptimizationProblem { n: 10, ..Default::default() }.validate().is_err());
        let scan = DeltaScan { lo: 0.3, hi: 0.1, ..Default::default() };
        assert!(OptimizationProblem { delta_scan: scan, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn overdetermined_scan_returns_least_infeasible_point() {
        // One amplitude against five equalities: nothing is feasible, and the
        // residual norm is smallest where the Lamb shift is compensated.
        let r = solve(&OptimizationProblem::paper(0)).unwrap();
        assert!(!r.feasible);
        assert!((r.delta_opt - 0.2).abs() < 0.02, "{}", r.delta_opt);
    }
}
