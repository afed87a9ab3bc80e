//! Augmented-Lagrangian method with damped Newton inner iterations.

use nalgebra::DVector;

use super::{kkt, positive_definite, LocalResult, LocalSolver, Nlp};

#[derive(Clone, Copy, Debug)]
pub struct AugmentedLagrangian {
    pub max_outer: usize,
    pub max_inner: usize,
    pub rho0: f64,
    pub feas_tol: f64,
    pub stat_tol: f64,
}

impl Default for AugmentedLagrangian {
    fn default() -> Self {
        Self { max_outer: 60, max_inner: 100, rho0: 10.0, feas_tol: 1e-12, stat_tol: 1e-11 }
    }
}

struct Augmented<'a> {
    nlp: &'a Nlp,
    lambda: DVector<f64>,
    rho: f64,
}

impl Augmented<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let c = self.nlp.residuals(x);
        self.nlp.value(x) + self.lambda.dot(&c) + 0.5 * self.rho * c.norm_squared()
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let c = self.nlp.residuals(x);
        let a = self.nlp.jacobian(x);
        self.nlp.objective.gradient_vector(x) + a.transpose() * (&self.lambda + &c * self.rho)
    }

    /// Minimizes over x by damped Newton steps; returns the inner iteration count.
    fn minimize(&self, x: &mut DVector<f64>, max_inner: usize, tol: f64) -> usize {
        for it in 0..max_inner {
            let xs = x.as_slice();
            let g = self.gradient(xs);
            if g.norm() < tol {
                return it;
            }
            let c = self.nlp.residuals(xs);
            let a = self.nlp.jacobian(xs);
            let w = &self.lambda + &c * self.rho;
            let h = self.nlp.lagrangian_hessian(xs, &w) + a.transpose() * &a * self.rho;
            let h = positive_definite(&h, 1e-12);
            let p = match h.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => -&g,
            };
            let f0 = self.value(xs);
            let slope = g.dot(&p);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial = &*x + &p * step;
                if self.value(trial.as_slice()) <= f0 + 1e-4 * step * slope {
                    *x = trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                return it;
            }
        }
        max_inner
    }
}

impl LocalSolver for AugmentedLagrangian {
    fn solve(&self, nlp: &Nlp, x0: &[f64]) -> LocalResult {
        let mut x = DVector::from_column_slice(x0);
        let mut al = Augmented { nlp, lambda: DVector::zeros(nlp.constraints.len()), rho: self.rho0 };
        let mut iterations = 0;
        let mut converged = false;
        let mut last_violation = f64::INFINITY;
        for outer in 0..self.max_outer {
            let inner_tol = (1e-3 / (outer as f64 + 1.0).powi(3)).max(self.stat_tol * 1e-2);
            iterations += al.minimize(&mut x, self.max_inner, inner_tol);
            let c = nlp.residuals(x.as_slice());
            let k = kkt(nlp, x.as_slice());
            if k.max_residual < self.feas_tol && k.projected_gradient < self.stat_tol {
                converged = true;
                break;
            }
            al.lambda += &c * al.rho;
            let violation = c.amax();
            if violation > 0.25 * last_violation {
                al.rho = (al.rho * 10.0).min(1e12);
            }
            last_violation = violation;
        }
        let xv: Vec<f64> = x.iter().copied().collect();
        LocalResult { objective: nlp.value(&xv), kkt: kkt(nlp, &xv), x: xv, iterations, converged }
    }
}
