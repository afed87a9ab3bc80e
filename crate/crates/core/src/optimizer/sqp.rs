//! Null-space Newton SQP with an ℓ₁ merit line search and second-order
//! correction.

use nalgebra::DVector;

use super::{kkt, positive_definite, JacobianSplit, LocalResult, LocalSolver, Nlp};

#[derive(Clone, Copy, Debug)]
pub struct Sqp {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub stat_tol: f64,
}

impl Default for Sqp {
    fn default() -> Self {
        Self { max_iter: 200, feas_tol: 1e-12, stat_tol: 1e-11 }
    }
}

fn merit(nlp: &Nlp, x: &DVector<f64>, mu: f64) -> f64 {
    nlp.value(x.as_slice()) + mu * nlp.residuals(x.as_slice()).lp_norm(1)
}

impl LocalSolver for Sqp {
    fn solve(&self, nlp: &Nlp, x0: &[f64]) -> LocalResult {
        let mut x = DVector::from_column_slice(x0);
        let mut mu: f64 = 0.0;
        let mut iterations = 0;
        let mut converged = false;
        for it in 0..self.max_iter {
            iterations = it;
            let xs = x.as_slice();
            let g = nlp.objective.gradient_vector(xs);
            let c = nlp.residuals(xs);
            let a = nlp.jacobian(xs);
            let split = JacobianSplit::new(&a);
            let lambda = -split.pinv.transpose() * &g;
            let zt_g = split.null.transpose() * &g;
            if c.amax() < self.feas_tol && zt_g.norm() < self.stat_tol {
                converged = true;
                break;
            }
            let h = nlp.lagrangian_hessian(xs, &lambda);
            let p_range = -&split.pinv * &c;
            let z = &split.null;
            let p = if z.ncols() > 0 {
                let hz = positive_definite(&(z.transpose() * &h * z), 1e-10);
                let rhs = -(z.transpose() * (&g + &h * &p_range));
                let pz = hz.cholesky().map(|ch| ch.solve(&rhs)).unwrap_or_else(|| rhs.clone());
                &p_range + z * pz
            } else {
                p_range
            };
            if p.amax() < 1e-15 * x.amax().max(1.0) {
                converged = c.amax() < self.feas_tol;
                break;
            }
            mu = mu.max(1.5 * lambda.amax() + 1e-8);
            let phi0 = merit(nlp, &x, mu);
            let slope = g.dot(&p) - mu * c.lp_norm(1);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..50 {
                let trial = &x + &p * step;
                if merit(nlp, &trial, mu) <= phi0 + 1e-4 * step * slope {
                    x = trial;
                    accepted = true;
                    break;
                }
                if step == 1.0 {
                    // Second-order correction against the Maratos effect.
                    let c_trial = nlp.residuals(trial.as_slice());
                    let corrected = &trial - &split.pinv * c_trial;
                    if merit(nlp, &corrected, mu) <= phi0 + 1e-4 * slope {
                        x = corrected;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // Accept a pure feasibility step when the merit stalls at round-off.
                let restored = &x + &split.pinv * (-&c);
                if nlp.residuals(restored.as_slice()).amax() < c.amax() {
                    x = restored;
                } else {
                    break;
                }
            }
        }
        let xv: Vec<f64> = x.iter().copied().collect();
        LocalResult { objective: nlp.value(&xv), kkt: kkt(nlp, &xv), x: xv, iterations, converged }
    }
}
