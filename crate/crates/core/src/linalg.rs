//! Small dense linear-algebra helpers on complex operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::Operator;

pub fn commutator(x: &Operator, y: &Operator) -> Operator {
    x * y - y * x
}

/// Largest entry modulus.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &Operator) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// max |U†U − 1|.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - Operator::identity(n, n)))
}

/// Spectral decomposition of a Hermitian operator, reusable for exp(−iHt) at many t.
#[derive(Clone, Debug)]
pub struct HermitianExp {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianExp {
    pub fn new(h: &Operator) -> Result<Self> {
        let defect = hermiticity_defect(h);
        if defect > 1e-10 {
            return Err(Error::Validation(format!("operator is not Hermitian (defect {defect:.3e})")));
        }
        // Symmetrize so the eigensolver sees an exactly Hermitian input.
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = sym.symmetric_eigen();
        Ok(Self { values: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    /// exp(−iHt).
    pub fn at(&self, t: f64) -> Operator {
        let phases = self.values.map(|l| C64::cis(-l * t));
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        scaled * self.vectors.adjoint()
    }
}

/// exp(−iHt) by eigendecomposition.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Ok(HermitianExp::new(h)?.at(t))
}

/// exp(−iHt) by Padé scaling and squaring; independent of the eigen route.
pub fn expm_pade(h: &Operator, t: f64) -> Operator {
    h.scale(t).map(|z| z * C64::new(0.0, -1.0)).exp()
}
