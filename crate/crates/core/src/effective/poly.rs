//! Sparse polynomials of degree ≤ 3 in the tone amplitudes.
//!
//! Every closed-form coefficient is a sum of monomials in the f_j with
//! η_j and δ folded into the coefficients, so value, gradient and Hessian
//! are all exact.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use num_traits::Zero;

/// Coefficient field: real or complex.
pub trait Coef: Copy + Zero + AddAssign + Add<Output = Self> + Mul<f64, Output = Self> + PartialEq {}
impl Coef for f64 {}
impl Coef for C64 {}

#[derive(Clone, Debug, PartialEq)]
struct Term<T> {
    coef: T,
    idx: [usize; 3],
    degree: usize,
}

impl<T: Coef> Term<T> {
    fn vars(&self) -> &[usize] {
        &self.idx[..self.degree]
    }

    /// Product of f over all positions except those in `skip`.
    fn product_without(&self, f: &[f64], skip: &[usize]) -> f64 {
        self.vars().iter().enumerate().filter(|(p, _)| !skip.contains(p)).map(|(_, &v)| f[v]).product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    vars: usize,
    terms: Vec<Term<T>>,
}

/// Accumulates monomials, merging equal index multisets.
#[derive(Clone, Debug)]
pub struct PolyBuilder<T> {
    vars: usize,
    acc: BTreeMap<(usize, [usize; 3]), T>,
}

impl<T: Coef> PolyBuilder<T> {
    pub fn new(vars: usize) -> Self {
        Self { vars, acc: BTreeMap::new() }
    }

    /// Adds `coef · Π f[idx]`; `idx` has at most three entries.
    pub fn add(&mut self, coef: T, idx: &[usize]) {
        assert!(idx.len() <= 3, "degree above three");
        assert!(idx.iter().all(|&i| i < self.vars), "variable index out of range");
        let mut key = [0usize; 3];
        key[..idx.len()].copy_from_slice(idx);
        key[..idx.len()].sort_unstable();
        *self.acc.entry((idx.len(), key)).or_insert_with(T::zero) += coef;
    }

    pub fn add_poly(&mut self, p: &Poly<T>, scale: f64) {
        for t in &p.terms {
            self.add(t.coef * scale, t.vars());
        }
    }

    pub fn build(self) -> Poly<T> {
        let terms = self
            .acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((degree, idx), coef)| Term { coef, idx, degree })
            .collect();
        Poly { vars: self.vars, terms }
    }
}

impl<T: Coef> Poly<T> {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, f: &[f64]) -> T {
        let mut acc = T::zero();
        for t in &self.terms {
            acc += t.coef * t.product_without(f, &[]);
        }
        acc
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<T> {
        let mut g = vec![T::zero(); self.vars];
        for t in &self.terms {
            for (p, &v) in t.vars().iter().enumerate() {
                g[v] += t.coef * t.product_without(f, &[p]);
            }
        }
        g
    }

    /// Row-major `vars × vars` Hessian.
    pub fn hessian(&self, f: &[f64]) -> Vec<T> {
        let n = self.vars;
        let mut h = vec![T::zero(); n * n];
        for t in &self.terms {
            let vars = t.vars();
            for (p1, &v1) in vars.iter().enumerate() {
                for (p2, &v2) in vars.iter().enumerate() {
                    if p1 != p2 {
                        h[v1 * n + v2] += t.coef * t.product_without(f, &[p1, p2]);
                    }
                }
            }
        }
        h
    }

    pub fn map<U: Coef>(&self, g: impl Fn(T) -> U) -> Poly<U> {
        let mut b = PolyBuilder::new(self.vars);
        for t in &self.terms {
            b.add(g(t.coef), t.vars());
        }
        b.build()
    }

    /// Sum of `(scale, poly)` pairs over the same variables.
    pub fn combine(parts: &[(f64, &Poly<T>)]) -> Self {
        let vars = parts.first().map(|(_, p)| p.vars).unwrap_or(0);
        let mut b = PolyBuilder::new(vars);
        for (s, p) in parts {
            b.add_poly(p, *s);
        }
        b.build()
    }

    /// Keeps only the terms of the given degree.
    pub fn homogeneous(&self, degree: usize) -> Self {
        Self { vars: self.vars, terms: self.terms.iter().filter(|t| t.degree == degree).cloned().collect() }
    }
}

impl Poly<f64> {
    pub fn gradient_vector(&self, f: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.gradient(f))
    }

    pub fn hessian_matrix(&self, f: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.vars, self.vars, &self.hessian(f))
    }
}

impl Poly<C64> {
    pub fn re(&self) -> Poly<f64> {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> Poly<f64> {
        self.map(|c| c.im)
    }
}
