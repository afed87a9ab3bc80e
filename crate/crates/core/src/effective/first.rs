//! First-order coefficients α₁..α₈ of H_eff^(1).

use num_complex::Complex64 as C64;

use super::poly::Poly;
use super::{Emitter, Tones};
use crate::error::Result;

/// The eight α^(1) as polynomials in the amplitudes.
pub fn alpha_first_polys(t: &Tones) -> Result<Vec<Poly<C64>>> {
    let (m, d) = (t.m, t.delta);
    let i = C64::i();
    let re = |x: f64| C64::new(x, 0.0);
    let mut out = Vec::with_capacity(8);

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(-d), 2 * (m - j), &[j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js().filter(|&j| j != 0) {
        a.add(i * t.eta(j) * d, 2 * j, &[j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(-i * t.eta(j) * d, 2 * (2 * m - j), &[j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(1.0), 8 * (m - j), &[j, j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(-i * t.eta(0), 4 * (m - j), &[0, j])?;
    }
    if !t.m_gt_2n() {
        for (j, q) in t.pairs() {
            if q == m + j {
                a.add(i * t.eta(j), 4 * (m - q), &[j, q])?;
            }
            if j == m + q {
                a.add(-i * t.eta(j), 4 * (2 * m - j), &[j, q])?;
            }
        }
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(-t.eta(0) * t.eta(j)), 4 * (2 * m - j), &[0, j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js().filter(|&j| j != 0) {
        a.add(re(t.eta(0) * t.eta(j)), 4 * j, &[0, j])?;
        a.add(re(-t.eta(j) * t.eta(j)), 8 * j, &[j, j])?;
    }
    out.push(a.build());

    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(t.eta(j) * t.eta(j)), 8 * (2 * m - j), &[j, j])?;
    }
    out.push(a.build());

    Ok(out)
}
