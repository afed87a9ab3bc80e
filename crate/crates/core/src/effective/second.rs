//! Second-order coefficients α₁..α₁₁ of H_eff^(2), with their m-branches.

use num_complex::Complex64 as C64;

use super::poly::Poly;
use super::{Alpha11Branch, Emitter, Tones};
use crate::error::Result;

pub fn alpha_second_polys(t: &Tones) -> Result<Vec<Poly<C64>>> {
    Ok(vec![
        alpha1(t)?,
        alpha2(t)?,
        alpha3(t)?,
        alpha4(t)?,
        alpha5(t)?,
        alpha6(t)?,
        alpha7(t)?,
        alpha8(t)?,
        alpha9(t)?,
        alpha10(t)?,
        alpha11(t)?,
    ])
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

fn alpha1(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(-d * d), 2 * (m - j) * (m - j), &[j])?;
    }
    Ok(a.build())
}

fn alpha2(t: &Tones) -> Result<Poly<C64>> {
    let d = t.delta;
    let mut a = Emitter::new(t);
    for j in t.js().filter(|&j| j != 0) {
        a.add(im(-d * d * t.eta(j)), 2 * j * j, &[j])?;
    }
    Ok(a.build())
}

fn alpha3(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(im(-d * d * t.eta(j)), 2 * (2 * m - j) * (2 * m - j), &[j])?;
    }
    Ok(a.build())
}

fn alpha4(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(d), 8 * (m - j) * (m - j), &[j, j])?;
    }
    for (j, q) in t.pairs() {
        a.add(re(d), 8 * (m - j) * (m - q), &[j, q])?;
    }
    Ok(a.build())
}

fn alpha5(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(im(-d * e(0)), 4 * (m - j) * (m - j), &[0, j])?;
    }
    for (j, q) in t.pairs() {
        if q != 0 {
            a.add(im(-d * e(q)), 4 * q * (m - j), &[j, q])?;
        }
        a.add(im(-d * e(j)), 4 * (m - q) * (2 * m - j), &[j, q])?;
    }
    if !t.m_gt_2n() {
        for (j, q) in t.pairs() {
            if q != 0 && m - j + q == 0 {
                a.add(im(d * e(q)), 8 * q * q, &[j, q])?;
            }
            if m - q + j == 0 {
                a.add(im(d * e(j)), 8 * (m - q) * (m - q), &[j, q])?;
            }
            if m + j - q == 0 {
                a.add(im(-d * e(q)), 6 * (2 * m - q) * (2 * m - q), &[j, q])?;
            }
            if m - j + q == 0 {
                a.add(im(-d * e(j)), 12 * (m - q) * (m - q), &[j, q])?;
            }
        }
    }
    Ok(a.build())
}

fn alpha6(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(-d * e(0) * e(j)), 4 * (2 * m - j) * (2 * m - j), &[0, j])?;
    }
    for (j, q) in t.pairs().filter(|&(j, _)| j != 0) {
        a.add(re(-d * e(j) * e(q)), 4 * j * (2 * m - q), &[j, q])?;
    }
    Ok(a.build())
}

fn alpha7(t: &Tones) -> Result<Poly<C64>> {
    let d = t.delta;
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    for j in t.js().filter(|&j| j != 0) {
        a.add(re(d * e(j) * e(j)), 8 * j * j, &[j, j])?;
        a.add(re(-d * e(0) * e(j)), 4 * j * j, &[0, j])?;
    }
    for (j, q) in t.pairs().filter(|&(j, q)| j != 0 && q != 0) {
        a.add(re(d * e(j) * e(q)), 8 * j * q, &[j, q])?;
    }
    Ok(a.build())
}

fn alpha8(t: &Tones) -> Result<Poly<C64>> {
    let (m, d) = (t.m, t.delta);
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    for j in t.js() {
        a.add(re(d * e(j) * e(j)), 8 * (2 * m - j) * (2 * m - j), &[j, j])?;
    }
    for (j, q) in t.pairs() {
        a.add(re(d * e(j) * e(q)), 8 * (2 * m - j) * (2 * m - q), &[j, q])?;
    }
    Ok(a.build())
}

fn alpha9(t: &Tones) -> Result<Poly<C64>> {
    let m = t.m;
    let mut a = Emitter::new(t);
    for (j, q) in t.pairs() {
        a.add(re(1.0), 4 * (m - j) * (m - q), &[j, q, q])?;
    }
    if !t.m_gt_3n() {
        for (j, q, r) in t.triples() {
            if q != r && m - j + q - r == 0 {
                a.add(re(1.0), 8 * (m - r) * (q - r), &[j, q, r])?;
            }
        }
    }
    Ok(a.build())
}

fn alpha10(t: &Tones) -> Result<Poly<C64>> {
    let m = t.m;
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    if t.m_gt_2n() {
        for (j, q, r) in t.triples() {
            if q - r - j == 0 {
                a.add(im(-e(q)), 8 * (m - r) * (q - r - m), &[j, q, r])?;
            }
            if q - r + j == 0 {
                a.add(im(-e(q)), 12 * (m - r) * (m + q - r), &[j, q, r])?;
            }
            if q != r && r + j - q == 0 {
                a.add(im(-e(j)), 6 * (m - r) * (r - q), &[j, q, r])?;
            }
            if q != r && r - q - j == 0 {
                a.add(im(e(j)), 12 * (m - r) * (r - q), &[j, q, r])?;
            }
        }
        for (j, q) in t.pairs() {
            a.add(im(-e(0)), 6 * (m - j) * (m - q), &[0, j, q])?;
            if j != 0 {
                a.add(im(-e(j)), 4 * j * (m - q), &[j, q, q])?;
            }
            if j != q {
                a.add(im(e(0)), 12 * (m - q) * (q - j), &[0, j, q])?;
            }
        }
    } else {
        for (j, q, r) in t.triples() {
            if j - m - q != 0 && j - r - q == 0 {
                a.add(im(-e(j)), 4 * (2 * m - j) * (j - m - q), &[j, q, r])?;
            }
            if j - m - q == 0 {
                a.add(im(-e(j)), 4 * (2 * m - j) * (m - r), &[j, q, r])?;
            }
            if q != r && r - q - j == 0 {
                a.add(im(e(j)), 12 * (m - r) * (r - q), &[j, q, r])?;
            }
            if m - r + j != 0 && r - j - q == 0 {
                a.add(im(-e(j)), 12 * (m - r) * (m - r + j), &[j, q, r])?;
            }
            if m - r + j == 0 {
                a.add(im(e(j)), 12 * (m - r) * (m - q), &[j, q, r])?;
            }
            if j != 0 && m - j - q == 0 {
                a.add(im(e(j)), 12 * j * (m - r), &[j, q, r])?;
            }
            if m - q - j == 0 {
                a.add(im(-e(j)), 12 * (m - r) * (m - q), &[j, q, r])?;
            }
            if j != 0 && m - q + j == 0 {
                a.add(im(-e(j)), 6 * j * (m - r), &[j, q, r])?;
            }
            if j != 0 && m - q + j != 0 && q - r - j == 0 {
                a.add(im(e(j)), 6 * j * (m - q + j), &[j, q, r])?;
            }
        }
        for (j, q) in t.pairs() {
            if j != q {
                a.add(im(-e(0)), 4 * (m - j) * (j - q), &[0, j, q])?;
            }
            if j != 0 {
                a.add(im(-e(j)), 4 * j * (m - q), &[j, q, q])?;
            }
        }
        for j in t.js() {
            a.add(im(-e(0)), 6 * (m - j) * (m - j), &[0, j, j])?;
        }
    }
    Ok(a.build())
}

fn alpha11(t: &Tones) -> Result<Poly<C64>> {
    let m = t.m;
    let e = |j| t.eta(j);
    let mut a = Emitter::new(t);
    let branch = t.alpha11_branch();
    if branch == Alpha11Branch::MGt2N {
        for (j, q) in t.pairs() {
            a.add(im(e(0)), 8 * (m - j) * (m - q), &[0, j, q])?;
            a.add(im(e(j)), 4 * (m - q) * (2 * m - j), &[j, q, q])?;
        }
        return Ok(a.build());
    }
    for (j, q) in t.pairs() {
        a.add(im(e(0)), 4 * (m - q) * (2 * m - j - q), &[0, j, q])?;
        a.add(im(e(j)), 4 * (m - q) * (2 * m - j), &[j, q, q])?;
    }
    for (j, q, r) in t.triples() {
        if j != 0 && m - q + j == 0 {
            a.add(im(e(j)), 4 * j * (m - r), &[j, q, r])?;
        }
        if m + q - j == 0 {
            a.add(im(e(j)), 4 * (2 * m - j) * (m - r), &[j, q, r])?;
        }
        if branch == Alpha11Branch::Lower {
            if j != 0 && m - q + j != 0 && 2 * m - r - q + j == 0 {
                a.add(im(e(j)), 4 * j * (m - q + j), &[j, q, r])?;
            }
            if q != r && 2 * m - j + r - q == 0 {
                a.add(im(e(j)), 12 * (m - r) * (r - q), &[j, q, r])?;
            }
            if m + q - j != 0 && 2 * m - j + q - r == 0 {
                a.add(im(e(j)), 6 * (2 * m - j) * (m + q - j), &[j, q, r])?;
            }
            if 2 * m + q - j - r == 0 {
                a.add(im(-e(j)), 12 * (m - r) * (3 * m - j - r), &[j, q, r])?;
            }
        }
    }
    Ok(a.build())
}
