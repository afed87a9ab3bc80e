//! Composite Gauss–Legendre rules for time-ordered integrals over [0, T].
//!
//! A nested integral ∫_{T>t1>t2>t3>0} f1(t1) f2(t2) f3(t3) is evaluated
//! panel by panel: the inner integral up to a node splits into the complete
//! panels before it plus a partial panel, which gets its own mapped
//! Gauss–Legendre rule. This keeps spectral accuracy on every level.

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;

/// Quadrature nodes for up to three nesting levels.
#[derive(Clone, Debug)]
pub struct NestedGrid {
    panels: usize,
    q: usize,
    /// Outer nodes, `panels * q`.
    pub x: Vec<f64>,
    wx: Vec<f64>,
    /// Partial-panel nodes below each outer node, `panels * q²`.
    pub y: Vec<f64>,
    wy: Vec<f64>,
    /// Partial-panel nodes below each `y` node, `panels * q³`.
    pub z: Vec<f64>,
    wz: Vec<f64>,
}

/// A function sampled on every node level of a grid.
#[derive(Clone, Debug)]
pub struct Samples {
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    pub z: Vec<C64>,
}

/// ∫_0^t f evaluated at the `x` and `y` nodes.
#[derive(Clone, Debug)]
pub struct Cumulative {
    x: Vec<C64>,
    y: Vec<C64>,
}

impl Cumulative {
    /// Values at the outer nodes.
    pub fn at_x(&self) -> &[C64] {
        &self.x
    }
}

fn mapped(rule: &[(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
    rule.iter().map(move |&(x, w)| (mid + half * x, half * w))
}

impl NestedGrid {
    /// `panels` equal panels on [0, length], `q` Gauss–Legendre nodes each.
    pub fn new(length: f64, panels: usize, q: usize) -> Self {
        let rule = GaussLegendre::new(q).expect("rule needs at least two nodes");
        let rule = rule.as_node_weight_pairs();
        let h = length / panels as f64;
        let (mut x, mut wx) = (Vec::new(), Vec::new());
        let (mut y, mut wy) = (Vec::new(), Vec::new());
        let (mut z, mut wz) = (Vec::new(), Vec::new());
        for p in 0..panels {
            let start = p as f64 * h;
            for (xa, wa) in mapped(rule, start, start + h) {
                x.push(xa);
                wx.push(wa);
                for (yb, wb) in mapped(rule, start, xa) {
                    y.push(yb);
                    wy.push(wb);
                    for (zc, wc) in mapped(rule, start, yb) {
                        z.push(zc);
                        wz.push(wc);
                    }
                }
            }
        }
        Self { panels, q, x, wx, y, wy, z, wz }
    }

    /// Weights of the outer nodes.
    pub fn weights(&self) -> &[f64] {
        &self.wx
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.panels * self.q
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Samples {
        Samples {
            x: self.x.iter().map(|&t| f(t)).collect(),
            y: self.y.iter().map(|&t| f(t)).collect(),
            z: self.z.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn one(&self) -> Samples {
        self.sample(|_| C64::new(1.0, 0.0))
    }

    /// Prefix sums of Σ w·v over complete panels; entry p covers panels 0..p.
    fn panel_prefix(&self, v: impl Iterator<Item = C64>) -> Vec<C64> {
        let mut prefix = vec![C64::new(0.0, 0.0); self.panels];
        let mut acc = C64::new(0.0, 0.0);
        let mut it = v.zip(self.wx.iter());
        for slot in prefix.iter_mut() {
            *slot = acc;
            for _ in 0..self.q {
                let (val, w) = it.next().unwrap();
                acc += val * *w;
            }
        }
        prefix
    }

    /// ∫_0^T f.
    pub fn integral(&self, f: &Samples) -> C64 {
        f.x.iter().zip(&self.wx).map(|(v, w)| v * *w).sum()
    }

    /// Running integral of `f` at the `x` and `y` nodes.
    pub fn cumulative(&self, f: &Samples) -> Cumulative {
        let q = self.q;
        let prefix = self.panel_prefix(f.x.iter().copied());
        let x = (0..self.x.len())
            .map(|a| {
                let partial: C64 = (0..q).map(|b| f.y[a * q + b] * self.wy[a * q + b]).sum();
                prefix[a / q] + partial
            })
            .collect();
        let y = (0..self.y.len())
            .map(|ab| {
                let partial: C64 = (0..q).map(|c| f.z[ab * q + c] * self.wz[ab * q + c]).sum();
                prefix[ab / (q * q)] + partial
            })
            .collect();
        Cumulative { x, y }
    }

    /// ∫_{T>t1>t2>0} f1(t1) f2(t2).
    pub fn nested2(&self, f1: &Samples, c2: &Cumulative) -> C64 {
        f1.x.iter().zip(&c2.x).zip(&self.wx).map(|((a, b), w)| a * b * *w).sum()
    }

    /// ∫_{T>t1>t2>t3>0} f1(t1) f2(t2) f3(t3), given the running integral of f3.
    pub fn nested3(&self, f1: &Samples, f2: &Samples, c3: &Cumulative) -> C64 {
        let q = self.q;
        let prefix = self.panel_prefix(f2.x.iter().zip(&c3.x).map(|(a, b)| a * b));
        let mut total = C64::new(0.0, 0.0);
        for a in 0..self.x.len() {
            let mut partial = C64::new(0.0, 0.0);
            for b in a * q..(a + 1) * q {
                partial += f2.y[b] * c3.y[b] * self.wy[b];
            }
            total += f1.x[a] * (prefix[a / q] + partial) * self.wx[a];
        }
        total
    }
}

/// Relative agreement test with an absolute floor.
pub fn agrees(a: C64, b: C64, rel: f64, floor: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()) + floor
}
