//! Polychromatic drive description and the interaction-frame Hamiltonian.
//!
//! Units: ω = 1, so one drive period is T = 2π.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Operator, Operators};

pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// A polychromatic pulse with tones j = -n..=n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Trap frequency in units of the drive spacing, ν = mω.
    pub m: u32,
    /// Sideband count; tones run over j = -n..=n.
    pub n: u32,
    pub delta: f64,
    /// Amplitudes f_j ordered j = -n..=n.
    pub f: Vec<f64>,
    /// Lamb-Dicke parameters η_j ordered j = -n..=n.
    pub eta: Vec<f64>,
    pub f_tg: f64,
}

impl PulseSpec {
    /// Builds a spec with uniform Lamb-Dicke parameter.
    pub fn uniform(m: u32, n: u32, delta: f64, f: Vec<f64>, eta: f64, f_tg: f64) -> Result<Self> {
        let eta = vec![eta; 2 * n as usize + 1];
        let spec = Self { m, n, delta, f, eta, f_tg };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.tones();
        if self.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if self.m <= self.n {
            return Err(Error::UnsupportedRegime { m: self.m, n: self.n });
        }
        if self.f.len() != len || self.eta.len() != len {
            return Err(Error::Config(format!(
                "f and eta must have 2n+1 = {len} entries (got {} and {})",
                self.f.len(),
                self.eta.len()
            )));
        }
        if let Some(e) = self.eta.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("Lamb-Dicke parameter {e} outside (0, 1)")));
        }
        if !self.delta.is_finite() || self.f.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("delta and f must be finite".into()));
        }
        if !(self.f_tg >= 0.0 && self.f_tg.is_finite()) {
            return Err(Error::Config(format!("f_tg must be non-negative, got {}", self.f_tg)));
        }
        Ok(())
    }

    /// Number of tones, 2n+1.
    pub fn tones(&self) -> usize {
        2 * self.n as usize + 1
    }

    /// Tone labels j = -n..=n in storage order.
    pub fn js(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.n as i64;
        -n..=n
    }

    /// Amplitude of tone `j`.
    pub fn f_at(&self, j: i64) -> f64 {
        self.f[(j + self.n as i64) as usize]
    }

    pub fn eta_at(&self, j: i64) -> f64 {
        self.eta[(j + self.n as i64) as usize]
    }

    /// Copy with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.f.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn with_amplitudes(&self, f: &[f64]) -> Self {
        let mut out = self.clone();
        out.f = f.to_vec();
        out
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }
}

/// The three Fourier sums at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveCoefficients {
    pub h1: C64,
    pub h2: C64,
    pub h3: C64,
}

/// h1 = Σ f_j/2 e^{i(m-j)t}, h2 = Σ iη_j f_j/2 e^{-ijt}, h3 = Σ iη_j f_j/2 e^{i(2m-j)t}.
pub fn h_funcs(spec: &PulseSpec, t: f64) -> DriveCoefficients {
    let m = spec.m as f64;
    let step = C64::cis(-t);
    let mut phase = C64::cis(spec.n as f64 * t);
    let mut carrier = C64::new(0.0, 0.0);
    let mut side = C64::new(0.0, 0.0);
    for (f, eta) in spec.f.iter().zip(&spec.eta) {
        carrier += 0.5 * f * phase;
        side += C64::new(0.0, 0.5 * eta * f) * phase;
        phase *= step;
    }
    DriveCoefficients { h1: C64::cis(m * t) * carrier, h2: side, h3: C64::cis(2.0 * m * t) * side }
}

/// Operator pieces of H(t), prebuilt once per space.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub static_part: Operator,
    /// Lower-triangle positions of σ₊, σ₊a, σ₊a† with their (real) matrix elements.
    raising: Vec<(usize, usize, [f64; 3])>,
}

impl HamiltonianParts {
    pub fn new(delta: f64, ops: &Operators) -> Self {
        let sp_a = &ops.sigma_plus * &ops.a;
        let sp_ad = &ops.sigma_plus * &ops.a_dag;
        let dim = ops.dim();
        let mut raising = Vec::new();
        for c in 0..dim {
            for r in 0..dim {
                let w = [ops.sigma_plus[(r, c)].re, sp_a[(r, c)].re, sp_ad[(r, c)].re];
                if w.iter().any(|x| *x != 0.0) {
                    raising.push((r, c, w));
                }
            }
        }
        Self { static_part: ops.sigma_z.scale(-0.5 * delta), raising }
    }

    pub fn raising(&self) -> &[(usize, usize, [f64; 3])] {
        &self.raising
    }

    pub fn dim(&self) -> usize {
        self.static_part.nrows()
    }

    /// Writes H(t) for given drive values into `out`.
    pub fn fill(&self, h: &DriveCoefficients, out: &mut Operator) {
        out.copy_from(&self.static_part);
        for &(r, c, w) in &self.raising {
            let x = h.h1 * w[0] + h.h2 * w[1] + h.h3 * w[2];
            out[(r, c)] += x;
            out[(c, r)] += x.conj();
        }
    }
}

/// H(t) = -(δ/2)σz + h1σ₊ + h2σ₊a + h3σ₊a† + h.c.
pub fn hamiltonian(spec: &PulseSpec, t: f64, ops: &Operators) -> Result<Operator> {
    let parts = HamiltonianParts::new(spec.delta, ops);
    let dim = ops.dim();
    let mut out = Operator::zeros(dim, dim);
    parts.fill(&h_funcs(spec, t), &mut out);
    Ok(out)
}

/// Checks that `op` has the dimension of the operator set.
pub fn check_shape(op: &Operator, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::Shape { expected: dim, rows: op.nrows(), cols: op.ncols() });
    }
    Ok(())
}

/// Single-tone pulse whose bare sideband amplitude η f₀ equals `f_tg`,
/// detuned by the Lamb shift f_tg²/(2η²m).
pub fn monochromatic_reference(f_tg: f64, eta: f64, m: u32) -> Result<PulseSpec> {
    let f0 = f_tg / eta;
    if f0 > 0.5 * m as f64 {
        log::warn!("carrier amplitude f0 = {f0} is not small compared to m = {m}");
    }
    let delta = f_tg * f_tg / (2.0 * eta * eta * m as f64);
    PulseSpec::uniform(m, 0, delta, vec![f0], eta, f_tg)
}
