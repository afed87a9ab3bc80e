//! Truncated qubit ⊗ harmonic-oscillator state space.
//!
//! Basis states are ordered electronic-fastest:
//! `|g,0⟩, |e,0⟩, |g,1⟩, |e,1⟩, …`, so that flat index = `2k + (0 | 1)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex operator on the truncated space.
pub type Operator = DMatrix<C64>;

/// Default number of guard levels kept above the highest occupied level.
pub const DEFAULT_BUFFER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Electronic {
    G,
    E,
}

impl Electronic {
    fn offset(self) -> usize {
        match self {
            Electronic::G => 0,
            Electronic::E => 1,
        }
    }

    pub fn label(self) -> char {
        match self {
            Electronic::G => 'g',
            Electronic::E => 'e',
        }
    }
}

/// A product basis state `|electronic, k⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub electronic: Electronic,
    pub k: usize,
}

impl BasisIndex {
    pub fn g(k: usize) -> Self {
        Self { electronic: Electronic::G, k }
    }

    pub fn e(k: usize) -> Self {
        Self { electronic: Electronic::E, k }
    }

    /// Column label used in CSV headers, e.g. `p_g1`.
    pub fn label(&self) -> String {
        format!("p_{}{}", self.electronic.label(), self.k)
    }
}

impl std::fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}⟩", self.electronic.label(), self.k)
    }
}

impl std::str::FromStr for BasisIndex {
    type Err = Error;

    /// Parses `g1`, `e0`, `|g,1>` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !matches!(c, '|' | '>' | '⟩' | ',' | ' ')).collect();
        let mut chars = cleaned.chars();
        let electronic = match chars.next() {
            Some('g') | Some('G') => Electronic::G,
            Some('e') | Some('E') => Electronic::E,
            _ => return Err(Error::Usage(format!("cannot parse basis state '{s}'"))),
        };
        let k = chars.as_str().parse().map_err(|_| Error::Usage(format!("cannot parse basis state '{s}'")))?;
        Ok(Self { electronic, k })
    }
}

/// Truncation of the oscillator to `d` levels, `buffer` of which are guard
/// levels monitored for leakage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    d: usize,
    buffer: usize,
}

impl SpaceConfig {
    pub fn new(d: usize, buffer: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Config(format!("need at least 2 oscillator levels, got d={d}")));
        }
        if buffer > d - 1 {
            return Err(Error::Config(format!("buffer {buffer} exceeds d-1 = {}", d - 1)));
        }
        Ok(Self { d, buffer })
    }

    /// Space for dynamics started in `|g,k⟩` or `|e,k-1⟩`.
    ///
    /// Off-resonant carrier and blue-sideband steps populate levels up to
    /// `k + 2` at the percent and 1e-5 scale; `buffer` guard levels sit above.
    pub fn for_initial(k: usize, buffer: usize) -> Result<Self> {
        Self::new(k + 3 + buffer, buffer)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn buffer(&self) -> usize {
        self.buffer
    }

    /// Total matrix dimension, `2d`.
    pub fn dim(&self) -> usize {
        2 * self.d
    }

    pub fn flat_index(&self, state: BasisIndex) -> Result<usize> {
        if state.k >= self.d {
            return Err(Error::Index(format!("oscillator level {} outside 0..{}", state.k, self.d)));
        }
        Ok(2 * state.k + state.electronic.offset())
    }

    pub fn basis_index(&self, flat: usize) -> Result<BasisIndex> {
        if flat >= self.dim() {
            return Err(Error::Index(format!("flat index {flat} outside 0..{}", self.dim())));
        }
        let electronic = if flat.is_multiple_of(2) { Electronic::G } else { Electronic::E };
        Ok(BasisIndex { electronic, k: flat / 2 })
    }

    /// All basis states in flat order.
    pub fn states(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        (0..self.dim()).map(move |i| self.basis_index(i).unwrap())
    }

    /// Whether a flat index lies in the guard band (top `buffer` levels).
    pub fn in_guard_band(&self, flat: usize) -> bool {
        flat / 2 >= self.d - self.buffer
    }
}

/// Convenience wrapper matching the free-function form.
pub fn flat_index(electronic: Electronic, k: usize, cfg: &SpaceConfig) -> Result<usize> {
    cfg.flat_index(BasisIndex { electronic, k })
}

/// The elementary operators on a truncated space.
#[derive(Clone, Debug)]
pub struct Operators {
    pub cfg: SpaceConfig,
    pub a: Operator,
    pub a_dag: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
    pub sigma_z: Operator,
    pub identity: Operator,
}

impl Operators {
    pub fn dim(&self) -> usize {
        self.cfg.dim()
    }
}

pub fn build_operators(cfg: SpaceConfig) -> Operators {
    let dim = cfg.dim();
    let d = cfg.d();
    let mut a = Operator::zeros(dim, dim);
    let mut sigma_plus = Operator::zeros(dim, dim);
    let mut sigma_z = Operator::zeros(dim, dim);
    for k in 0..d {
        let (g, e) = (2 * k, 2 * k + 1);
        sigma_plus[(e, g)] = C64::new(1.0, 0.0);
        sigma_z[(g, g)] = C64::new(-1.0, 0.0);
        sigma_z[(e, e)] = C64::new(1.0, 0.0);
        if k >= 1 {
            let amp = C64::new((k as f64).sqrt(), 0.0);
            a[(2 * (k - 1), g)] = amp;
            a[(2 * (k - 1) + 1, e)] = amp;
        }
    }
    Operators {
        cfg,
        a_dag: a.adjoint(),
        a,
        sigma_minus: sigma_plus.adjoint(),
        sigma_plus,
        sigma_z,
        identity: Operator::identity(dim, dim),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commutator(x: &Operator, y: &Operator) -> Operator {
        x * y - y * x
    }

    fn nonzeros(m: &Operator) -> usize {
        m.iter().filter(|z| z.norm() != 0.0).count()
    }

    #[test]
    fn rejects_small_spaces() {
        assert!(SpaceConfig::new(1, 0).is_err());
        assert!(SpaceConfig::new(3, 3).is_err());
        assert!(SpaceConfig::new(3, 2).is_ok());
    }

    #[test]
    fn flat_index_examples() {
        let cfg = SpaceConfig::new(4, 0).unwrap();
        assert_eq!(flat_index(Electronic::G, 0, &cfg).unwrap(), 0);
        assert_eq!(flat_index(Electronic::E, 0, &cfg).unwrap(), 1);
        assert_eq!(flat_index(Electronic::G, 1, &cfg).unwrap(), 2);
        assert!(flat_index(Electronic::G, 4, &cfg).is_err());
        assert!(cfg.basis_index(8).is_err());
    }

    #[test]
    fn flat_index_is_bijective() {
        for d in 2..12 {
            let cfg = SpaceConfig::new(d, 0).unwrap();
            for i in 0..cfg.dim() {
                let s = cfg.basis_index(i).unwrap();
                assert_eq!(cfg.flat_index(s).unwrap(), i);
            }
        }
    }

    #[test]
    fn ladder_operator_entries() {
        let ops = build_operators(SpaceConfig::new(3, 0).unwrap());
        assert_eq!(nonzeros(&ops.a), 4);
        assert_eq!(ops.a[(0, 2)], C64::new(1.0, 0.0));
        assert_eq!(ops.a[(1, 3)], C64::new(1.0, 0.0));
        assert_eq!(ops.a[(2, 4)], C64::new(2f64.sqrt(), 0.0));
        assert_eq!(ops.a[(3, 5)], C64::new(2f64.sqrt(), 0.0));
        assert_eq!(ops.a_dag, ops.a.adjoint());
    }

    #[test]
    fn pauli_algebra() {
        let ops = build_operators(SpaceConfig::new(2, 0).unwrap());
        let anti = &ops.sigma_plus * &ops.sigma_minus + &ops.sigma_minus * &ops.sigma_plus;
        assert_eq!(anti, ops.identity);
        assert_eq!(nonzeros(&ops.sigma_plus), 2);
        assert_eq!(commutator(&ops.sigma_plus, &ops.sigma_minus), ops.sigma_z);
    }

    #[test]
    fn truncated_commutator() {
        let d = 8;
        let ops = build_operators(SpaceConfig::new(d, 0).unwrap());
        let c = commutator(&ops.a, &ops.a_dag);
        for i in 0..2 * d {
            for j in 0..2 * d {
                let expected = if i != j {
                    0.0
                } else if i / 2 < d - 1 {
                    1.0
                } else {
                    1.0 - d as f64
                };
                assert!((c[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn parses_basis_labels() {
        assert_eq!("g1".parse::<BasisIndex>().unwrap(), BasisIndex::g(1));
        assert_eq!("|e,0>".parse::<BasisIndex>().unwrap(), BasisIndex::e(0));
        assert!("x1".parse::<BasisIndex>().is_err());
        assert_eq!(BasisIndex::g(12).label(), "p_g12");
    }

    #[test]
    fn guard_band() {
        let cfg = SpaceConfig::for_initial(1, 8).unwrap();
        assert_eq!(cfg.d(), 12);
        assert!(!cfg.in_guard_band(2 * 3 + 1));
        assert!(cfg.in_guard_band(2 * 4));
    }
}
