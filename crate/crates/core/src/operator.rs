//! Complex matrices tagged with the basis they act on.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Identifies the Hilbert space an operator or state lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisTag {
    /// Truncated 2D oscillator, all labels with `N <= n_max`.
    Trap { n_max: usize },
    /// Circular-state ladder starting at `m_base`.
    Internal { m_base: u32, levels: usize },
    /// Internal-major tensor product of a ladder and a trap basis.
    Composite {
        m_base: u32,
        levels: usize,
        n_max: usize,
    },
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::Trap { n_max } => trap_dim(n_max),
            BasisTag::Internal { levels, .. } => levels,
            BasisTag::Composite { levels, n_max, .. } => levels * trap_dim(n_max),
        }
    }

    pub fn tensor(internal: BasisTag, trap: BasisTag) -> Result<BasisTag> {
        match (internal, trap) {
            (BasisTag::Internal { m_base, levels }, BasisTag::Trap { n_max }) => {
                Ok(BasisTag::Composite {
                    m_base,
                    levels,
                    n_max,
                })
            }
            (left, right) => Err(Error::BasisMismatch { left, right }),
        }
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Trap { n_max } => write!(f, "trap(n_max={n_max})"),
            BasisTag::Internal { m_base, levels } => {
                write!(f, "internal(m_base={m_base}, levels={levels})")
            }
            BasisTag::Composite {
                m_base,
                levels,
                n_max,
            } => write!(
                f,
                "composite(m_base={m_base}, levels={levels}, n_max={n_max})"
            ),
        }
    }
}

pub(crate) fn trap_dim(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 2) / 2
}

/// A square complex matrix acting on a declared basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisTag,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(basis: BasisTag, entries: DMatrix<C64>) -> Result<Self> {
        let dim = basis.dim();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix on {basis} (dimension {dim})",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn zeros(basis: BasisTag) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(basis: BasisTag) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(basis: BasisTag, diag: impl IntoIterator<Item = f64>) -> Result<Self> {
        let diag: Vec<C64> = diag.into_iter().map(C64::from).collect();
        Self::new(
            basis,
            DMatrix::from_diagonal(&DVector::from_vec(diag)),
        )
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[(row, col)] = value;
    }

    fn check(&self, other: &OperatorMatrix) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                left: self.basis,
                right: other.basis,
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            entries: self.entries.adjoint(),
        }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries * &other.entries,
        })
    }

    pub fn plus(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn minus(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            entries: &self.entries * factor,
        }
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.compose(other)?.minus(&other.compose(self)?)
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::identity(self.basis);
        for _ in 0..exponent {
            out.entries = &out.entries * &self.entries;
        }
        out
    }

    /// Kronecker product with `self` as the outer (major) factor.
    pub fn kron(&self, inner: &OperatorMatrix) -> Result<Self> {
        let basis = BasisTag::tensor(self.basis, inner.basis)?;
        Ok(Self {
            basis,
            entries: self.entries.kronecker(&inner.entries),
        })
    }

    pub fn apply(&self, vector: &DVector<C64>) -> Result<DVector<C64>> {
        if vector.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector of length {} on {}",
                vector.len(),
                self.basis
            )));
        }
        Ok(&self.entries * vector)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Nonzero entries as `[row, col, re, im]`, row-major.
    pub fn sparse_entries(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for row in 0..self.dim() {
            for col in 0..self.dim() {
                let z = self.entries[(row, col)];
                if z != C64::new(0.0, 0.0) {
                    out.push((row, col, z.re, z.im));
                }
            }
        }
        out
    }

    pub fn dump(&self, name: &str) -> OperatorDump {
        OperatorDump {
            name: name.to_string(),
            basis: self.basis,
            dim: self.dim(),
            entries: self.sparse_entries(),
        }
    }
}

/// Serializable sparse view of an operator for debugging.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorDump {
    pub name: String,
    pub basis: BasisTag,
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}
