//! Matrix realizations of a Lie algebra and the drift flow on exponential images.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraVector, LieAlgebra};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// How the algebra bracket relates to the matrix commutator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Basis elements are right-invariant fields `g -> M g`; their bracket is
    /// the negated commutator.
    #[default]
    RightInvariant,
    /// The bracket is the matrix commutator `MN - NM`.
    Commutator,
}

impl Convention {
    /// `[e_i, e_j] = sign * (M_i M_j - M_j M_i)`.
    pub fn sign(self) -> f64 {
        match self {
            Convention::RightInvariant => -1.0,
            Convention::Commutator => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    NilpotentSimplyConnected,
    #[default]
    MatrixGeneric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRealization {
    pub convention: Convention,
    pub matrices: Vec<DMatrix<f64>>,
    pub kind: GroupKind,
}

impl MatrixRealization {
    pub fn new(convention: Convention, matrices: Vec<DMatrix<f64>>, kind: GroupKind) -> Result<Self> {
        let n = matrices
            .first()
            .ok_or_else(|| Error::InvalidInput("realization needs at least one matrix".into()))?
            .nrows();
        for m in &matrices {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(Self {
            convention,
            matrices,
            kind,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// `sum_i v_i M_i`.
    pub fn matrix_of(&self, v: &AlgebraVector) -> Result<DMatrix<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let n = self.ambient_dim();
        Ok(self
            .matrices
            .iter()
            .zip(v.iter())
            .fold(DMatrix::zeros(n, n), |acc, (m, c)| acc + m * *c))
    }

    pub fn exp(&self, v: &AlgebraVector) -> Result<DMatrix<f64>> {
        Ok(self.matrix_of(v)?.exp())
    }

    pub fn identity(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        DMatrix::identity(n, n)
    }

    /// Matrix of the group element `exp(S(X, Y))` given the matrices of
    /// `exp X` and `exp Y`. Under the right-invariant convention the algebra
    /// bracket is reversed, so the matrix factors multiply in reverse order.
    pub fn product(&self, gx: &DMatrix<f64>, gy: &DMatrix<f64>) -> DMatrix<f64> {
        match self.convention {
            Convention::Commutator => gx * gy,
            Convention::RightInvariant => gy * gx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationReport {
    pub max_residual: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub passed: bool,
}

/// Checks `sign * [M_i, M_j] = sum_k c_ij^k M_k` for all pairs.
pub fn realization_check(
    alg: &LieAlgebra,
    r: &MatrixRealization,
    tol: &Tolerances,
) -> Result<RealizationReport> {
    if r.dim() != alg.dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.dim(),
            found: r.dim(),
        });
    }
    let sign = r.convention.sign();
    let mut max_residual = 0.0f64;
    let mut worst_pair = None;
    for i in 0..alg.dim() {
        for j in i + 1..alg.dim() {
            let (mi, mj) = (&r.matrices[i], &r.matrices[j]);
            let comm = (mi * mj - mj * mi) * sign;
            let expected = r.matrix_of(&alg.bracket_unchecked(&alg.basis_vector(i), &alg.basis_vector(j)))?;
            let res = (comm - expected).amax();
            if res > max_residual {
                max_residual = res;
                worst_pair = Some((i, j));
            }
        }
    }
    let scale = r.matrices.iter().map(|m| m.amax()).fold(1.0, f64::max);
    Ok(RealizationReport {
        max_residual,
        worst_pair,
        passed: max_residual <= tol.zero * scale * scale,
    })
}

/// Drift flow on an exponential image: `phi_t(exp Y) = exp(e^{tD} Y)`.
pub fn flow_on_group(
    r: &MatrixRealization,
    d: &Derivation,
    t: f64,
    y: &AlgebraVector,
) -> Result<DMatrix<f64>> {
    if d.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            found: d.dim(),
        });
    }
    r.exp(&(d.exp(t) * y))
}
