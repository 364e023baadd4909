//! Finite-dimensional real Lie algebras given by structure constants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hstack, numerical_rank, orthonormal_span};
use crate::tolerance::Tolerances;

/// Coordinates of an algebra element in the fixed basis.
pub type AlgebraVector = DVector<f64>;

/// A real Lie algebra: `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    constants: Vec<f64>,
    labels: Vec<String>,
}

/// A linear subspace of an algebra, stored as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    /// Span of the given columns, rank-reduced.
    pub fn span(columns: &DMatrix<f64>, tol: f64) -> Self {
        Self {
            basis: orthonormal_span(columns, tol),
        }
    }

    pub fn span_of(vectors: &[AlgebraVector], ambient: usize, tol: f64) -> Self {
        Self::span(&crate::linalg::columns_to_matrix(vectors, ambient), tol)
    }

    /// Wrap a basis that is already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<AlgebraVector> {
        self.basis.column_iter().map(|c| c.clone_owned()).collect()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Distance from `v` to this subspace.
    pub fn residual(&self, v: &AlgebraVector) -> f64 {
        crate::linalg::residual_outside(&self.basis, v)
    }

    pub fn contains(&self, v: &AlgebraVector, tol: f64) -> bool {
        self.residual(v) <= tol * v.norm().max(1.0)
    }

    /// Sum of two subspaces.
    pub fn join(&self, other: &Subspace, tol: f64) -> Subspace {
        let m = hstack(&[&self.basis, &other.basis], self.ambient_dim());
        Self::span(&m, tol)
    }
}

/// Antisymmetry and Jacobi residuals of a set of structure constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_antisymmetry: f64,
    pub max_jacobi: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureClass {
    Abelian,
    Nilpotent,
    Solvable,
    NonSolvable,
}

impl StructureClass {
    pub fn is_solvable(self) -> bool {
        !matches!(self, StructureClass::NonSolvable)
    }

    pub fn is_nilpotent(self) -> bool {
        matches!(self, StructureClass::Abelian | StructureClass::Nilpotent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: StructureClass,
    pub derived_dims: Vec<usize>,
    pub lower_central_dims: Vec<usize>,
    /// Nilpotency class (length of the lower central series to zero), if nilpotent.
    pub nilpotency_class: Option<usize>,
    /// Derived length, if solvable.
    pub derived_length: Option<usize>,
}

impl ClassReport {
    pub fn is_solvable(&self) -> bool {
        self.class.is_solvable()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.class.is_nilpotent()
    }
}

impl LieAlgebra {
    /// Build from a flat `dim^3` array indexed `(i * dim + j) * dim + k`.
    /// No Lie-algebra axioms are checked here; see [`LieAlgebra::validate`].
    pub fn new(dim: usize, constants: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("algebra dimension must be positive".into()));
        }
        if constants.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: constants.len(),
            });
        }
        Ok(Self {
            dim,
            constants,
            labels: default_labels(dim),
        })
    }

    /// Build from the listed brackets `[e_i, e_j]` with `i != j`; the
    /// antisymmetric partner is filled in and unlisted pairs are zero.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        let mut alg = Self::new(dim, vec![0.0; dim * dim * dim])?;
        for (i, j, coeffs) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim {
                return Err(Error::InvalidInput(format!(
                    "bracket index ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            if coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: coeffs.len(),
                });
            }
            if i == j {
                if coeffs.iter().any(|&c| c != 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "bracket [e_{i}, e_{i}] must vanish"
                    )));
                }
                continue;
            }
            for (k, &c) in coeffs.iter().enumerate() {
                let idx = alg.index(i, j, k);
                let rev = alg.index(j, i, k);
                alg.constants[idx] = c;
                alg.constants[rev] = -c;
            }
        }
        Ok(alg)
    }

    /// Abelian algebra of the given dimension.
    pub fn abelian(dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim * dim * dim])
    }

    /// Structure constants of the span of `matrices` under `sign * (AB - BA)`.
    /// The matrices must be linearly independent and closed under the commutator.
    pub fn from_matrices(matrices: &[DMatrix<f64>], sign: f64, tol: &Tolerances) -> Result<Self> {
        let dim = matrices.len();
        if dim == 0 {
            return Err(Error::InvalidInput("no basis matrices".into()));
        }
        let n = matrices[0].nrows();
        let mut flat = DMatrix::zeros(n * n, dim);
        for (k, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows(),
                });
            }
            flat.set_column(k, &DVector::from_iterator(n * n, m.iter().copied()));
        }
        if numerical_rank(&flat, tol.rank) != dim {
            return Err(Error::InvalidInput("basis matrices are linearly dependent".into()));
        }
        let svd = flat.clone().svd(true, true);
        let mut constants = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let comm = (&matrices[i] * &matrices[j] - &matrices[j] * &matrices[i]) * sign;
                let v = DVector::from_iterator(n * n, comm.iter().copied());
                let coeffs = svd
                    .solve(&v, 1e-14)
                    .map_err(|e| Error::InvalidInput(e.to_string()))?;
                if (&flat * &coeffs - &v).norm() > tol.zero * v.norm().max(1.0) {
                    return Err(Error::InvalidInput(
                        "basis matrices are not closed under the commutator".into(),
                    ));
                }
                for k in 0..dim {
                    constants[(i * dim + j) * dim + k] = coeffs[k];
                }
            }
        }
        Self::new(dim, constants)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[self.index(i, j, k)]
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Largest absolute structure constant.
    pub fn scale(&self) -> f64 {
        self.constants.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn basis_vector(&self, i: usize) -> AlgebraVector {
        let mut v = DVector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    pub fn zero_vector(&self) -> AlgebraVector {
        DVector::zeros(self.dim)
    }

    pub fn check_vector(&self, v: &AlgebraVector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `[a, b]`.
    pub fn bracket(&self, a: &AlgebraVector, b: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        Ok(self.bracket_unchecked(a, b))
    }

    pub(crate) fn bracket_unchecked(&self, a: &AlgebraVector, b: &AlgebraVector) -> AlgebraVector {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = a[i] * b[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.constants[base + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad(w)`: column `j` holds `[w, e_j]`.
    pub fn ad(&self, w: &AlgebraVector) -> Result<DMatrix<f64>> {
        self.check_vector(w)?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if w[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += w[i] * self.constant(i, j, k);
                }
            }
        }
        Ok(m)
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let n = self.dim;
        let mut anti: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    anti = anti.max((self.constant(i, j, k) + self.constant(j, i, k)).abs());
                }
            }
        }
        let mut jac: f64 = 0.0;
        let e: Vec<_> = (0..n).map(|i| self.basis_vector(i)).collect();
        let br: Vec<Vec<AlgebraVector>> = (0..n)
            .map(|i| (0..n).map(|j| self.bracket_unchecked(&e[i], &e[j])).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = self.bracket_unchecked(&br[i][j], &e[k])
                        + self.bracket_unchecked(&br[j][k], &e[i])
                        + self.bracket_unchecked(&br[k][i], &e[j]);
                    jac = jac.max(r.amax());
                }
            }
        }
        ValidationReport {
            max_antisymmetry: anti,
            max_jacobi: jac,
            passed: anti <= tol.zero && jac <= tol.zero,
        }
    }

    /// Fails with [`Error::InvalidAlgebra`] unless the report passes.
    pub fn ensure_valid(&self, tol: &Tolerances) -> Result<()> {
        let r = self.validate(tol);
        if r.passed {
            Ok(())
        } else {
            Err(Error::InvalidAlgebra {
                antisymmetry: r.max_antisymmetry,
                jacobi: r.max_jacobi,
            })
        }
    }

    /// `[U, V]` as a subspace.
    pub fn bracket_subspace(&self, u: &Subspace, v: &Subspace, tol: &Tolerances) -> Subspace {
        let mut cols = Vec::with_capacity(u.dim() * v.dim());
        for a in u.basis().column_iter() {
            let a = a.clone_owned();
            for b in v.basis().column_iter() {
                cols.push(self.bracket_unchecked(&a, &b.clone_owned()));
            }
        }
        Subspace::span_of(&cols, self.dim, tol.rank)
    }

    /// `g^(0) = g`, `g^(i) = [g^(i-1), g^(i-1)]`, stopping at zero or when the
    /// dimension repeats (the repeated term is included).
    pub fn derived_series(&self, tol: &Tolerances) -> Vec<Subspace> {
        self.series(|cur| self.bracket_subspace(cur, cur, tol))
    }

    /// `n_1 = g`, `n_{i+1} = [g, n_i]`, same stopping rule as the derived series.
    pub fn lower_central_series(&self, tol: &Tolerances) -> Vec<Subspace> {
        let g = Subspace::full(self.dim);
        self.series(|cur| self.bracket_subspace(&g, cur, tol))
    }

    fn series(&self, step: impl Fn(&Subspace) -> Subspace) -> Vec<Subspace> {
        let mut out = vec![Subspace::full(self.dim)];
        loop {
            let cur = out.last().expect("series is nonempty");
            if cur.dim() == 0 {
                break;
            }
            let next = step(cur);
            let repeated = next.dim() == cur.dim();
            out.push(next);
            if repeated {
                break;
            }
        }
        out
    }

    pub fn classify(&self, tol: &Tolerances) -> ClassReport {
        let derived: Vec<usize> = self.derived_series(tol).iter().map(Subspace::dim).collect();
        let lower: Vec<usize> = self
            .lower_central_series(tol)
            .iter()
            .map(Subspace::dim)
            .collect();
        let solvable = *derived.last().unwrap() == 0;
        let nilpotent = *lower.last().unwrap() == 0;
        let abelian = derived.get(1).copied() == Some(0);
        let class = if abelian {
            StructureClass::Abelian
        } else if nilpotent {
            StructureClass::Nilpotent
        } else if solvable {
            StructureClass::Solvable
        } else {
            StructureClass::NonSolvable
        };
        ClassReport {
            class,
            nilpotency_class: nilpotent.then(|| lower.len() - 1),
            derived_length: solvable.then(|| derived.len() - 1),
            derived_dims: derived,
            lower_central_dims: lower,
        }
    }

    /// Smallest subspace containing `seeds` that is closed under the bracket
    /// and under every linear map in `maps`.
    pub fn subalgebra_closure(
        &self,
        seeds: &[AlgebraVector],
        maps: &[&DMatrix<f64>],
        tol: &Tolerances,
    ) -> Result<Subspace> {
        if seeds.is_empty() {
            return Err(Error::InvalidInput("closure needs at least one seed".into()));
        }
        for s in seeds {
            self.check_vector(s)?;
        }
        for m in maps {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: m.nrows(),
                });
            }
        }
        let mut current = Subspace::span_of(seeds, self.dim, tol.rank);
        loop {
            let basis = current.basis().clone();
            let mut blocks = vec![basis.clone()];
            for m in maps {
                blocks.push(*m * &basis);
            }
            blocks.push(self.bracket_subspace(&current, &current, tol).basis().clone());
            let refs: Vec<&DMatrix<f64>> = blocks.iter().collect();
            let next = Subspace::span(&hstack(&refs, self.dim), tol.rank);
            if next.dim() == current.dim() {
                return Ok(current);
            }
            current = next;
        }
    }

    /// Structure constants in the basis `f_a = sum_i p[(i, a)] e_i`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<LieAlgebra> {
        let n = self.dim;
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.nrows(),
            });
        }
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("basis change is singular".into()))?;
        let cols: Vec<AlgebraVector> = (0..n).map(|a| p.column(a).clone_owned()).collect();
        let mut constants = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let coeffs = &pinv * self.bracket_unchecked(&cols[a], &cols[b]);
                for c in 0..n {
                    constants[(a * n + b) * n + c] = coeffs[c];
                }
            }
        }
        Ok(LieAlgebra {
            dim: n,
            constants,
            labels: self.labels.clone(),
        })
    }
}

fn default_labels(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("e{i}")).collect()
}
