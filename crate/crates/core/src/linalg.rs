//! Dense helpers: numerical rank, orthonormal spans, principal angles and an
//! ordered real Schur form.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Number of singular values above `tol * max(sigma_max, 1)`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let cutoff = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal basis (as columns) of the column span of `m`.
pub fn orthonormal_span(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cutoff = tol * svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Stack column blocks side by side.
pub fn hstack(blocks: &[&DMatrix<f64>], nrows: usize) -> DMatrix<f64> {
    let ncols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), nrows);
        for j in 0..b.ncols() {
            out.set_column(c, &b.column(j));
            c += 1;
        }
    }
    out
}

pub fn columns_to_matrix(cols: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Distance from `v` to the span of the orthonormal columns of `q`.
pub fn residual_outside(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    let proj = q * (q.transpose() * v);
    (v - proj).norm()
}

/// Largest principal angle (radians) between two subspaces given by
/// orthonormal bases. Returns `PI/2` when the dimensions differ.
pub fn subspace_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    // sin of the largest angle is the 2-norm of the part of b outside span(a).
    let outside = b - a * (a.transpose() * b);
    let s = outside.singular_values().max();
    s.clamp(0.0, 1.0).asin()
}

/// Real Schur form `M = Z T Z^T` with explicit 1x1 / 2x2 diagonal blocks.
/// 2x2 blocks always carry a complex-conjugate eigenvalue pair.
#[derive(Debug, Clone)]
pub struct RealSchur {
    z: DMatrix<f64>,
    t: DMatrix<f64>,
    blocks: Vec<usize>,
}

impl RealSchur {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        if n == 0 {
            return Ok(Self {
                z: DMatrix::zeros(0, 0),
                t: DMatrix::zeros(0, 0),
                blocks: Vec::new(),
            });
        }
        let schur =
            Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10)).ok_or(Error::SchurFailed)?;
        let (z, t) = schur.unpack();
        let mut s = Self {
            z,
            t,
            blocks: Vec::new(),
        };
        s.delimit_blocks()?;
        Ok(s)
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn t(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// Sizes of the diagonal blocks, top-left to bottom-right.
    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_eigenvalues(&self) -> Vec<Vec<Complex<f64>>> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut s = 0;
        for &p in &self.blocks {
            if p == 1 {
                out.push(vec![Complex::new(self.t[(s, s)], 0.0)]);
            } else {
                let (a, b, c, d) = (
                    self.t[(s, s)],
                    self.t[(s, s + 1)],
                    self.t[(s + 1, s)],
                    self.t[(s + 1, s + 1)],
                );
                let half_tr = 0.5 * (a + d);
                let disc = 0.25 * (a - d) * (a - d) + b * c;
                let im = (-disc).max(0.0).sqrt();
                out.push(vec![Complex::new(half_tr, im), Complex::new(half_tr, -im)]);
            }
            s += p;
        }
        out
    }

    fn delimit_blocks(&mut self) -> Result<()> {
        let n = self.t.nrows();
        let scale = self.t.amax().max(f64::MIN_POSITIVE);
        let small = 4.0 * f64::EPSILON * scale;
        for i in 0..n.saturating_sub(1) {
            if self.t[(i + 1, i)].abs() <= small {
                self.t[(i + 1, i)] = 0.0;
            }
            for k in (i + 2)..n {
                self.t[(k, i)] = 0.0;
            }
        }
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && self.t[(i + 1, i)] != 0.0 {
                if i + 2 < n && self.t[(i + 2, i + 1)] != 0.0 {
                    return Err(Error::SchurFailed);
                }
                if self.split_real_pair(i) {
                    blocks.push(1);
                    i += 1;
                } else {
                    blocks.push(2);
                    i += 2;
                }
            } else {
                blocks.push(1);
                i += 1;
            }
        }
        self.blocks = blocks;
        Ok(())
    }

    /// Triangularize a 2x2 block at `s` if its eigenvalues are real.
    fn split_real_pair(&mut self, s: usize) -> bool {
        let (a, b, c, d) = (
            self.t[(s, s)],
            self.t[(s, s + 1)],
            self.t[(s + 1, s)],
            self.t[(s + 1, s + 1)],
        );
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc < 0.0 {
            return false;
        }
        let lambda = 0.5 * (a + d) + disc.sqrt().copysign(0.5 * (a + d));
        let v1 = DVector::from_vec(vec![b, lambda - a]);
        let v2 = DVector::from_vec(vec![lambda - d, c]);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let nv = v.norm();
        if nv == 0.0 {
            return false;
        }
        let (cs, sn) = (v[0] / nv, v[1] / nv);
        let g = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
        self.apply_window(s, &g);
        self.t[(s + 1, s)] = 0.0;
        true
    }

    /// `T <- Q^T T Q` and `Z <- Z Q` for an orthogonal `Q` acting on rows/cols `s..s+k`.
    fn apply_window(&mut self, s: usize, q: &DMatrix<f64>) {
        let k = q.nrows();
        let n = self.t.nrows();
        let rows = self.t.rows(s, k).clone_owned();
        self.t.rows_mut(s, k).copy_from(&(q.transpose() * rows));
        let cols = self.t.columns(s, k).clone_owned();
        self.t.columns_mut(s, k).copy_from(&(cols * q));
        let zc = self.z.columns(s, k).clone_owned();
        self.z.columns_mut(s, k).copy_from(&(zc * q));
        debug_assert_eq!(self.t.ncols(), n);
    }

    /// Swap adjacent diagonal blocks `idx` and `idx + 1`.
    fn swap_blocks(&mut self, idx: usize) -> Result<()> {
        let s: usize = self.blocks[..idx].iter().sum();
        let p = self.blocks[idx];
        let q = self.blocks[idx + 1];
        let t11 = self.t.view((s, s), (p, p)).clone_owned();
        let t22 = self.t.view((s + p, s + p), (q, q)).clone_owned();
        let t12 = self.t.view((s, s + p), (p, q)).clone_owned();

        // Sylvester equation T11 X - X T22 = T12, column-major unknowns.
        let nk = p * q;
        let mut k = DMatrix::zeros(nk, nk);
        let mut rhs = DVector::zeros(nk);
        for b in 0..q {
            for a in 0..p {
                let row = a + b * p;
                rhs[row] = t12[(a, b)];
                for c in 0..p {
                    k[(row, c + b * p)] += t11[(a, c)];
                }
                for d in 0..q {
                    k[(row, a + d * p)] -= t22[(d, b)];
                }
            }
        }
        let x = k.lu().solve(&rhs).ok_or(Error::SchurFailed)?;

        // Orthogonal basis whose leading q columns span [-X; I].
        let w = p + q;
        let mut m = DMatrix::zeros(w, w);
        for b in 0..q {
            for a in 0..p {
                m[(a, b)] = -x[a + b * p];
            }
            m[(p + b, b)] = 1.0;
        }
        for j in q..w {
            m[(j - q, j)] = 1.0;
        }
        let qm = m.qr().q();
        self.apply_window(s, &qm);
        for i in (s + q)..(s + w) {
            for j in s..(s + q) {
                self.t[(i, j)] = 0.0;
            }
        }
        self.blocks.swap(idx, idx + 1);
        Ok(())
    }

    /// Stable partition of the diagonal blocks: blocks whose label satisfies
    /// `select` move to the top-left. `labels` is permuted alongside.
    /// Returns the dimension of the selected invariant subspace, spanned by
    /// the leading columns of `z()`.
    pub fn reorder<L>(&mut self, labels: &mut [L], select: impl Fn(&L) -> bool) -> Result<usize> {
        assert_eq!(labels.len(), self.blocks.len());
        let nb = self.blocks.len();
        let mut placed = 0;
        for i in 0..nb {
            if select(&labels[i]) {
                let mut j = i;
                while j > placed {
                    self.swap_blocks(j - 1)?;
                    labels.swap(j - 1, j);
                    j -= 1;
                }
                placed += 1;
            }
        }
        Ok(self.blocks[..placed].iter().sum())
    }
}
