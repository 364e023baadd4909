//! Derivations of a Lie algebra and the splitting `g = g+ (+) g- (+) g0`
//! into sums of generalized eigenspaces grouped by the sign of the real part.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::algebra::{AlgebraVector, LieAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::linalg::RealSchur;
use crate::tolerance::Tolerances;

/// A linear map `D` on the algebra satisfying `D[X,Y] = [DX,Y] + [X,DY]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    matrix: DMatrix<f64>,
    leibniz_residual: f64,
}

/// Worst violation of the Leibniz rule over basis pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeibnizResidual {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

pub fn leibniz_residual(alg: &LieAlgebra, m: &DMatrix<f64>) -> Result<LeibnizResidual> {
    let n = alg.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    let e: Vec<AlgebraVector> = (0..n).map(|i| alg.basis_vector(i)).collect();
    let de: Vec<AlgebraVector> = (0..n).map(|i| m.column(i).clone_owned()).collect();
    let mut worst = LeibnizResidual {
        i: 0,
        j: 0,
        residual: 0.0,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let lhs = m * alg.bracket_unchecked(&e[i], &e[j]);
            let rhs = alg.bracket_unchecked(&de[i], &e[j]) + alg.bracket_unchecked(&e[i], &de[j]);
            let r = (lhs - rhs).amax();
            if r > worst.residual {
                worst = LeibnizResidual { i, j, residual: r };
            }
        }
    }
    Ok(worst)
}

impl Derivation {
    /// Accept `m` as a derivation of `alg` if the Leibniz residual is within `tol.zero`.
    pub fn verify(alg: &LieAlgebra, m: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let worst = leibniz_residual(alg, &m)?;
        if worst.residual > tol.zero * m.amax().max(1.0) {
            return Err(Error::LeibnizViolation {
                i: worst.i,
                j: worst.j,
                residual: worst.residual,
            });
        }
        Ok(Self {
            matrix: m,
            leibniz_residual: worst.residual,
        })
    }

    /// `factor * ad(w)`. Jacobi makes this a derivation, so no check is run.
    pub fn inner(alg: &LieAlgebra, w: &AlgebraVector, factor: f64) -> Result<Self> {
        Ok(Self {
            matrix: alg.ad(w)? * factor,
            leibniz_residual: 0.0,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            leibniz_residual: 0.0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn leibniz_residual(&self) -> f64 {
        self.leibniz_residual
    }

    pub fn apply(&self, v: &AlgebraVector) -> AlgebraVector {
        &self.matrix * v
    }

    /// The derivation of the time-reversed system.
    pub fn negated(&self) -> Self {
        Self {
            matrix: -&self.matrix,
            leibniz_residual: self.leibniz_residual,
        }
    }

    /// `P^-1 D P` for the basis change used by [`LieAlgebra::change_basis`].
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<Self> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("basis change is singular".into()))?;
        Ok(Self {
            matrix: &pinv * &self.matrix * p,
            leibniz_residual: self.leibniz_residual,
        })
    }

    /// `e^{tD}`, the differential at the identity of the drift flow.
    pub fn exp(&self, t: f64) -> DMatrix<f64> {
        if t == 0.0 {
            return DMatrix::identity(self.dim(), self.dim());
        }
        (&self.matrix * t).exp()
    }

    pub fn spectral_split(&self, tol: &Tolerances) -> Result<SpectralSplitting> {
        spectral_split(self, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralClass {
    Plus,
    Minus,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifiedEigenvalue {
    pub re: f64,
    pub im: f64,
    pub class: SpectralClass,
}

/// Real D-invariant subspaces for eigenvalues with positive, negative and
/// zero real part.
#[derive(Debug, Clone)]
pub struct SpectralSplitting {
    pub eigenvalues: Vec<ClassifiedEigenvalue>,
    pub plus: Subspace,
    pub minus: Subspace,
    pub zero: Subspace,
    /// Threshold on `|Re|` that was used.
    pub tau: f64,
    /// `|| (I - P) D P ||` for plus, minus, zero.
    pub invariance_residuals: [f64; 3],
    pub warnings: Vec<String>,
}

impl SpectralSplitting {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.plus.dim(), self.minus.dim(), self.zero.dim())
    }

    /// True when every eigenvalue has zero real part, i.e. `g = g0`.
    pub fn is_all_zero(&self) -> bool {
        self.plus.dim() == 0 && self.minus.dim() == 0
    }

    /// `g+ (+) g0`.
    pub fn plus_zero(&self, tol: f64) -> Subspace {
        self.plus.join(&self.zero, tol)
    }

    pub fn minus_zero(&self, tol: f64) -> Subspace {
        self.minus.join(&self.zero, tol)
    }

    /// Components of `w` along (g+, g-, g0) of the direct sum.
    pub fn decompose(&self, w: &AlgebraVector) -> Result<[AlgebraVector; 3]> {
        let n = w.len();
        let parts = [&self.plus, &self.minus, &self.zero];
        let refs: Vec<&DMatrix<f64>> = parts.iter().map(|s| s.basis()).collect();
        let basis = crate::linalg::hstack(&refs, n);
        let coeffs = basis
            .lu()
            .solve(w)
            .ok_or_else(|| Error::InvalidInput("splitting bases are not a direct sum".into()))?;
        let mut out = [
            AlgebraVector::zeros(n),
            AlgebraVector::zeros(n),
            AlgebraVector::zeros(n),
        ];
        let mut off = 0;
        for (k, s) in parts.iter().enumerate() {
            let d = s.dim();
            out[k] = s.basis() * coeffs.rows(off, d);
            off += d;
        }
        Ok(out)
    }
}

/// Eigenvalues closer than this fraction of `max(rho, 1)` are treated as one
/// cluster and classified by their mean, which stays accurate for perturbed
/// Jordan blocks where individual eigenvalues do not.
const CLUSTER_RADIUS: f64 = 1e-4;

pub fn spectral_split(d: &Derivation, tol: &Tolerances) -> Result<SpectralSplitting> {
    let n = d.dim();
    let schur = RealSchur::new(d.matrix())?;
    let per_block = schur.block_eigenvalues();
    let flat: Vec<(usize, Complex<f64>)> = per_block
        .iter()
        .enumerate()
        .flat_map(|(b, ev)| ev.iter().map(move |&z| (b, z)))
        .collect();

    let rho = flat.iter().fold(0.0f64, |m, (_, z)| m.max(z.norm()));
    let tau = tol.spectral_for(rho);
    let radius = CLUSTER_RADIUS * rho.max(1.0);

    // single-linkage clustering
    let m = flat.len();
    let mut cluster: Vec<usize> = (0..m).collect();
    fn root(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for a in 0..m {
        for b in (a + 1)..m {
            if (flat[a].1 - flat[b].1).norm() <= radius {
                let (ra, rb) = (root(&mut cluster, a), root(&mut cluster, b));
                cluster[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let roots: Vec<usize> = (0..m).map(|i| root(&mut cluster, i)).collect();

    let classify = |re: f64| {
        if re > tau {
            SpectralClass::Plus
        } else if re < -tau {
            SpectralClass::Minus
        } else {
            SpectralClass::Zero
        }
    };

    let mut warnings = Vec::new();
    let mut refined = vec![Complex::new(0.0, 0.0); m];
    let mut classes = vec![SpectralClass::Zero; m];
    for r in 0..m {
        let members: Vec<usize> = (0..m).filter(|&i| roots[i] == r).collect();
        if members.is_empty() {
            continue;
        }
        let mean = members.iter().map(|&i| flat[i].1).sum::<Complex<f64>>() / members.len() as f64;
        let class = classify(mean.re);
        if members.iter().any(|&i| classify(flat[i].1.re) != class) {
            warnings.push(format!(
                "eigenvalue cluster near {:.3e}{:+.3e}i straddles the real-part threshold {tau:.3e}",
                mean.re, mean.im
            ));
        }
        if mean.re.abs() >= 0.1 * tau && mean.re.abs() <= 10.0 * tau {
            warnings.push(format!(
                "eigenvalue real part {:.3e} is within a factor 10 of the threshold {tau:.3e}",
                mean.re
            ));
        }
        for &i in &members {
            refined[i] = if members.len() > 1 { mean } else { flat[i].1 };
            classes[i] = class;
        }
    }

    let mut block_class: Vec<SpectralClass> = vec![SpectralClass::Zero; per_block.len()];
    for (idx, (b, _)) in flat.iter().enumerate() {
        block_class[*b] = classes[idx];
    }

    let extract = |target: SpectralClass| -> Result<Subspace> {
        let mut s = schur.clone();
        let mut labels = block_class.clone();
        let k = s.reorder(&mut labels, |c| *c == target)?;
        Ok(Subspace::from_orthonormal(s.z().columns(0, k).clone_owned()))
    };
    let plus = extract(SpectralClass::Plus)?;
    let minus = extract(SpectralClass::Minus)?;
    let zero = extract(SpectralClass::Zero)?;
    debug_assert_eq!(plus.dim() + minus.dim() + zero.dim(), n);

    let invariance = |s: &Subspace| -> f64 {
        if s.dim() == 0 {
            return 0.0;
        }
        let q = s.basis();
        let dq = d.matrix() * q;
        (&dq - q * (q.transpose() * &dq)).norm()
    };
    let invariance_residuals = [invariance(&plus), invariance(&minus), invariance(&zero)];

    let eigenvalues = refined
        .iter()
        .zip(&classes)
        .map(|(z, &class)| ClassifiedEigenvalue {
            re: z.re,
            im: z.im,
            class,
        })
        .collect();

    Ok(SpectralSplitting {
        eigenvalues,
        plus,
        minus,
        zero,
        tau,
        invariance_residuals,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradingEntry {
    pub inclusion: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradingReport {
    pub entries: Vec<GradingEntry>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Checks the coarse grading `[g+,g0] < g+`, `[g-,g0] < g-`, `[g0,g0] < g0`,
/// `[g+,g+] < g+`, `[g-,g-] < g-`.
pub fn grading_check(alg: &LieAlgebra, split: &SpectralSplitting, tol: &Tolerances) -> GradingReport {
    let (p, m, z) = (&split.plus, &split.minus, &split.zero);
    let cases: [(&'static str, &Subspace, &Subspace, &Subspace); 5] = [
        ("[g+, g0] in g+", p, z, p),
        ("[g-, g0] in g-", m, z, m),
        ("[g0, g0] in g0", z, z, z),
        ("[g+, g+] in g+", p, p, p),
        ("[g-, g-] in g-", m, m, m),
    ];
    let mut entries = Vec::with_capacity(cases.len());
    for (inclusion, a, b, target) in cases {
        let mut worst: f64 = 0.0;
        for x in a.basis().column_iter() {
            let x = x.clone_owned();
            for y in b.basis().column_iter() {
                let br = alg.bracket_unchecked(&x, &y.clone_owned());
                worst = worst.max(target.residual(&br));
            }
        }
        entries.push(GradingEntry {
            inclusion,
            residual: worst,
        });
    }
    let max_residual = entries.iter().fold(0.0f64, |m, e| m.max(e.residual));
    let bound = tol.rank * alg.scale().max(1.0);
    GradingReport {
        passed: max_residual <= bound,
        entries,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::*;
    use crate::linalg::subspace_angle;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn example1_d() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.])
    }

    fn line(xs: &[f64]) -> DMatrix<f64> {
        let v = DMatrix::from_column_slice(xs.len(), 1, xs);
        let n = v.norm();
        v / n
    }

    #[test]
    fn example_derivations_verify() {
        let h = heisenberg();
        assert!(Derivation::verify(&h, example1_d(), &tol()).is_ok());
        let a = affine();
        let d = DMatrix::from_row_slice(2, 2, &[0., 0., 0., 2.]);
        assert!(Derivation::verify(&a, d, &tol()).is_ok());
    }

    #[test]
    fn non_derivation_is_rejected_with_worst_pair() {
        // D(X) = Z, D(Y) = 0, D(Z) = Z: D[X,Y] = Z but [DX,Y] + [X,DY] = 0
        let m = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., 0., 1., 0., 1.]);
        match Derivation::verify(&heisenberg(), m, &tol()) {
            Err(Error::LeibnizViolation { i, j, residual }) => {
                assert_eq!((i, j), (0, 1));
                assert_eq!(residual, 1.0);
            }
            other => panic!("expected Leibniz violation, got {other:?}"),
        }
    }

    #[test]
    fn inner_derivations() {
        let a = affine();
        let d = Derivation::inner(&a, &v(&[1., 0.]), 2.0).unwrap();
        assert_eq!(d.matrix(), &DMatrix::from_row_slice(2, 2, &[0., 0., 0., 2.]));

        let h = heisenberg();
        let z = Derivation::inner(&h, &h.zero_vector(), 1.0).unwrap();
        assert_eq!(z.matrix(), &DMatrix::zeros(3, 3));

        // ad(X): Y -> Z, everything else to zero
        let adx = Derivation::inner(&h, &v(&[1., 0., 0.]), 1.0).unwrap();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(2, 1)] = 1.0;
        assert_eq!(adx.matrix(), &expected);
        assert!(leibniz_residual(&h, adx.matrix()).unwrap().residual == 0.0);
    }

    #[test]
    fn heisenberg_splitting() {
        let d = Derivation::verify(&heisenberg(), example1_d(), &tol()).unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        let mut re: Vec<f64> = s.eigenvalues.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        assert_eq!(s.dims(), (1, 1, 1));
        assert!(subspace_angle(s.plus.basis(), &line(&[1., 1., 0.])) < 1e-8);
        assert!(subspace_angle(s.minus.basis(), &line(&[1., -1., 0.])) < 1e-8);
        assert!(subspace_angle(s.zero.basis(), &line(&[0., 0., 1.])) < 1e-8);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn affine_splitting() {
        let a = affine();
        let d = Derivation::inner(&a, &v(&[1., 0.]), 2.0).unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        assert_eq!(s.dims(), (1, 0, 1));
        assert!(subspace_angle(s.plus.basis(), &line(&[0., 1.])) < 1e-8);
        assert!(subspace_angle(s.zero.basis(), &line(&[1., 0.])) < 1e-8);
    }

    #[test]
    fn rotation_spectrum_is_all_zero() {
        let d = Derivation::verify(
            &LieAlgebra::abelian(2).unwrap(),
            DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]),
            &tol(),
        )
        .unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        assert_eq!(s.dims(), (0, 0, 2));
        assert!(s.is_all_zero());
        assert!(s.eigenvalues.iter().all(|e| (e.im.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn nilpotent_derivation_under_basis_change_stays_in_g0() {
        let h = heisenberg();
        let p = DMatrix::from_row_slice(3, 3, &[1., 0.3, -2., 0.5, 1., 0.1, 0.2, -0.7, 1.]);
        let d = Derivation::inner(&h, &v(&[1., 0., 0.]), 1.0)
            .unwrap()
            .change_basis(&p)
            .unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        assert_eq!(s.dims(), (0, 0, 3));
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn near_threshold_eigenvalue_is_flagged() {
        let d = Derivation::verify(
            &LieAlgebra::abelian(2).unwrap(),
            DMatrix::from_row_slice(2, 2, &[1.2e-8, 0., 0., -1.]),
            &tol(),
        )
        .unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn grading_examples() {
        let h = heisenberg();
        let d = Derivation::verify(&h, example1_d(), &tol()).unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        let r = grading_check(&h, &s, &tol());
        assert!(r.passed, "{r:?}");
        // [X+Y, X-Y] = -2Z lands in g0
        let br = h.bracket(&v(&[1., 1., 0.]), &v(&[1., -1., 0.])).unwrap();
        assert_eq!(br, v(&[0., 0., -2.]));
        assert!(s.zero.contains(&br, 1e-12));

        let a = affine();
        let da = Derivation::inner(&a, &v(&[1., 0.]), 2.0).unwrap();
        let sa = da.spectral_split(&tol()).unwrap();
        assert!(grading_check(&a, &sa, &tol()).passed);

        let ab = LieAlgebra::abelian(3).unwrap();
        let dab = Derivation::verify(&ab, DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64), &tol())
            .unwrap();
        assert!(grading_check(&ab, &dab.spectral_split(&tol()).unwrap(), &tol()).passed);
    }

    // Truncated Taylor series with enough terms for |t D| <= 2.
    fn exp_series(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let mut term = DMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * m / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_matches_series_and_hyperbolic_closed_form() {
        let d = Derivation::verify(&heisenberg(), example1_d(), &tol()).unwrap();
        for t in [0.0, 0.3, -1.1, 2.0] {
            let e = d.exp(t);
            assert!((&e - exp_series(&(d.matrix() * t))).amax() < 1e-12);
            assert!((e[(0, 0)] - t.cosh()).abs() < 1e-12);
            assert!((e[(0, 1)] - t.sinh()).abs() < 1e-12);
            assert!((e[(1, 0)] - t.sinh()).abs() < 1e-12);
            assert!((e[(1, 1)] - t.cosh()).abs() < 1e-12);
            assert!((e[(2, 2)] - 1.0).abs() < 1e-12);
        }
        assert_eq!(d.exp(0.0), DMatrix::identity(3, 3));
    }

    #[test]
    fn minus_part_contracts_at_unit_rate() {
        let d = Derivation::verify(&heisenberg(), example1_d(), &tol()).unwrap();
        let w = v(&[1., -1., 0.]);
        // e^{tD} mixes cosh/sinh, so relative accuracy degrades like e^{2t} eps
        for t in [1.0, 5.0, 10.0] {
            let r = (d.exp(t) * &w).norm() / w.norm();
            assert!((r / (-t).exp() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn decompose_recovers_components() {
        let d = Derivation::verify(&heisenberg(), example1_d(), &tol()).unwrap();
        let s = d.spectral_split(&tol()).unwrap();
        let [p, m, z] = s.decompose(&v(&[1., 0., 3.])).unwrap();
        assert!((p - v(&[0.5, 0.5, 0.])).amax() < 1e-12);
        assert!((m - v(&[0.5, -0.5, 0.])).amax() < 1e-12);
        assert!((z - v(&[0., 0., 3.])).amax() < 1e-12);
    }
}
