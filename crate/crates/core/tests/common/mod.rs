//! Seeded generators of random algebras, derivations, systems and controls
//! shared by the property and acceptance tests.
#![allow(dead_code)]

use liectl_core::algebra::{AlgebraVector, LieAlgebra};
use liectl_core::derivation::Derivation;
use liectl_core::simulation::ControlFunction;
use liectl_core::system::{ControlRange, LinearControlSystem};
use liectl_core::Tolerances;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(xs: &[f64]) -> AlgebraVector {
    DVector::from_column_slice(xs)
}

pub fn heisenberg() -> LieAlgebra {
    LieAlgebra::from_brackets(3, &[(0, 1, vec![0., 0., 1.])]).unwrap()
}

pub fn affine() -> LieAlgebra {
    LieAlgebra::from_brackets(2, &[(0, 1, vec![0., 1.])]).unwrap()
}

pub fn sl2() -> LieAlgebra {
    LieAlgebra::from_brackets(
        3,
        &[(0, 1, vec![0., 0., -2.]), (0, 2, vec![0., 2., 0.]), (1, 2, vec![2., 0., 0.])],
    )
    .unwrap()
}

pub fn so3() -> LieAlgebra {
    LieAlgebra::from_brackets(
        3,
        &[(0, 1, vec![0., 0., 1.]), (1, 2, vec![1., 0., 0.]), (2, 0, vec![0., 1., 0.])],
    )
    .unwrap()
}

/// Matrix units `E_ij` with `i < j` (or `i <= j` when `diagonal`) of n x n matrices.
pub fn triangular_units(n: usize, diagonal: bool) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j && !diagonal {
                continue;
            }
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            out.push(m);
        }
    }
    out
}

/// Strictly upper-triangular n x n matrices: nilpotent of class n - 1.
pub fn strict_upper(n: usize) -> LieAlgebra {
    LieAlgebra::from_matrices(&triangular_units(n, false), 1.0, &Tolerances::default()).unwrap()
}

/// Upper-triangular 2 x 2 matrices: solvable, not nilpotent.
pub fn borel2() -> LieAlgebra {
    LieAlgebra::from_matrices(&triangular_units(2, true), 1.0, &Tolerances::default()).unwrap()
}

/// Free 2-step nilpotent algebra on three generators (dimension 6).
pub fn free_two_step() -> LieAlgebra {
    LieAlgebra::from_brackets(
        6,
        &[
            (0, 1, vec![0., 0., 0., 1., 0., 0.]),
            (0, 2, vec![0., 0., 0., 0., 1., 0.]),
            (1, 2, vec![0., 0., 0., 0., 0., 1.]),
        ],
    )
    .unwrap()
}

/// Direct sum of two algebras.
pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> LieAlgebra {
    let (n, m) = (a.dim(), b.dim());
    let d = n + m;
    let mut c = vec![0.0; d * d * d];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[(i * d + j) * d + k] = a.constant(i, j, k);
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                c[((n + i) * d + n + j) * d + n + k] = b.constant(i, j, k);
            }
        }
    }
    LieAlgebra::new(d, c).unwrap()
}

pub fn family() -> Vec<LieAlgebra> {
    vec![
        heisenberg(),
        affine(),
        sl2(),
        so3(),
        strict_upper(4),
        borel2(),
        free_two_step(),
        LieAlgebra::abelian(3).unwrap(),
        direct_sum(&heisenberg(), &affine()),
        direct_sum(&sl2(), &LieAlgebra::abelian(1).unwrap()),
    ]
}

/// Nilpotent algebras of class at most 2.
pub fn class_two_family() -> Vec<LieAlgebra> {
    vec![
        heisenberg(),
        free_two_step(),
        direct_sum(&heisenberg(), &LieAlgebra::abelian(1).unwrap()),
        direct_sum(&heisenberg(), &heisenberg()),
    ]
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AlgebraVector {
    DVector::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

/// `I + 0.4 R` with uniform entries; well conditioned with high probability.
pub fn random_basis_change(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let p = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.4..0.4));
        let sv = p.singular_values();
        if sv.min() > 0.2 {
            return p;
        }
    }
}

/// A random algebra from the family, written in a random basis.
pub fn random_algebra(rng: &mut ChaCha8Rng) -> LieAlgebra {
    let fam = family();
    let base = &fam[rng.random_range(0..fam.len())];
    let p = random_basis_change(rng, base.dim());
    base.change_basis(&p).unwrap()
}

/// Basis of the space of derivations, from the null space of the Leibniz
/// constraints on the `n^2` matrix entries.
pub fn derivation_basis(alg: &LieAlgebra) -> Vec<DMatrix<f64>> {
    let n = alg.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // (D[e_i, e_j] - [D e_i, e_j] - [e_i, D e_j])_k, linear in d_ab
                let mut row = vec![0.0; n * n];
                for l in 0..n {
                    row[k * n + l] += alg.constant(i, j, l);
                }
                for a in 0..n {
                    row[a * n + i] -= alg.constant(a, j, k);
                    row[a * n + j] -= alg.constant(i, a, k);
                }
                rows.push(row);
            }
        }
    }
    let m = DMatrix::from_row_iterator(rows.len(), n * n, rows.into_iter().flatten());
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max().max(1.0);
    let mut basis = Vec::new();
    for r in 0..n * n {
        let s = if r < svd.singular_values.len() { svd.singular_values[r] } else { 0.0 };
        if s <= 1e-10 * smax {
            basis.push(DMatrix::from_row_iterator(n, n, vt.row(r).iter().copied()));
        }
    }
    basis
}

pub fn random_derivation(rng: &mut ChaCha8Rng, alg: &LieAlgebra) -> Derivation {
    let basis = derivation_basis(alg);
    let n = alg.dim();
    let mut m = DMatrix::zeros(n, n);
    for b in &basis {
        m += b * rng.random_range(-1.5..1.5);
    }
    Derivation::verify(alg, m, &Tolerances::default()).expect("null-space combination is a derivation")
}

/// A random system: algebra from the family (canonical basis), random
/// derivation, 1-2 random or basis control vectors, random range kind.
pub fn random_system(rng: &mut ChaCha8Rng) -> LinearControlSystem {
    let fam = family();
    let mut choices: Vec<(LieAlgebra, Option<DMatrix<f64>>)> = fam.into_iter().map(|a| (a, None)).collect();
    // The rotation derivation on the Heisenberg algebra yields controllable systems.
    choices.push((
        heisenberg(),
        Some(DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.])),
    ));
    let (alg, fixed) = choices.swap_remove(rng.random_range(0..choices.len()));
    let n = alg.dim();
    let d = match fixed {
        Some(m) => Derivation::verify(&alg, m, &Tolerances::default()).unwrap(),
        None => random_derivation(rng, &alg),
    };
    let m = rng.random_range(1..=2usize);
    let controls = (0..m)
        .map(|_| {
            if rng.random_bool(0.5) {
                let mut e = DVector::zeros(n);
                e[rng.random_range(0..n)] = 1.0;
                e
            } else {
                random_vector(rng, n, 1.0)
            }
        })
        .collect();
    let range = if rng.random_bool(0.7) { ControlRange::unit_box(m) } else { ControlRange::Unbounded };
    LinearControlSystem::new(alg, d, controls, range).unwrap()
}

/// Random piecewise-constant control on `[0, horizon]` with values in `[-1, 1]^m`.
pub fn random_control(rng: &mut ChaCha8Rng, channels: usize, horizon: f64, max_segments: usize) -> ControlFunction {
    let k = rng.random_range(1..=max_segments);
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.05..0.95) * horizon).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cuts);
    breakpoints.push(horizon);
    let values = (1..breakpoints.len())
        .map(|_| DVector::from_fn(channels, |_, _| rng.random_range(-1.0..=1.0)))
        .collect();
    ControlFunction::new(breakpoints, values).unwrap()
}
