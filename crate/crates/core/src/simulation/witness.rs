//! Numerical witnesses: sign of a coordinate derivative over a region, and the
//! splitting of a group element into `G^{+,0}` and `G^-` factors.

use nalgebra::DVector;
use serde::Serialize;

use super::bch::nilpotency_class;
use super::model::CoordinateModel;
use crate::algebra::{AlgebraVector, LieAlgebra};
use crate::derivation::SpectralSplitting;
use crate::error::{Error, Result};
use crate::system::ControlRange;
use crate::tolerance::Tolerances;

/// `points` equally spaced values on `[lo, hi]` (just `lo` when `points == 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInput(format!("invalid grid axis [{lo}, {hi}] with {points} points")));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn point(&self, k: usize) -> f64 {
        if self.points == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.points - 1) as f64
        }
    }

    /// One axis per channel of a bounded range.
    pub fn for_range(range: &ControlRange, points: usize) -> Result<Vec<GridAxis>> {
        match range {
            ControlRange::Bounded { bounds } => bounds.iter().map(|[lo, hi]| GridAxis::new(*lo, *hi, points)).collect(),
            ControlRange::Unbounded => Err(Error::InvalidInput("control grid needs a bounded range".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVerdict {
    Positive,
    Negative,
    Indefinite,
}

/// Grid evaluation of one coordinate of the right-hand side. This is numerical
/// evidence on the grid, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignCertificate {
    pub coordinate: usize,
    pub min: f64,
    pub max: f64,
    pub argmin_state: Vec<f64>,
    pub argmin_control: Vec<f64>,
    pub evaluations: usize,
    pub verdict: SignVerdict,
}

impl SignCertificate {
    pub fn certifies_positive(&self) -> bool {
        self.verdict == SignVerdict::Positive
    }
}

fn grid_points(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.points);
        for prefix in &out {
            for k in 0..axis.points {
                let mut p = prefix.clone();
                p.push(axis.point(k));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Minimum and maximum of `d x_coord / dt` over `state grid x control grid`.
/// Positive (negative) only if the minimum (maximum) is strictly above (below) 0.
pub fn sign_certificate(
    model: &CoordinateModel,
    coordinate: usize,
    region: &[GridAxis],
    controls: &[GridAxis],
) -> Result<SignCertificate> {
    if region.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: region.len(),
        });
    }
    if controls.len() != model.num_controls() {
        return Err(Error::DimensionMismatch {
            expected: model.num_controls(),
            found: controls.len(),
        });
    }
    if coordinate >= model.dim() {
        return Err(Error::InvalidInput(format!("coordinate {coordinate} out of range")));
    }
    let states = grid_points(region);
    let inputs: Vec<DVector<f64>> = grid_points(controls).into_iter().map(DVector::from_vec).collect();
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut argmin_state, mut argmin_control) = (Vec::new(), Vec::new());
    for s in &states {
        let x = DVector::from_column_slice(s);
        for u in &inputs {
            let d = model.rhs(&x, u)[coordinate];
            if d < min {
                min = d;
                argmin_state = s.clone();
                argmin_control = u.as_slice().to_vec();
            }
            max = max.max(d);
        }
    }
    let verdict = if min > 0.0 {
        SignVerdict::Positive
    } else if max < 0.0 {
        SignVerdict::Negative
    } else {
        SignVerdict::Indefinite
    };
    Ok(SignCertificate {
        coordinate,
        min,
        max,
        argmin_state,
        argmin_control,
        evaluations: states.len() * inputs.len(),
        verdict,
    })
}

/// `(U, V)` with `U in g+ (+) g0`, `V in g-` and `S(U, V) = W`, for nilpotent
/// algebras of class at most 2.
pub fn factorization_witness(
    alg: &LieAlgebra,
    split: &SpectralSplitting,
    w: &AlgebraVector,
    tol: &Tolerances,
) -> Result<(AlgebraVector, AlgebraVector)> {
    let class = nilpotency_class(alg, tol)?;
    if class > 2 {
        return Err(Error::UnsupportedClass { class, max: 2 });
    }
    alg.check_vector(w)?;
    let [plus, minus, zero] = split.decompose(w)?;
    let u0 = plus + zero;
    let v0 = minus;
    // In class 2 the bracket is central, so S(U0 + a, V0 + b) = W reduces to
    // a + b = -[U0, V0] / 2, split along the same decomposition.
    let correction = alg.bracket_unchecked(&u0, &v0) * -0.5;
    let [cp, cm, cz] = split.decompose(&correction)?;
    Ok((u0 + cp + cz, v0 + cm))
}
