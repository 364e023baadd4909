//! Concrete realizations of `g' = X(g) + sum_j u_j X_j(g)` and their integration.
//!
//! Three model kinds are supported:
//!
//! * inner drift on a matrix group, `X(g) = s (A g - g A)` with right-invariant
//!   controls `B_j g`, stepped exactly on each constant-control piece;
//! * exponential chart of a nilpotent group, `x' = D x + sum_j u_j F(x) X_j`;
//! * built-in coordinate models with explicit right-hand sides.
//!
//! The last two are integrated with the classical fourth-order Runge-Kutta scheme.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bch::{nilpotency_class, MAX_BCH_CLASS};
use super::control::ControlFunction;
use super::realization::{realization_check, MatrixRealization};
use crate::algebra::{AlgebraVector, LieAlgebra};
use crate::error::{Error, Result};
use crate::system::{ControlRange, LinearControlSystem};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactSegment,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateShape {
    /// `n x n` matrix stored row-major.
    Matrix(usize),
    Coordinates(usize),
}

impl StateShape {
    pub fn len(self) -> usize {
        match self {
            StateShape::Matrix(n) => n * n,
            StateShape::Coordinates(d) => d,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

/// Built-in coordinate charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateKind {
    /// Heisenberg group in natural coordinates `(x, y, z)` of
    /// `[[1, y, z], [0, 1, x], [0, 0, 1]]`, basis `X = d/dx`,
    /// `Y = d/dy + x d/dz`, `Z = d/dz`, drift `y d/dx + x d/dy + (x^2 + y^2)/2 d/dz`.
    Heisenberg,
    /// Affine group `[[x, y], [0, 1]]`, `x > 0`, basis `X(g) = (-x, -y)`,
    /// `Y(g) = (0, 1)`, drift `2y d/dy`.
    Affine,
}

impl CoordinateKind {
    pub fn algebra(self) -> LieAlgebra {
        let alg = match self {
            CoordinateKind::Heisenberg => LieAlgebra::from_brackets(3, &[(0, 1, vec![0.0, 0.0, 1.0])]),
            CoordinateKind::Affine => LieAlgebra::from_brackets(2, &[(0, 1, vec![0.0, 1.0])]),
        };
        alg.expect("built-in structure constants are valid")
    }

    /// Derivation of the built-in drift.
    pub fn derivation_matrix(self) -> DMatrix<f64> {
        match self {
            CoordinateKind::Heisenberg => {
                DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.])
            }
            CoordinateKind::Affine => DMatrix::from_row_slice(2, 2, &[0., 0., 0., 2.]),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            CoordinateKind::Heisenberg => 3,
            CoordinateKind::Affine => 2,
        }
    }

    pub fn identity(self) -> DVector<f64> {
        match self {
            CoordinateKind::Heisenberg => DVector::zeros(3),
            CoordinateKind::Affine => DVector::from_column_slice(&[1.0, 0.0]),
        }
    }
}

/// Explicit ODE for a built-in chart with the given control vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateModel {
    kind: CoordinateKind,
    controls: Vec<AlgebraVector>,
}

impl CoordinateModel {
    pub fn new(kind: CoordinateKind, controls: Vec<AlgebraVector>) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::InvalidInput("at least one control vector is required".into()));
        }
        for c in &controls {
            if c.len() != kind.dim() {
                return Err(Error::DimensionMismatch {
                    expected: kind.dim(),
                    found: c.len(),
                });
            }
        }
        Ok(Self { kind, controls })
    }

    pub fn kind(&self) -> CoordinateKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            CoordinateKind::Heisenberg => {
                DVector::from_column_slice(&[x[1], x[0], 0.5 * (x[0] * x[0] + x[1] * x[1])])
            }
            CoordinateKind::Affine => DVector::from_column_slice(&[0.0, 2.0 * x[1]]),
        }
    }

    /// Right-invariant field of the algebra element `c` at `x`.
    pub fn field(&self, c: &AlgebraVector, x: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            CoordinateKind::Heisenberg => {
                DVector::from_column_slice(&[c[0], c[1], c[1] * x[0] + c[2]])
            }
            CoordinateKind::Affine => DVector::from_column_slice(&[-c[0] * x[0], -c[0] * x[1] + c[1]]),
        }
    }

    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut out = self.drift(x);
        for (c, &uj) in self.controls.iter().zip(u.iter()) {
            if uj != 0.0 {
                out += self.field(c, x) * uj;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Dynamics {
    InnerDrift {
        ambient: usize,
        drift: DMatrix<f64>,
        controls: Vec<DMatrix<f64>>,
    },
    ExpChart {
        algebra: LieAlgebra,
        derivation: DMatrix<f64>,
        controls: Vec<AlgebraVector>,
        class: usize,
    },
    Coordinate(CoordinateModel),
}

/// A system together with a concrete way of computing its trajectories.
#[derive(Debug, Clone)]
pub struct Model {
    dynamics: Dynamics,
    range: ControlRange,
}

/// Taylor coefficients of `z / (1 - e^{-z})`.
const DEXP_INV: [f64; 5] = [1.0, 0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0];

fn within(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerances) -> bool {
    let scale = a.amax().max(b.amax()).max(1.0);
    (a - b).amax() <= tol.zero * scale
}

impl Model {
    /// Inner-drift model `X(g) = s (A g - g A)` with `A` the matrix of `element`.
    /// The system's derivation must be the differential of `g -> e^{tsA} g e^{-tsA}`.
    pub fn inner_drift(
        sys: &LinearControlSystem,
        realization: &MatrixRealization,
        element: &AlgebraVector,
        scale: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        let alg = sys.algebra();
        let report = realization_check(alg, realization, tol)?;
        if !report.passed {
            return Err(Error::RealizationMismatch {
                residual: report.max_residual,
            });
        }
        let expected = alg.ad(element)? * (scale * realization.convention.sign());
        if !within(&expected, sys.derivation().matrix(), tol) {
            return Err(Error::InvalidInput(format!(
                "derivation does not match the inner drift (max deviation {:.3e})",
                (&expected - sys.derivation().matrix()).amax()
            )));
        }
        let drift = realization.matrix_of(element)? * scale;
        let controls = sys
            .controls()
            .iter()
            .map(|c| realization.matrix_of(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dynamics: Dynamics::InnerDrift {
                ambient: realization.ambient_dim(),
                drift,
                controls,
            },
            range: sys.range().clone(),
        })
    }

    /// Exponential-chart model of a nilpotent system.
    pub fn exp_chart(sys: &LinearControlSystem, tol: &Tolerances) -> Result<Self> {
        let class = nilpotency_class(sys.algebra(), tol)?;
        if class > MAX_BCH_CLASS {
            return Err(Error::UnsupportedClass {
                class,
                max: MAX_BCH_CLASS,
            });
        }
        Ok(Self {
            dynamics: Dynamics::ExpChart {
                algebra: sys.algebra().clone(),
                derivation: sys.derivation().matrix().clone(),
                controls: sys.controls().to_vec(),
                class,
            },
            range: sys.range().clone(),
        })
    }

    /// Built-in coordinate model; the system must be written in the chart's basis
    /// with the chart's drift.
    pub fn coordinate(kind: CoordinateKind, sys: &LinearControlSystem, tol: &Tolerances) -> Result<Self> {
        let builtin = kind.algebra();
        if sys.algebra().dim() != builtin.dim() {
            return Err(Error::DimensionMismatch {
                expected: builtin.dim(),
                found: sys.algebra().dim(),
            });
        }
        let dev = sys
            .algebra()
            .constants()
            .iter()
            .zip(builtin.constants())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > tol.zero {
            return Err(Error::InvalidInput(format!(
                "structure constants differ from the {kind:?} chart by {dev:.3e}"
            )));
        }
        if !within(&kind.derivation_matrix(), sys.derivation().matrix(), tol) {
            return Err(Error::InvalidInput(format!(
                "derivation differs from the {kind:?} chart drift"
            )));
        }
        Ok(Self {
            dynamics: Dynamics::Coordinate(CoordinateModel::new(kind, sys.controls().to_vec())?),
            range: sys.range().clone(),
        })
    }

    pub fn from_coordinate_model(model: CoordinateModel, range: ControlRange) -> Result<Self> {
        range.validate()?;
        Ok(Self {
            dynamics: Dynamics::Coordinate(model),
            range,
        })
    }

    pub fn range(&self) -> &ControlRange {
        &self.range
    }

    pub fn scheme(&self) -> Scheme {
        match self.dynamics {
            Dynamics::InnerDrift { .. } => Scheme::ExactSegment,
            _ => Scheme::Rk4,
        }
    }

    pub fn shape(&self) -> StateShape {
        match &self.dynamics {
            Dynamics::InnerDrift { ambient, .. } => StateShape::Matrix(*ambient),
            Dynamics::ExpChart { algebra, .. } => StateShape::Coordinates(algebra.dim()),
            Dynamics::Coordinate(c) => StateShape::Coordinates(c.dim()),
        }
    }

    pub fn num_controls(&self) -> usize {
        match &self.dynamics {
            Dynamics::InnerDrift { controls, .. } => controls.len(),
            Dynamics::ExpChart { controls, .. } => controls.len(),
            Dynamics::Coordinate(c) => c.num_controls(),
        }
    }

    pub fn coordinate_model(&self) -> Option<&CoordinateModel> {
        match &self.dynamics {
            Dynamics::Coordinate(c) => Some(c),
            _ => None,
        }
    }

    /// The identity element `e` in this model's state representation.
    pub fn identity(&self) -> DVector<f64> {
        match &self.dynamics {
            Dynamics::InnerDrift { ambient, .. } => {
                let n = *ambient;
                DVector::from_fn(n * n, |k, _| if k / n == k % n { 1.0 } else { 0.0 })
            }
            Dynamics::ExpChart { algebra, .. } => DVector::zeros(algebra.dim()),
            Dynamics::Coordinate(c) => c.kind().identity(),
        }
    }

    /// Right-hand side of the state equation for the RK4 models.
    pub fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        match &self.dynamics {
            Dynamics::InnerDrift {
                ambient,
                drift,
                controls,
            } => {
                let g = DMatrix::from_row_slice(*ambient, *ambient, x.as_slice());
                let mut dg = drift * &g - &g * drift;
                for (b, &uj) in controls.iter().zip(u.iter()) {
                    dg += b * &g * uj;
                }
                DVector::from_row_slice(dg.transpose().as_slice())
            }
            Dynamics::ExpChart {
                algebra,
                derivation,
                controls,
                class,
            } => {
                let mut out = derivation * x;
                let mut v = AlgebraVector::zeros(algebra.dim());
                for (c, &uj) in controls.iter().zip(u.iter()) {
                    v += c * uj;
                }
                let mut term = v;
                for b in DEXP_INV.iter().take(*class) {
                    out += &term * *b;
                    term = algebra.bracket_unchecked(x, &term);
                }
                out
            }
            Dynamics::Coordinate(c) => c.rhs(x, u),
        }
    }

    /// Advances `x` through `n` equal steps of signed length `h` under constant `u`.
    fn advance(&self, x: &mut DVector<f64>, u: &DVector<f64>, h: f64, n: usize, mut visit: impl FnMut(usize, &DVector<f64>)) {
        match &self.dynamics {
            Dynamics::InnerDrift {
                ambient,
                drift,
                controls,
            } => {
                let mut gen = drift.clone();
                for (b, &uj) in controls.iter().zip(u.iter()) {
                    gen += b * uj;
                }
                let left = (gen * h).exp();
                let right = (drift * -h).exp();
                let mut g = DMatrix::from_row_slice(*ambient, *ambient, x.as_slice());
                for k in 0..n {
                    g = &left * g * &right;
                    *x = DVector::from_row_slice(g.transpose().as_slice());
                    visit(k, x);
                }
            }
            _ => {
                for k in 0..n {
                    let k1 = self.rhs(x, u);
                    let k2 = self.rhs(&(&*x + &k1 * (h / 2.0)), u);
                    let k3 = self.rhs(&(&*x + &k2 * (h / 2.0)), u);
                    let k4 = self.rhs(&(&*x + &k3 * h), u);
                    *x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                    visit(k, x);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub shape: StateShape,
    pub scheme: Scheme,
    /// Requested maximal step length.
    pub step: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least its start")
    }

    pub fn as_matrix(&self, k: usize) -> Option<DMatrix<f64>> {
        match self.shape {
            StateShape::Matrix(n) => Some(DMatrix::from_row_slice(n, n, self.states[k].as_slice())),
            StateShape::Coordinates(_) => None,
        }
    }

    /// Determinant at every sample, for matrix models.
    pub fn determinants(&self) -> Option<Vec<f64>> {
        match self.shape {
            StateShape::Matrix(_) => Some((0..self.states.len()).map(|k| self.as_matrix(k).unwrap().determinant()).collect()),
            StateShape::Coordinates(_) => None,
        }
    }
}

fn check_request(model: &Model, control: &ControlFunction, start: &DVector<f64>, t0: f64, horizon: f64, h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidHorizon(format!("step must be positive and finite, got {h}")));
    }
    if !(horizon.is_finite() && t0.is_finite()) {
        return Err(Error::InvalidHorizon(format!("horizon must be finite, got {horizon}")));
    }
    let len = model.shape().len();
    if start.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: start.len(),
        });
    }
    if control.channels() != model.num_controls() {
        return Err(Error::DimensionMismatch {
            expected: model.num_controls(),
            found: control.channels(),
        });
    }
    Ok(())
}

/// Walks the pieces of `control` between `t0` and `t0 + horizon` (backwards
/// when the horizon is negative), calling `visit` after every step.
fn run(
    model: &Model,
    control: &ControlFunction,
    start: &DVector<f64>,
    t0: f64,
    horizon: f64,
    h: f64,
    mut visit: impl FnMut(f64, &DVector<f64>),
) -> Result<DVector<f64>> {
    check_request(model, control, start, t0, horizon, h)?;
    let mut x = start.clone();
    if horizon == 0.0 {
        return Ok(x);
    }
    let (a, b) = if horizon > 0.0 { (t0, t0 + horizon) } else { (t0 + horizon, t0) };
    let mut pieces = control.pieces(a, b)?;
    for (segment, (_, _, u)) in pieces.iter().enumerate() {
        model
            .range()
            .contains(u.as_slice())
            .map_err(|(channel, value)| Error::ControlOutOfRange {
                segment,
                channel,
                value,
            })?;
    }
    if horizon < 0.0 {
        pieces.reverse();
    }
    for (lo, hi, u) in pieces {
        let len = hi - lo;
        let n = ((len / h).ceil() as usize).max(1);
        let (from, signed) = if horizon > 0.0 { (lo, len / n as f64) } else { (hi, -len / n as f64) };
        model.advance(&mut x, u, signed, n, |k, state| {
            let t = if k + 1 == n {
                if horizon > 0.0 { hi } else { lo }
            } else {
                from + signed * (k + 1) as f64
            };
            visit(t, state)
        });
    }
    Ok(x)
}

/// Trajectory of the model from `start` at time `t0` over `horizon` (which may
/// be negative), with steps no longer than `h` and aligned to the control's
/// breakpoints.
pub fn integrate(
    model: &Model,
    control: &ControlFunction,
    start: &DVector<f64>,
    t0: f64,
    horizon: f64,
    h: f64,
) -> Result<Trajectory> {
    let mut times = vec![t0];
    let mut states = vec![start.clone()];
    run(model, control, start, t0, horizon, h, |t, x| {
        times.push(t);
        states.push(x.clone());
    })?;
    Ok(Trajectory {
        times,
        states,
        shape: model.shape(),
        scheme: model.scheme(),
        step: h,
    })
}

/// Endpoint only, without storing intermediate states.
pub fn integrate_endpoint(
    model: &Model,
    control: &ControlFunction,
    start: &DVector<f64>,
    t0: f64,
    horizon: f64,
    h: f64,
) -> Result<DVector<f64>> {
    run(model, control, start, t0, horizon, h, |_, _| {})
}
