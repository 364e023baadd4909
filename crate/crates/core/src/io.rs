//! JSON system files, analysis reports and CSV output.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraVector, ClassReport, LieAlgebra, Subspace, ValidationReport};
use crate::derivation::{grading_check, ClassifiedEigenvalue, Derivation, GradingReport};
use crate::error::{Error, Result};
use crate::simulation::model::{CoordinateKind, Model, Trajectory};
use crate::simulation::reach::ReachSample;
use crate::simulation::realization::{realization_check, Convention, GroupKind, MatrixRealization};
use crate::system::{analyze, ControlRange, LinearControlSystem, OpennessFacts, RankReport};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub dim: usize,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerDriftSpec {
    pub element: Vec<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationSpec {
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub kind: GroupKind,
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_drift: Option<InnerDriftSpec>,
}

/// On-disk form of a system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub algebra: AlgebraSpec,
    pub derivation: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    pub range: ControlRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<RealizationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_model: Option<CoordinateKind>,
}

/// A parsed and validated system file.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub name: Option<String>,
    pub system: LinearControlSystem,
    pub realization: Option<MatrixRealization>,
    pub inner_drift: Option<(AlgebraVector, f64)>,
    pub coordinate_model: Option<CoordinateKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// Coordinate model if declared, else inner drift if declared, else the
    /// exponential chart when the algebra is nilpotent.
    #[default]
    Auto,
    InnerDrift,
    ExpChart,
    Coordinate,
}

fn context(what: &str, e: Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

fn dense(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse(format!("{what}: matrix is empty")));
    }
    let m = rows[0].len();
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != m) {
        return Err(Error::Parse(format!(
            "{what}: row {r} has {} entries, expected {m}",
            row.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(n, m, rows.iter().flatten().copied()))
}

impl AlgebraSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<LieAlgebra> {
        let brackets: Vec<_> = self.brackets.iter().map(|b| (b.i, b.j, b.coeffs.clone())).collect();
        let mut alg = LieAlgebra::from_brackets(self.dim, &brackets).map_err(|e| context("algebra", e))?;
        if let Some(labels) = &self.labels {
            alg = alg.with_labels(labels.clone()).map_err(|e| context("algebra.labels", e))?;
        }
        alg.ensure_valid(tol).map_err(|e| context("algebra", e))?;
        Ok(alg)
    }

    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        let n = alg.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let coeffs: Vec<f64> = (0..n).map(|k| alg.constant(i, j, k)).collect();
                if coeffs.iter().any(|&c| c != 0.0) {
                    brackets.push(BracketSpec { i, j, coeffs });
                }
            }
        }
        Self {
            dim: n,
            brackets,
            labels: Some(alg.labels().to_vec()),
        }
    }
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files serialize")
    }

    pub fn load(&self, tol: &Tolerances) -> Result<LoadedSystem> {
        let alg = self.algebra.build(tol)?;
        let n = alg.dim();
        let dm = dense(&self.derivation, "derivation")?;
        if dm.nrows() != n || dm.ncols() != n {
            return Err(Error::Parse(format!(
                "derivation: expected a {n}x{n} matrix, found {}x{}",
                dm.nrows(),
                dm.ncols()
            )));
        }
        let derivation = Derivation::verify(&alg, dm, tol).map_err(|e| context("derivation", e))?;
        let mut controls = Vec::new();
        for (j, c) in self.controls.iter().enumerate() {
            if c.len() != n {
                return Err(Error::Parse(format!("controls[{j}]: expected {n} coordinates, found {}", c.len())));
            }
            controls.push(DVector::from_column_slice(c));
        }
        let system = LinearControlSystem::new(alg, derivation, controls, self.range.clone())
            .map_err(|e| context("system", e))?;

        let (realization, inner_drift) = match &self.realization {
            None => (None, None),
            Some(spec) => {
                let mats = spec
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| dense(m, &format!("realization.matrices[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let r = MatrixRealization::new(spec.convention, mats, spec.kind).map_err(|e| context("realization", e))?;
                let report = realization_check(system.algebra(), &r, tol).map_err(|e| context("realization", e))?;
                if !report.passed {
                    return Err(context(
                        "realization",
                        Error::RealizationMismatch {
                            residual: report.max_residual,
                        },
                    ));
                }
                let drift = match &spec.inner_drift {
                    None => None,
                    Some(d) => {
                        if d.element.len() != n {
                            return Err(Error::Parse(format!(
                                "realization.inner_drift.element: expected {n} coordinates, found {}",
                                d.element.len()
                            )));
                        }
                        Some((DVector::from_column_slice(&d.element), d.scale))
                    }
                };
                (Some(r), drift)
            }
        };
        let loaded = LoadedSystem {
            name: self.name.clone(),
            system,
            realization,
            inner_drift,
            coordinate_model: self.coordinate_model,
        };
        // Declared models must be consistent with the system.
        if loaded.coordinate_model.is_some() {
            loaded.model(ModelChoice::Coordinate, tol).map_err(|e| context("coordinate_model", e))?;
        }
        if loaded.inner_drift.is_some() {
            loaded.model(ModelChoice::InnerDrift, tol).map_err(|e| context("realization.inner_drift", e))?;
        }
        Ok(loaded)
    }
}

pub fn load_system(text: &str, tol: &Tolerances) -> Result<LoadedSystem> {
    SystemFile::parse(text)?.load(tol)
}

impl LoadedSystem {
    pub fn model(&self, choice: ModelChoice, tol: &Tolerances) -> Result<Model> {
        let sys = &self.system;
        match choice {
            ModelChoice::Coordinate => {
                let kind = self
                    .coordinate_model
                    .ok_or_else(|| Error::InvalidInput("system declares no coordinate model".into()))?;
                Model::coordinate(kind, sys, tol)
            }
            ModelChoice::InnerDrift => {
                let (r, (element, scale)) = self
                    .realization
                    .as_ref()
                    .zip(self.inner_drift.as_ref())
                    .ok_or_else(|| Error::InvalidInput("system declares no inner-drift realization".into()))?;
                Model::inner_drift(sys, r, element, *scale, tol)
            }
            ModelChoice::ExpChart => Model::exp_chart(sys, tol),
            ModelChoice::Auto => {
                if self.coordinate_model.is_some() {
                    self.model(ModelChoice::Coordinate, tol)
                } else if self.inner_drift.is_some() {
                    self.model(ModelChoice::InnerDrift, tol)
                } else {
                    Model::exp_chart(sys, tol).map_err(|e| match e {
                        Error::NotNilpotent => Error::InvalidInput(
                            "no simulation model: the algebra is not nilpotent and no realization or coordinate model is declared".into(),
                        ),
                        other => other,
                    })
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceReport {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

impl From<&Subspace> for SubspaceReport {
    fn from(s: &Subspace) -> Self {
        Self {
            dim: s.dim(),
            basis: s.vectors().iter().map(|v| v.as_slice().to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingReport {
    pub eigenvalues: Vec<ClassifiedEigenvalue>,
    pub tau: f64,
    pub plus: SubspaceReport,
    pub minus: SubspaceReport,
    pub zero: SubspaceReport,
    pub invariance_residuals: [f64; 3],
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub name: Option<String>,
    pub dim: usize,
    pub labels: Vec<String>,
    pub validation: ValidationReport,
    pub structure: ClassReport,
    pub leibniz_residual: f64,
    pub splitting: SplittingReport,
    pub grading: GradingReport,
    pub ad_rank: RankReport,
    pub larc: RankReport,
    pub openness: OpennessFacts,
}

pub fn analysis_report(loaded: &LoadedSystem, tol: &Tolerances) -> Result<AnalysisReport> {
    let sys = &loaded.system;
    let alg = sys.algebra();
    let an = analyze(sys, tol)?;
    let split = &an.splitting;
    Ok(AnalysisReport {
        name: loaded.name.clone(),
        dim: alg.dim(),
        labels: alg.labels().to_vec(),
        validation: alg.validate(tol),
        structure: an.class.clone(),
        leibniz_residual: sys.derivation().leibniz_residual(),
        splitting: SplittingReport {
            eigenvalues: split.eigenvalues.clone(),
            tau: split.tau,
            plus: (&split.plus).into(),
            minus: (&split.minus).into(),
            zero: (&split.zero).into(),
            invariance_residuals: split.invariance_residuals,
            warnings: split.warnings.clone(),
        },
        grading: grading_check(alg, split, tol),
        ad_rank: an.ad_rank,
        larc: an.larc,
        openness: an.openness,
    })
}

/// `t, x_0, ..., x_{d-1}` per sample; matrix models add a `det` column.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let width = traj.states.first().map_or(0, |s| s.len());
    let dets = traj.determinants();
    let mut out = String::from("t");
    match traj.shape {
        crate::simulation::model::StateShape::Matrix(n) => {
            for i in 0..n {
                for j in 0..n {
                    let _ = write!(out, ",g{i}{j}");
                }
            }
            out.push_str(",det");
        }
        crate::simulation::model::StateShape::Coordinates(_) => {
            for k in 0..width {
                let _ = write!(out, ",x{k}");
            }
        }
    }
    out.push('\n');
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let _ = write!(out, "{t}");
        for v in x.iter() {
            let _ = write!(out, ",{v}");
        }
        if let Some(d) = &dets {
            let _ = write!(out, ",{}", d[k]);
        }
        out.push('\n');
    }
    out
}

/// `sample_id, x_0, ..., x_{d-1}` per endpoint.
pub fn reach_csv(sample: &ReachSample) -> String {
    let width = sample.endpoints.first().map_or(0, |s| s.len());
    let mut out = String::from("sample_id");
    for k in 0..width {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (i, x) in sample.endpoints.iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in x.iter() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "algebra": {"dim": 2, "brackets": [{"i": 0, "j": 1, "coeffs": [0, 1]}]},
        "derivation": [[0, 0], [0, 2]],
        "controls": [[1, 1]],
        "range": {"kind": "bounded", "bounds": [[-1, 1]]}
    }"#;

    #[test]
    fn parses_minimal_file() {
        let l = load_system(SMALL, &Tolerances::default()).unwrap();
        assert_eq!(l.system.algebra().dim(), 2);
        assert_eq!(l.system.algebra().constant(1, 0, 1), -1.0);
        assert!(l.realization.is_none());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = SystemFile::parse("{\n  \"algebra\": [1,\n}").unwrap_err().to_string();
        assert!(err.starts_with("line 3, column"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let bad = SMALL.replace("[[0, 0], [0, 2]]", "[[0, 1], [0, 0]]");
        let err = load_system(&bad, &Tolerances::default()).unwrap_err().to_string();
        assert!(err.starts_with("derivation:"), "{err}");
        let bad = SMALL.replace("[[1, 1]]", "[[1, 1, 0]]");
        assert!(load_system(&bad, &Tolerances::default()).unwrap_err().to_string().starts_with("controls[0]"));
        let bad = SMALL.replace("[[-1, 1]]", "[[0.5, 1]]");
        assert!(load_system(&bad, &Tolerances::default()).is_err());
    }

    #[test]
    fn round_trip() {
        let f = SystemFile::parse(SMALL).unwrap();
        let again = SystemFile::parse(&f.to_json()).unwrap();
        assert_eq!(again.derivation, f.derivation);
        let alg = f.algebra.build(&Tolerances::default()).unwrap();
        let spec = AlgebraSpec::from_algebra(&alg);
        assert_eq!(spec.build(&Tolerances::default()).unwrap().constants(), alg.constants());
    }
}
