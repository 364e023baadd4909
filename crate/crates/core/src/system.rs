//! Linear control systems `g' = X(g) + sum_j u_j X_j(g)` on a Lie group, the
//! rank conditions, and the controllability decision engine.
//!
//! The engine only ever concludes from the following rules:
//!
//! * ad-rank (`span{D^k X_j} = g`) makes both the reachable set `A` of the
//!   system and `A*` of the time-reversed system open;
//! * failure of the Lie algebra rank condition leaves `A` with empty interior;
//! * on a solvable group, `A` and `A*` open together with a derivation whose
//!   spectrum lies on the imaginary axis gives controllability;
//! * on a nilpotent group with a bounded control range, the system is
//!   controllable exactly when `A` is open and `g = g0`.
//!
//! Anything else is reported as `Unknown`, and non-solvable groups as
//! `OutOfTheoremScope`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraVector, ClassReport, LieAlgebra, Subspace};
use crate::derivation::{Derivation, SpectralSplitting};
use crate::error::{Error, Result};
use crate::linalg::hstack;
use crate::tolerance::Tolerances;

/// Control range `Omega`: a coordinate box with 0 in its interior, or all of R^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlRange {
    Bounded { bounds: Vec<[f64; 2]> },
    Unbounded,
}

impl ControlRange {
    pub fn bounded(bounds: Vec<[f64; 2]>) -> Result<Self> {
        let r = ControlRange::Bounded { bounds };
        r.validate()?;
        Ok(r)
    }

    /// `[-1, 1]^m`.
    pub fn unit_box(m: usize) -> Self {
        ControlRange::Bounded {
            bounds: vec![[-1.0, 1.0]; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ControlRange::Bounded { bounds } = self {
            for (j, [lo, hi]) in bounds.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && *lo < 0.0 && 0.0 < *hi) {
                    return Err(Error::InvalidInput(format!(
                        "control channel {j}: bounds [{lo}, {hi}] must satisfy lo < 0 < hi"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, ControlRange::Bounded { .. })
    }

    pub fn contains(&self, u: &[f64]) -> std::result::Result<(), (usize, f64)> {
        match self {
            ControlRange::Unbounded => Ok(()),
            ControlRange::Bounded { bounds } => {
                for (j, (&x, [lo, hi])) in u.iter().zip(bounds).enumerate() {
                    if !(x >= *lo && x <= *hi) {
                        return Err((j, x));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearControlSystem {
    algebra: LieAlgebra,
    derivation: Derivation,
    controls: Vec<AlgebraVector>,
    range: ControlRange,
}

impl LinearControlSystem {
    pub fn new(
        algebra: LieAlgebra,
        derivation: Derivation,
        controls: Vec<AlgebraVector>,
        range: ControlRange,
    ) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::InvalidInput("at least one control vector is required".into()));
        }
        if derivation.dim() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: derivation.dim(),
            });
        }
        for c in &controls {
            algebra.check_vector(c)?;
        }
        range.validate()?;
        if let ControlRange::Bounded { bounds } = &range {
            if bounds.len() != controls.len() {
                return Err(Error::DimensionMismatch {
                    expected: controls.len(),
                    found: bounds.len(),
                });
            }
        }
        Ok(Self {
            algebra,
            derivation,
            controls,
            range,
        })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn controls(&self) -> &[AlgebraVector] {
        &self.controls
    }

    pub fn range(&self) -> &ControlRange {
        &self.range
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn with_range(mut self, range: ControlRange) -> Result<Self> {
        range.validate()?;
        if let ControlRange::Bounded { bounds } = &range {
            if bounds.len() != self.controls.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.controls.len(),
                    found: bounds.len(),
                });
            }
        }
        self.range = range;
        Ok(self)
    }

    /// The same system written in the basis `f_a = sum_i p[(i, a)] e_i`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<Self> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("basis change is singular".into()))?;
        Ok(Self {
            algebra: self.algebra.change_basis(p)?,
            derivation: self.derivation.change_basis(p)?,
            controls: self.controls.iter().map(|c| &pinv * c).collect(),
            range: self.range.clone(),
        })
    }

    pub fn ad_rank(&self, tol: &Tolerances) -> RankReport {
        ad_rank(self, tol)
    }

    pub fn larc(&self, tol: &Tolerances) -> Result<RankReport> {
        larc(self, tol)
    }

    pub fn decide(&self, tol: &Tolerances) -> Result<Verdict> {
        decide(self, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub dim: usize,
    pub holds: bool,
    #[serde(skip)]
    pub span: Subspace,
}

/// Rank of `span{D^k X_j : k >= 0}`, built block by block as the smallest
/// D-invariant subspace containing the control vectors.
pub fn ad_rank(sys: &LinearControlSystem, tol: &Tolerances) -> RankReport {
    let n = sys.algebra.dim();
    let d = sys.derivation.matrix();
    let mut span = Subspace::span_of(&sys.controls, n, tol.rank);
    // Cayley-Hamilton: at most n - 1 applications of D are ever needed.
    for _ in 0..n {
        let q = span.basis().clone();
        let image = d * &q;
        let next = Subspace::span(&hstack(&[&q, &image], n), tol.rank);
        let grew = next.dim() > span.dim();
        span = next;
        if !grew {
            break;
        }
    }
    RankReport {
        rank: span.dim(),
        dim: n,
        holds: span.dim() == n,
        span,
    }
}

/// Lie algebra rank condition: the smallest D-invariant subalgebra containing
/// the control vectors is all of `g`.
pub fn larc(sys: &LinearControlSystem, tol: &Tolerances) -> Result<RankReport> {
    let n = sys.algebra.dim();
    let span = sys
        .algebra
        .subalgebra_closure(&sys.controls, &[sys.derivation.matrix()], tol)?;
    Ok(RankReport {
        rank: span.dim(),
        dim: n,
        holds: span.dim() == n,
        span,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ternary {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpennessFacts {
    pub a_open: Ternary,
    pub astar_open: Ternary,
    pub provenance: Vec<String>,
}

/// Openness of `A` and `A*` as far as the rank conditions decide it.
pub fn openness_inference(ad: &RankReport, larc: &RankReport, bounded: bool) -> OpennessFacts {
    let mut provenance = Vec::new();
    let (mut a, mut astar) = (Ternary::Unknown, Ternary::Unknown);
    if ad.holds {
        a = Ternary::Yes;
        astar = Ternary::Yes;
        provenance.push("ad-rank condition holds: e is interior to A_t and A*_t for all t > 0".into());
    } else if !larc.holds {
        // The time-reversed system has derivation -D and the same closure.
        a = Ternary::No;
        astar = Ternary::No;
        provenance.push(format!(
            "Lie algebra rank condition fails (rank {} < {}): A and A* have empty interior",
            larc.rank, larc.dim
        ));
    } else {
        provenance.push(
            "ad-rank fails while the Lie algebra rank condition holds: openness undecided".into(),
        );
    }
    if bounded {
        provenance.push("bounded system: A is open if and only if A* is open".into());
        match (a, astar) {
            (Ternary::Unknown, known) | (known, Ternary::Unknown) if known != Ternary::Unknown => {
                a = known;
                astar = known;
            }
            _ => {}
        }
    }
    OpennessFacts {
        a_open: a,
        astar_open: astar,
        provenance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Controllable,
    NotControllable,
    Unknown,
    OutOfTheoremScope,
}

/// The rule a certificate entry rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Solvability / nilpotency hypotheses of the decision rules.
    StructureHypothesis,
    /// `span{D^k X_j} = g` implies `A`, `A*` open.
    AdRankOpenness,
    /// Krener: without the Lie algebra rank condition `A` has no interior.
    RankConditionInterior,
    /// Bounded systems: `A` open iff `A*` open.
    BoundedOpennessSymmetry,
    /// Generalized eigenspace splitting of the derivation.
    SpectralSplitting,
    /// Solvable group, `A` and `A*` open, spectrum on the imaginary axis => controllable.
    SolvableSufficiency,
    /// Nilpotent group, bounded range: controllable iff `A` open and `G = G0`.
    NilpotentBoundedCharacterization,
}

impl Anchor {
    pub fn describe(self) -> &'static str {
        match self {
            Anchor::StructureHypothesis => "structure hypothesis (solvable / nilpotent group)",
            Anchor::AdRankOpenness => "ad-rank condition implies A and A* open",
            Anchor::RankConditionInterior => "Lie algebra rank condition is necessary for int A != empty",
            Anchor::BoundedOpennessSymmetry => "bounded system: A open iff A* open",
            Anchor::SpectralSplitting => "derivation splitting g = g+ + g- + g0",
            Anchor::SolvableSufficiency => {
                "solvable G, A and A* open, spectrum of D on the imaginary axis => controllable"
            }
            Anchor::NilpotentBoundedCharacterization => {
                "nilpotent G, bounded system: controllable iff A open and G = G0"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub condition: String,
    pub result: String,
    pub anchor: Anchor,
    pub rule: &'static str,
}

impl Certificate {
    fn new(anchor: Anchor, condition: impl Into<String>, result: impl Into<String>) -> Self {
        Self {
            condition: condition.into(),
            result: result.into(),
            anchor,
            rule: anchor.describe(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub reason: String,
    pub certificates: Vec<Certificate>,
    pub openness: OpennessFacts,
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn cites(&self, anchor: Anchor) -> bool {
        self.certificates.iter().any(|c| c.anchor == anchor)
    }
}

/// Everything the engine computed on the way to a verdict.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub class: ClassReport,
    pub ad_rank: RankReport,
    pub larc: RankReport,
    pub splitting: SpectralSplitting,
    pub openness: OpennessFacts,
}

pub fn analyze(sys: &LinearControlSystem, tol: &Tolerances) -> Result<Analysis> {
    let class = sys.algebra.classify(tol);
    let ad = ad_rank(sys, tol);
    let lr = larc(sys, tol)?;
    let splitting = sys.derivation.spectral_split(tol)?;
    let openness = openness_inference(&ad, &lr, sys.range.is_bounded());
    Ok(Analysis {
        class,
        ad_rank: ad,
        larc: lr,
        splitting,
        openness,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

pub fn decide(sys: &LinearControlSystem, tol: &Tolerances) -> Result<Verdict> {
    let an = analyze(sys, tol)?;
    Ok(decide_from(&an, sys.range.is_bounded()))
}

/// Rule chain over a precomputed [`Analysis`].
pub fn decide_from(an: &Analysis, bounded: bool) -> Verdict {
    let mut certs = Vec::new();
    let class = an.class.class;
    let (dp, dm, dz) = an.splitting.dims();
    let spectrum_zero = an.splitting.is_all_zero();
    let warnings = an.splitting.warnings.clone();
    let clean = warnings.is_empty();

    certs.push(Certificate::new(
        Anchor::StructureHypothesis,
        "algebra class",
        format!(
            "{class:?} (derived dims {:?}, lower central dims {:?})",
            an.class.derived_dims, an.class.lower_central_dims
        ),
    ));
    certs.push(Certificate::new(
        Anchor::AdRankOpenness,
        "ad-rank: span{D^k X_j} = g",
        format!("{} (rank {} of {})", yes_no(an.ad_rank.holds), an.ad_rank.rank, an.ad_rank.dim),
    ));
    certs.push(Certificate::new(
        Anchor::RankConditionInterior,
        "Lie algebra rank condition",
        format!("{} (rank {} of {})", yes_no(an.larc.holds), an.larc.rank, an.larc.dim),
    ));
    if bounded {
        certs.push(Certificate::new(
            Anchor::BoundedOpennessSymmetry,
            "control range",
            "bounded",
        ));
    }
    certs.push(Certificate::new(
        Anchor::SpectralSplitting,
        "all eigenvalues of D have zero real part (g = g0)",
        format!(
            "{} (dim g+ = {dp}, dim g- = {dm}, dim g0 = {dz}{})",
            yes_no(spectrum_zero),
            if clean { "" } else { ", spectral warnings present" }
        ),
    ));

    let openness = an.openness.clone();
    let a = openness.a_open;
    let astar = openness.astar_open;

    let verdict = |status, reason: String, certs: Vec<Certificate>| Verdict {
        status,
        reason,
        certificates: certs,
        openness: openness.clone(),
        warnings: warnings.clone(),
    };

    if !class.is_solvable() {
        return verdict(
            Status::OutOfTheoremScope,
            "group is not solvable; the decision rules assume solvability".into(),
            certs,
        );
    }

    if a == Ternary::Yes && astar == Ternary::Yes && spectrum_zero && clean {
        certs.push(Certificate::new(
            Anchor::SolvableSufficiency,
            "solvable, A and A* open, spectrum on the imaginary axis",
            "holds",
        ));
        return verdict(
            Status::Controllable,
            "sufficient condition for solvable groups is satisfied".into(),
            certs,
        );
    }

    if class.is_nilpotent() && bounded {
        match a {
            Ternary::No => {
                certs.push(Certificate::new(
                    Anchor::NilpotentBoundedCharacterization,
                    "A open",
                    "fails",
                ));
                return verdict(
                    Status::NotControllable,
                    "bounded nilpotent system whose reachable set is not open".into(),
                    certs,
                );
            }
            Ternary::Yes if !spectrum_zero && clean => {
                certs.push(Certificate::new(
                    Anchor::NilpotentBoundedCharacterization,
                    "A open and G = G0",
                    format!("A open, but G != G0 (dim g+ = {dp}, dim g- = {dm})"),
                ));
                return verdict(
                    Status::NotControllable,
                    "bounded nilpotent system with A open but g+ or g- nontrivial".into(),
                    certs,
                );
            }
            _ => {}
        }
    }

    let reason = if !clean {
        "spectrum is numerically ambiguous near the imaginary axis".to_string()
    } else if a != Ternary::Yes {
        "openness of A could not be established (ad-rank fails)".to_string()
    } else if !spectrum_zero && !bounded {
        "unbounded system with eigenvalues off the imaginary axis; no rule applies".to_string()
    } else {
        "derivation has eigenvalues off the imaginary axis and the group is not nilpotent".to_string()
    };
    verdict(Status::Unknown, reason, certs)
}
