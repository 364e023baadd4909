//! Linear control systems on Lie groups: structure of the Lie algebra, spectral
//! splitting of the drift derivation, rank conditions, a controllability
//! decision engine and numerical simulation on the group.

pub mod algebra;
pub mod corpus;
pub mod derivation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod simulation;
pub mod system;
pub mod tolerance;

pub use algebra::{AlgebraVector, LieAlgebra, StructureClass, Subspace};
pub use derivation::{Derivation, SpectralSplitting};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use system::{ControlRange, LinearControlSystem, Status, Verdict};
pub use tolerance::Tolerances;
