//! Group side of a linear control system: exponential coordinates, matrix
//! realizations, trajectory integration and reachable-set sampling.

pub mod bch;
pub mod control;
pub mod model;
pub mod reach;
pub mod realization;
pub mod witness;

pub use bch::{bch_product, nilpotency_class, MAX_BCH_CLASS};
pub use control::ControlFunction;
pub use model::{integrate, CoordinateKind, CoordinateModel, Model, Scheme, StateShape, Trajectory};
pub use reach::{sample_reachable, sample_with, ReachConfig, ReachSample};
pub use realization::{flow_on_group, realization_check, Convention, GroupKind, MatrixRealization, RealizationReport};
pub use witness::{factorization_witness, sign_certificate, GridAxis, SignCertificate, SignVerdict};
