//! Generalized Bessel multipliers over finite-dimensional complex Hilbert
//! spaces.
//!
//! A multiplier M = D_g U C_f chains the analysis operator of one vector
//! system, a symbol matrix U, and the synthesis operator of another system.
//! The crate models the vector systems (Bessel sequences, frames, Riesz
//! bases), assembles multipliers, and certifies the operator-norm, Schatten,
//! positivity, inversion, and perturbation estimates that govern them.
//! Hilbert spaces are C^d; coefficient spaces are C^n.

pub mod error;
pub mod invertibility;
pub mod io;
pub mod multiplier;
pub mod numerics;
pub mod perturbation;
pub mod random;
pub mod sequences;
pub mod symbols;

pub use error::Error;

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix, row-major semantics at the API boundary.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub type Result<T> = std::result::Result<T, Error>;

pub use invertibility::{InverseMethod, InvertibilityReport, RieszInversion, Verdict, VerdictStatus};
pub use multiplier::{Certificate, GeneralizedMultiplier};
pub use numerics::{SingularSpectrum, ToleranceConfig};
pub use perturbation::{ConvergenceExperiment, ConvergenceReport, NormMode, Schedule};
pub use sequences::{FrameBounds, SequenceClass, SequenceKind, SequenceSystem};
pub use symbols::{Symbol, SymbolKind};
