//! Numerical toolkit for the cubic Wick-ordered Schrödinger equation on an
//! irrational torus: resonance counting, spectral evolution, random data and
//! space-time norms.

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counting;
pub mod error;
pub mod harness;
pub mod norms;
pub mod randomfield;
pub mod spectral;
pub mod torus;

pub use counting::{CountRecord, FitResult, ResonanceQuery};
pub use error::{Error, Result};
pub use norms::SpaceTimeField;
pub use spectral::SpectralField;
pub use torus::{FreqIndex, TorusSpec};
