//! Fourier-side representation of the truncated flow: free propagation, the
//! renormalized cubic term, time stepping and the Duhamel contraction.

pub mod cutoff;
mod duhamel;
mod evolve;
mod field;
pub mod grid;
mod wick;

pub use duhamel::{
    gamma_map, gamma_map_with, picard, picard_data, GammaOptions, PicardConfig, PicardRun, PicardStatus,
};
pub use evolve::{energy, evolve, evolve_with, EvolveOptions, Scheme, Trajectory};
pub use field::SpectralField;
pub use wick::{wick_fast, wick_oracle, wick_trilinear, WickPlan};

/// `a_n -> a_n e^{i Q(n) t}`.
pub fn propagate(field: &SpectralField, t: f64) -> SpectralField {
    field.propagated(t)
}
