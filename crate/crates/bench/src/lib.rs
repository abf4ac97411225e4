//! Shared fixtures for the benchmarks.

use wicktorus::randomfield::{sample_data, GaussianEnsemble};
use wicktorus::{FreqIndex, ResonanceQuery, SpectralField, TorusSpec};

pub fn torus() -> TorusSpec {
    TorusSpec::sqrt2()
}

/// Random data truncated to `|n| <= scale`, seed 0.
pub fn field(scale: u64) -> SpectralField {
    sample_data(&GaussianEnsemble::new(0, torus()), scale)
}

/// A query with all three shells at `scale` and a point in the top shell
/// for each fixed slot.
pub fn query(scale: u64) -> (ResonanceQuery, FreqIndex, FreqIndex) {
    let s = scale as i64;
    let q = ResonanceQuery::new((scale, scale, scale), 0.5, 1.0, torus());
    (q, FreqIndex::new(s, 0), FreqIndex::new(-s / 2 - 1, s / 2))
}
