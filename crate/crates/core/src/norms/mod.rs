//! Space-time norms, Strichartz and time-localization scans, and the matrix
//! Cauchy-Schwarz check.

mod matrix;
mod scans;
mod spacetime;
mod xsb;

pub use matrix::{matrix_cs_check, CsOrientation, Matrix};
pub use scans::{
    flat_data, l4_time_grid, strichartz_ratio, strichartz_scan, time_localization_scan, windowed_free_l4, FieldFamily,
    LocalizationVariant, ScanRecord, StrichartzReport, TimeLocReport,
};
pub use spacetime::{SpaceTimeField, TimeGrid, Window, EDGE_TOL};
pub use xsb::{lp_norm, xsb_norm, Exponent, XsbParams};
