//! Exponent scans for free waves.
//!
//! The space-time `L^4` norm of a windowed free wave is computed exactly up
//! to time aliasing: `mean_x |S(t) f|^4` is a trigonometric polynomial in `t`
//! whose frequencies are bounded by `2 (Q_max - Q_min)` over the support of
//! `f`, and the Fourier transform of `phi^4` is below `1e-13` of its peak
//! beyond `|w| = 800`. Sampling `t` with
//! `2 pi / dt >= 2 (Q_max - Q_min) + 800 / delta` therefore makes the
//! rectangle rule exact to that level.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spacetime::{SpaceTimeField, TimeGrid};
use super::xsb::{xsb_norm, XsbParams};
use crate::counting::{fit_exponent, FitResult};
use crate::error::{Error, Result};
use crate::randomfield::{sample_data, GaussianEnsemble};
use crate::spectral::cutoff::phi_delta;
use crate::spectral::grid::{PhysGrid, Workspace};
use crate::spectral::SpectralField;
use crate::torus::{ball_points, FreqIndex, TorusSpec};

/// Decay point of the transform of `phi^4` (unit window).
const PHI4_BANDWIDTH: f64 = 800.0;

/// One cell of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub gamma: String,
    #[serde(rename = "N")]
    pub scale: u64,
    pub seed: Option<u64>,
    pub family: String,
    pub delta: f64,
    pub p: f64,
    pub s: f64,
    pub b: f64,
    pub value: f64,
}

/// Range of `Q` over the nonzero modes of `f`.
fn q_range(f: &SpectralField) -> (f64, f64) {
    let torus = f.torus();
    f.support()
        .into_iter()
        .map(|n| torus.qform(n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q), hi.max(q)))
}

/// Time grid covering `[-delta, delta]` fine enough for the `L^4` norm of
/// `phi_delta(t) S(t) f`.
pub fn l4_time_grid(f: &SpectralField, delta: f64) -> TimeGrid {
    let (lo, hi) = q_range(f);
    let spread = if hi >= lo { 2.0 * (hi - lo) } else { 0.0 };
    let max_dt = std::f64::consts::TAU / (spread + PHI4_BANDWIDTH / delta);
    TimeGrid::covering(delta, max_dt)
}

/// `S(t) f` with the phase split as `e^{i n1^2 t} e^{i gamma n2^2 t}`, so
/// only `2 (2N + 1)` exponentials are evaluated.
fn separable_propagate(f: &SpectralField, t: f64) -> SpectralField {
    let s = f.scale() as i64;
    let side = f.side();
    let gamma = f.torus().gamma();
    let p1: Vec<Complex64> = (-s..=s).map(|k| Complex64::cis((k * k) as f64 * t)).collect();
    let p2: Vec<Complex64> = (-s..=s).map(|k| Complex64::cis(gamma * (k * k) as f64 * t)).collect();
    let mut out = f.clone();
    for (r, row) in out.raw_mut().chunks_mut(side).enumerate() {
        for (x, q) in row.iter_mut().zip(&p2) {
            *x *= p1[r] * q;
        }
    }
    out
}

/// `||phi_delta(t) S(t) f||_{L^4_{t,x}}`, streamed over time samples.
pub fn windowed_free_l4(f: &SpectralField, delta: f64) -> f64 {
    if f.max_abs() == 0.0 {
        return 0.0;
    }
    let grid = l4_time_grid(f, delta);
    let phys = PhysGrid::for_product(4, f.scale(), 0);
    let per_time: Vec<f64> = (0..grid.len)
        .into_par_iter()
        .map_init(Workspace::default, |ws, k| {
            let t = grid.time(k);
            let w = phi_delta(t, delta);
            if w == 0.0 {
                return 0.0;
            }
            let vals = phys.synthesize(&separable_propagate(f, t), ws);
            let mean = vals.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / vals.len() as f64;
            w.powi(4) * mean
        })
        .collect();
    (grid.dt * per_time.into_iter().sum::<f64>()).powf(0.25)
}

/// `||phi(t) S(t) f||_{L^4_{t,x}} / ||f||_{L^2}`.
pub fn strichartz_ratio(f: &SpectralField) -> f64 {
    windowed_free_l4(f, 1.0) / f.l2_norm()
}

/// Flat data `a_n = (#ball)^{-1/2}` on the whole ball.
pub fn flat_data(scale: u64, torus: TorusSpec) -> SpectralField {
    let pts = ball_points(scale);
    let a = Complex64::new(1.0 / (pts.len() as f64).sqrt(), 0.0);
    SpectralField::from_modes(scale, torus, pts.into_iter().map(|n| (n, a))).expect("ball points")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub records: Vec<ScanRecord>,
    /// Slope of the largest ratio (random seeds and flat data) against `N`.
    pub fit_max: FitResult,
    pub fit_random: FitResult,
    pub fit_flat: FitResult,
}

/// Ratios for `sample_data(seed, N)` and flat data at every `N`.
pub fn strichartz_scan(scales: &[u64], seeds: &[u64], torus: TorusSpec) -> Result<StrichartzReport> {
    if scales.len() < 2 {
        return Err(Error::InvalidArgument(
            "strichartz scan needs at least two scales".into(),
        ));
    }
    let mut records = Vec::new();
    let (mut pts_max, mut pts_rand, mut pts_flat) = (vec![], vec![], vec![]);
    for &n in scales {
        let mut best_rand: f64 = 0.0;
        for &seed in seeds {
            let f = sample_data(&GaussianEnsemble::new(seed, torus), n);
            let r = strichartz_ratio(&f);
            best_rand = best_rand.max(r);
            records.push(ScanRecord {
                gamma: torus.gamma_string(),
                scale: n,
                seed: Some(seed),
                family: "random".into(),
                delta: 1.0,
                p: 4.0,
                s: 0.0,
                b: 0.0,
                value: r,
            });
        }
        let flat = strichartz_ratio(&flat_data(n, torus));
        records.push(ScanRecord {
            gamma: torus.gamma_string(),
            scale: n,
            seed: None,
            family: "flat".into(),
            delta: 1.0,
            p: 4.0,
            s: 0.0,
            b: 0.0,
            value: flat,
        });
        let nf = n as f64;
        if !seeds.is_empty() {
            pts_rand.push((nf, best_rand));
        }
        pts_flat.push((nf, flat));
        pts_max.push((nf, best_rand.max(flat)));
    }
    let fit_flat = fit_exponent(&pts_flat)?;
    Ok(StrichartzReport {
        fit_max: fit_exponent(&pts_max)?,
        fit_random: if pts_rand.is_empty() {
            fit_flat.clone()
        } else {
            fit_exponent(&pts_rand)?
        },
        fit_flat,
        records,
    })
}

/// Free-wave data used by the localization scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldFamily {
    /// `u = 1` (zero mode only).
    Constant,
    SingleMode {
        n: FreqIndex,
    },
    /// Flat data on the ball of radius `N`.
    Flat {
        #[serde(rename = "N")]
        scale: u64,
    },
    Random {
        seed: u64,
        #[serde(rename = "N")]
        scale: u64,
    },
}

impl FieldFamily {
    pub fn build(&self, torus: TorusSpec) -> SpectralField {
        let one = Complex64::new(1.0, 0.0);
        match self {
            FieldFamily::Constant => SpectralField::single_mode(1, torus, FreqIndex::ZERO, one).unwrap(),
            FieldFamily::SingleMode { n } => {
                let r = (n.norm_sq() as f64).sqrt().ceil().max(1.0) as u64;
                SpectralField::single_mode(r, torus, *n, one).unwrap()
            }
            FieldFamily::Flat { scale } => flat_data(*scale, torus),
            FieldFamily::Random { seed, scale } => sample_data(&GaussianEnsemble::new(*seed, torus), *scale),
        }
    }

    fn label(&self) -> String {
        match self {
            FieldFamily::Constant => "constant".into(),
            FieldFamily::SingleMode { n } => format!("mode{n}"),
            FieldFamily::Flat { .. } => "flat".into(),
            FieldFamily::Random { .. } => "random".into(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            FieldFamily::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case")]
pub enum LocalizationVariant {
    /// `||phi_delta u||_{X^{s,b}}` on `[-2 delta, 2 delta)` with `samples` points.
    Xsb { s: f64, b: f64, samples: usize },
    /// `||phi_delta u||_{L^4_{t,x}}`.
    L4,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeLocReport {
    pub records: Vec<ScanRecord>,
    /// `value ~ delta^slope`.
    pub fit: FitResult,
}

/// Norms of `phi_delta(t) S(t) f` across `delta` and the fitted exponent.
pub fn time_localization_scan(
    deltas: &[f64],
    variant: LocalizationVariant,
    family: &FieldFamily,
    torus: TorusSpec,
) -> Result<TimeLocReport> {
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("deltas must be positive".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("deltas must be strictly decreasing".into()));
    }
    let f = family.build(torus);
    let mut records = Vec::with_capacity(deltas.len());
    let mut pts = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let (value, p, s, b) = match variant {
            LocalizationVariant::Xsb { s, b, samples } => {
                let grid = TimeGrid::centered(2.0 * delta, samples);
                let v = SpaceTimeField::free_wave(grid, &f).windowed(delta)?;
                (xsb_norm(&v, XsbParams::new(s, b))?, 2.0, s, b)
            }
            LocalizationVariant::L4 => (windowed_free_l4(&f, delta), 4.0, 0.0, 0.0),
        };
        pts.push((delta, value));
        records.push(ScanRecord {
            gamma: torus.gamma_string(),
            scale: f.scale(),
            seed: family.seed(),
            family: family.label(),
            delta,
            p,
            s,
            b,
            value,
        });
    }
    Ok(TimeLocReport {
        fit: fit_exponent(&pts)?,
        records,
    })
}
