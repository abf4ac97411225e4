//! Discrete space-time norms.
//!
//! `X^{s,b}`: each mode is demodulated, `b(n, t) = e^{-i Q(n) t} a(n, t)`, so
//! its time transform is centred on `tau - Q(n) = 0`. With
//! `B(n, l_j) = DFT_k[b(n, t_k)]` and `l_j = 2 pi j / (K dt)` for
//! `j in [-K/2, K/2)`,
//!
//! `||v||^2 = sum_n <n>^{2s} (dt / K) sum_j <l_j>^{2b} |B(n, l_j)|^2`,
//!
//! which at `s = b = 0` is exactly `dt sum_k sum_n |a(n, t_k)|^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::spacetime::{SpaceTimeField, Window};
use crate::error::{Error, Result};
use crate::spectral::grid::{smooth_size, PhysGrid, Workspace};
use crate::torus::FreqIndex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XsbParams {
    pub s: f64,
    pub b: f64,
}

impl XsbParams {
    pub const fn new(s: f64, b: f64) -> Self {
        Self { s, b }
    }
}

/// Share of time-spectral mass in the top tenth of the resolved band above
/// which a warning is logged.
const ALIAS_WARN: f64 = 1e-6;

pub fn xsb_norm(v: &SpaceTimeField, p: XsbParams) -> Result<f64> {
    if v.window() != Window::Applied {
        return Err(Error::WindowNotApplied);
    }
    let grid = *v.grid();
    let k_len = grid.len;
    let first = &v.slices()[0];
    let side = first.side();
    let scale = first.scale() as i64;
    let torus = *first.torus();
    let fft = FftPlanner::new().plan_fft_forward(k_len);
    let dl = std::f64::consts::TAU / (k_len as f64 * grid.dt);
    let weights_t: Vec<f64> = (0..k_len)
        .map(|j| {
            let jj = if j < k_len.div_ceil(2) {
                j as i64
            } else {
                j as i64 - k_len as i64
            };
            let l = jj as f64 * dl;
            (1.0 + l * l).powf(p.b)
        })
        .collect();
    let high_band: Vec<bool> = (0..k_len)
        .map(|j| {
            let jj = if j < k_len.div_ceil(2) { j } else { k_len - j };
            jj as f64 > 0.9 * (k_len as f64 / 2.0)
        })
        .collect();

    let per_mode: Vec<(f64, f64, f64)> = (0..side * side)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![Complex64::new(0.0, 0.0); k_len],
                    vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                )
            },
            |(buf, scratch), i| {
                let n = FreqIndex::new((i / side) as i64 - scale, (i % side) as i64 - scale);
                let mut any = false;
                for (k, x) in buf.iter_mut().enumerate() {
                    let a = v.slices()[k].raw()[i];
                    any |= a.norm_sqr() > 0.0;
                    *x = a * Complex64::cis(-torus.qform(n) * grid.time(k));
                }
                if !any {
                    return (0.0, 0.0, 0.0);
                }
                fft.process_with_scratch(buf, scratch);
                let mut weighted = 0.0;
                let mut total = 0.0;
                let mut high = 0.0;
                for j in 0..k_len {
                    let e = buf[j].norm_sqr();
                    weighted += weights_t[j] * e;
                    total += e;
                    if high_band[j] {
                        high += e;
                    }
                }
                let wn = (1.0 + n.norm_sq() as f64).powf(p.s);
                (wn * weighted, total, high)
            },
        )
        .collect();
    let (mut acc, mut total, mut high) = (0.0, 0.0, 0.0);
    for (a, t, h) in per_mode {
        acc += a;
        total += t;
        high += h;
    }
    if total > 0.0 && high / total > ALIAS_WARN {
        log::warn!(
            "X^{{s,b}} norm: {:.2e} of the time-spectral mass lies near the resolution limit; refine dt",
            high / total
        );
    }
    Ok((acc * grid.dt / k_len as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn parse(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if [2.0, 3.0, 4.0].contains(&p) {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::UnsupportedExponent(p))
        }
    }
}

/// `(dt sum_k mean_x |v(t_k, x)|^p)^{1/p}` with the spatial mean taken on a
/// padded grid of at least `oversample (2N + 1)` points per axis; `p = inf`
/// gives the grid maximum. Exact for `p in {2, 4}` once `oversample >= 2`.
pub fn lp_norm(v: &SpaceTimeField, p: f64, spatial_oversample: usize) -> Result<f64> {
    let e = Exponent::parse(p)?;
    if spatial_oversample < 2 {
        return Err(Error::InvalidArgument(format!(
            "spatial oversampling must be at least 2, got {spatial_oversample}"
        )));
    }
    let grid = PhysGrid::new(smooth_size(spatial_oversample * (2 * v.scale() as usize + 1)));
    let per_time: Vec<f64> = v
        .slices()
        .par_iter()
        .map_init(Workspace::default, |ws, s| {
            if s.max_abs() == 0.0 {
                return 0.0;
            }
            let vals = grid.synthesize(s, ws);
            match e {
                Exponent::Infinity => vals.iter().map(|z| z.norm()).fold(0.0, f64::max),
                Exponent::Finite(p) => {
                    let sum: f64 = if p == 4.0 {
                        vals.iter().map(|z| z.norm_sqr().powi(2)).sum()
                    } else if p == 2.0 {
                        vals.iter().map(|z| z.norm_sqr()).sum()
                    } else {
                        vals.iter().map(|z| z.norm().powf(p)).sum()
                    };
                    sum / vals.len() as f64
                }
            }
        })
        .collect();
    Ok(match e {
        Exponent::Infinity => per_time.into_iter().fold(0.0, f64::max),
        Exponent::Finite(p) => (v.grid().dt * per_time.into_iter().sum::<f64>()).powf(1.0 / p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::spacetime::TimeGrid;
    use crate::spectral::cutoff::phi;
    use crate::spectral::SpectralField;
    use crate::torus::TorusSpec;

    fn sample_field(scale: u64) -> SpectralField {
        SpectralField::from_fn(scale, TorusSpec::sqrt2(), |n| {
            Complex64::new(1.0 / (1.0 + n.norm()), 0.3 * n.n1 as f64 / (1 + n.norm_sq()) as f64)
        })
    }

    #[test]
    fn plancherel_reduction() {
        let u = sample_field(4);
        let g = TimeGrid::centered(2.0, 256);
        let v = SpaceTimeField::free_wave(g, &u).windowed(1.0).unwrap();
        let x = xsb_norm(&v, XsbParams::new(0.0, 0.0)).unwrap();
        let l2 = v.l2_norm();
        assert!((x - l2).abs() < 1e-10 * l2);
        let l2_grid = lp_norm(&v, 2.0, 2).unwrap();
        assert!((l2_grid - l2).abs() < 1e-10 * l2);
    }

    #[test]
    fn pending_window_is_rejected() {
        let u = sample_field(2);
        let v = SpaceTimeField::free_wave(TimeGrid::centered(2.0, 32), &u);
        assert!(matches!(
            xsb_norm(&v, XsbParams::new(0.0, 0.0)),
            Err(Error::WindowNotApplied)
        ));
    }

    #[test]
    fn monotone_in_s_and_b() {
        let u = sample_field(3);
        let v = SpaceTimeField::free_wave(TimeGrid::centered(2.0, 512), &u)
            .windowed(1.0)
            .unwrap();
        let mut last = 0.0;
        for (s, b) in [(0.0, 0.0), (0.1, 0.0), (0.1, 0.3), (0.5, 0.3), (0.5, 0.51)] {
            let x = xsb_norm(&v, XsbParams::new(s, b)).unwrap();
            assert!(x >= last);
            last = x;
        }
    }

    #[test]
    fn unsupported_exponent() {
        let u = sample_field(2);
        let v = SpaceTimeField::free_wave(TimeGrid::centered(2.0, 16), &u);
        assert!(matches!(lp_norm(&v, 5.0, 2), Err(Error::UnsupportedExponent(_))));
        assert!(lp_norm(&v, f64::INFINITY, 2).is_ok());
    }

    #[test]
    fn spatially_constant_mode_l4() {
        // |v| = |a| phi(t): L^4 norm is |a| (int phi^4)^{1/4}
        let a = Complex64::new(0.8, -0.6) * 1.5;
        let u = SpectralField::single_mode(2, TorusSpec::golden(), FreqIndex::new(1, 1), a).unwrap();
        let g = TimeGrid::centered(1.0, 4000);
        let v = SpaceTimeField::free_wave(g, &u).windowed(1.0).unwrap();
        let got = lp_norm(&v, 4.0, 2).unwrap();
        let h = 1e-5;
        let int: f64 = (0..200_000).map(|k| phi(-1.0 + (k as f64 + 0.5) * h).powi(4) * h).sum();
        let expect = a.norm() * int.powf(0.25);
        assert!((got - expect).abs() < 1e-8 * expect, "{got} vs {expect}");
    }
}
