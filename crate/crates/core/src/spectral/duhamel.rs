//! The cut-off Duhamel map
//! `Gamma(v)(t) = i phi_d(t) int_0^t e^{i (t - s) Q} P N(phi_d(s) v(s)) ds`
//! and its Picard iteration.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::phi_delta;
use super::field::SpectralField;
use super::grid::Workspace;
use super::wick::WickPlan;
use crate::error::{Error, Result};
use crate::norms::{xsb_norm, SpaceTimeField, TimeGrid, Window, XsbParams};
use crate::torus::FreqIndex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaOptions {
    /// Minimum number of samples per unit `delta`.
    pub min_samples_per_delta: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        Self {
            min_samples_per_delta: 32,
        }
    }
}

pub fn gamma_map(input: &SpaceTimeField, delta: f64, scale: u64) -> Result<SpaceTimeField> {
    gamma_map_with(input, delta, scale, &GammaOptions::default())
}

/// Cumulative integral of `g` from sample `k0`, fourth order in the step:
/// interior intervals use `h (-g[j-1] + 13 g[j] + 13 g[j+1] - g[j+2]) / 24`,
/// the end intervals the one-sided four-point rule.
fn cumulative(g: &[Complex64], h: f64, k0: usize) -> Vec<Complex64> {
    let n = g.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; n];
    if n < 4 {
        // trapezoid fallback for tiny grids
        for j in k0..n.saturating_sub(1) {
            out[j + 1] = out[j] + (g[j] + g[j + 1]) * (h / 2.0);
        }
        for j in (1..=k0).rev() {
            out[j - 1] = out[j] - (g[j - 1] + g[j]) * (h / 2.0);
        }
        return out;
    }
    let c = h / 24.0;
    let interval = |j: usize| -> Complex64 {
        if j == 0 {
            (g[0] * 9.0 + g[1] * 19.0 - g[2] * 5.0 + g[3]) * c
        } else if j + 2 >= n {
            (g[j - 2] - g[j - 1] * 5.0 + g[j] * 19.0 + g[j + 1] * 9.0) * c
        } else {
            ((g[j] + g[j + 1]) * 13.0 - g[j - 1] - g[j + 2]) * c
        }
    };
    for j in k0..n - 1 {
        out[j + 1] = out[j] + interval(j);
    }
    for j in (1..=k0).rev() {
        out[j - 1] = out[j] - interval(j - 1);
    }
    out
}

pub fn gamma_map_with(input: &SpaceTimeField, delta: f64, scale: u64, opts: &GammaOptions) -> Result<SpaceTimeField> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let grid = *input.grid();
    let per_delta = delta / grid.dt;
    if per_delta < opts.min_samples_per_delta as f64 {
        return Err(Error::GridTooCoarse {
            samples_per_delta: per_delta,
            required: opts.min_samples_per_delta,
        });
    }
    let slack = 1e-9 * delta;
    if grid.t0 > -2.0 * delta + slack || grid.last() < 2.0 * delta - grid.dt - slack {
        return Err(Error::GridTooShort {
            lo: -2.0 * delta,
            hi: 2.0 * delta,
        });
    }
    let k0 = grid
        .zero_index()
        .ok_or_else(|| Error::InvalidArgument("time grid must contain t = 0".into()))?;
    let torus = *input.torus();
    let plan = WickPlan::new(scale);

    // nonlinearity at each time, rotated back to the free frame
    let forced: Vec<SpectralField> = input
        .slices()
        .par_iter()
        .enumerate()
        .map_init(Workspace::default, |ws, (k, v)| {
            let t = grid.time(k);
            let w = phi_delta(t, delta);
            if w == 0.0 {
                return SpectralField::zeros(scale, torus);
            }
            let u = v.rescaled(scale).scaled(Complex64::new(w, 0.0));
            let mut f = plan.wick(&u, ws);
            f.rotate(-t);
            f
        })
        .collect();

    let side = 2 * scale as usize + 1;
    let s = scale as i64;
    let mut out: Vec<SpectralField> = vec![SpectralField::zeros(scale, torus); grid.len];
    let columns: Vec<(usize, Vec<Complex64>)> = (0..side * side)
        .into_par_iter()
        .filter_map(|i| {
            let g: Vec<Complex64> = forced.iter().map(|f| f.raw()[i]).collect();
            if g.iter().all(|z| z.norm_sqr() == 0.0) {
                return None;
            }
            Some((i, cumulative(&g, grid.dt, k0)))
        })
        .collect();
    for (i, col) in columns {
        let n = FreqIndex::new((i / side) as i64 - s, (i % side) as i64 - s);
        let q = torus.qform(n);
        for (k, integral) in col.into_iter().enumerate() {
            let t = grid.time(k);
            let w = phi_delta(t, delta);
            if w != 0.0 {
                out[k].raw_mut()[i] = Complex64::new(0.0, w) * Complex64::cis(q * t) * integral;
            }
        }
    }
    SpaceTimeField::new(grid, out, Window::Applied)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub delta: f64,
    pub s0: f64,
    pub b0: f64,
    pub max_iter: usize,
    /// Stop once the successive difference falls below this (in X^{s0,b0}).
    pub tol: f64,
    /// Samples on `[-2 delta, 2 delta)`.
    pub samples: usize,
    /// Keep every iterate rather than only the last one.
    pub keep_iterates: bool,
    pub divergence_ratio: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            s0: 0.1,
            b0: 0.51,
            max_iter: 40,
            tol: 1e-10,
            samples: 1024,
            keep_iterates: false,
            divergence_ratio: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PicardStatus {
    Converged,
    MaxIter,
    Diverged { iterate: usize, ratio: f64 },
}

#[derive(Clone, Debug)]
pub struct PicardRun {
    pub delta: f64,
    pub s0: f64,
    pub b0: f64,
    /// `||w_{k+1} - w_k||` in `X^{s0,b0}`, `k = 0, 1, ...`.
    pub diffs: Vec<f64>,
    /// `diffs[k+1] / diffs[k]`; length is the iterate count minus 2.
    pub ratios: Vec<f64>,
    /// Number of iterates produced, counting `w_0 = 0`.
    pub iterate_count: usize,
    /// All iterates if requested, otherwise just the last one.
    pub iterates: Vec<SpaceTimeField>,
    /// `||w - Gamma(data + w)||_{L^2_{t,x}}` for the last iterate.
    pub residual: f64,
    pub status: PicardStatus,
}

impl PicardRun {
    pub fn last(&self) -> &SpaceTimeField {
        self.iterates.last().expect("at least one iterate")
    }

    /// Turn a reported divergence into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            PicardStatus::Diverged { iterate, ratio } => Err(Error::Divergence { iterate, ratio }),
            _ => Ok(self),
        }
    }

    /// First iterate index (1-based over `ratios`) at which the ratio drops
    /// below one, if any.
    pub fn first_contraction(&self) -> Option<usize> {
        self.ratios.iter().position(|&r| r < 1.0).map(|i| i + 1)
    }
}

/// The forcing term `phi_d(t) S(t) u0` on the Picard grid.
pub fn picard_data(u0: &SpectralField, cfg: &PicardConfig) -> Result<SpaceTimeField> {
    let grid = TimeGrid::centered(2.0 * cfg.delta, cfg.samples);
    SpaceTimeField::free_wave(grid, u0).windowed(cfg.delta)
}

/// `w_0 = 0`, `w_{k+1} = Gamma(phi_d S(t) u0 + w_k)`.
pub fn picard(u0: &SpectralField, cfg: &PicardConfig) -> Result<PicardRun> {
    let scale = u0.scale();
    let data = picard_data(u0, cfg)?;
    let xp = XsbParams::new(cfg.s0, cfg.b0);
    let mut w = SpaceTimeField::zeros(*data.grid(), scale, *u0.torus());
    let mut kept = vec![];
    if cfg.keep_iterates {
        kept.push(w.clone());
    }
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    let mut count = 1;
    let mut status = PicardStatus::MaxIter;
    for _ in 0..cfg.max_iter {
        let next = gamma_map(&data.axpy(1.0, &w)?, cfg.delta, scale)?;
        let d = xsb_norm(&next.sub(&w)?, xp)?;
        count += 1;
        if let Some(&prev) = diffs.last() {
            let r = if prev > 0.0 { d / prev } else { 0.0 };
            ratios.push(r);
            if r > cfg.divergence_ratio || !d.is_finite() {
                diffs.push(d);
                w = next;
                if cfg.keep_iterates {
                    kept.push(w.clone());
                }
                status = PicardStatus::Diverged {
                    iterate: count - 1,
                    ratio: r,
                };
                break;
            }
        }
        diffs.push(d);
        w = next;
        if cfg.keep_iterates {
            kept.push(w.clone());
        }
        if d < cfg.tol {
            status = PicardStatus::Converged;
            break;
        }
    }
    let residual = if matches!(status, PicardStatus::Diverged { .. }) {
        f64::INFINITY
    } else {
        gamma_map(&data.axpy(1.0, &w)?, cfg.delta, scale)?.sub(&w)?.l2_norm()
    };
    if !cfg.keep_iterates {
        kept.push(w);
    }
    Ok(PicardRun {
        delta: cfg.delta,
        s0: cfg.s0,
        b0: cfg.b0,
        diffs,
        ratios,
        iterate_count: count,
        iterates: kept,
        residual,
        status,
    })
}
