use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::cutoff::phi_delta;
use crate::spectral::SpectralField;
use crate::torus::TorusSpec;

/// Uniform time grid `t_k = t0 + k dt`, `k = 0..len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// `len` samples on `[-half_width, half_width)`; when `len` is even the
    /// sample `len / 2` sits exactly at `t = 0`.
    pub fn centered(half_width: f64, len: usize) -> Self {
        assert!(len >= 2 && half_width > 0.0);
        let dt = 2.0 * half_width / len as f64;
        Self {
            t0: -(len as f64 / 2.0).floor() * dt,
            dt,
            len,
        }
    }

    /// Symmetric grid `t_k = (k - (len-1)/2) dt` with step at most `max_dt`
    /// covering `[-half_width, half_width]` (odd `len`, so `0` is included).
    pub fn covering(half_width: f64, max_dt: f64) -> Self {
        let half = (half_width / max_dt).ceil() as usize;
        let dt = half_width / half as f64;
        Self {
            t0: -(half as f64) * dt,
            dt,
            len: 2 * half + 1,
        }
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.time(k))
    }

    pub fn last(&self) -> f64 {
        self.time(self.len - 1)
    }

    /// Index of the sample at `t = 0`, if any.
    pub fn zero_index(&self) -> Option<usize> {
        let k = (-self.t0 / self.dt).round();
        (k >= 0.0 && (k as usize) < self.len && self.time(k as usize).abs() <= 1e-9 * self.dt).then_some(k as usize)
    }

    /// Same span with the step halved (`2 len` samples).
    pub fn refined(&self) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt / 2.0,
            len: 2 * self.len,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Applied,
    Pending,
}

/// Coefficients `a(n, t_k)` on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: TimeGrid,
    slices: Vec<SpectralField>,
    window: Window,
}

/// Tolerance for the vanishing-edge check of windowed fields.
pub const EDGE_TOL: f64 = 1e-12;

impl SpaceTimeField {
    pub fn new(grid: TimeGrid, slices: Vec<SpectralField>, window: Window) -> Result<Self> {
        if slices.len() != grid.len || slices.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} slices for a grid of {} samples",
                slices.len(),
                grid.len
            )));
        }
        for s in &slices[1..] {
            slices[0].check_compatible(s)?;
        }
        if slices.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficients".into()));
        }
        let field = Self { grid, slices, window };
        if window == Window::Applied && !field.edges_vanish() {
            return Err(Error::WindowNotApplied);
        }
        Ok(field)
    }

    pub fn zeros(grid: TimeGrid, scale: u64, torus: TorusSpec) -> Self {
        Self {
            grid,
            slices: vec![SpectralField::zeros(scale, torus); grid.len],
            window: Window::Applied,
        }
    }

    /// Sample `t -> f(t)` on the grid; the window flag is left pending.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> SpectralField) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect(), Window::Pending)
    }

    /// `t -> S(t) u0`, unwindowed.
    pub fn free_wave(grid: TimeGrid, u0: &SpectralField) -> Self {
        Self {
            grid,
            slices: grid.times().map(|t| u0.propagated(t)).collect(),
            window: Window::Pending,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn slices(&self) -> &[SpectralField] {
        &self.slices
    }

    /// Every slice re-embedded at `scale` (truncating when smaller).
    pub fn rescaled(&self, scale: u64) -> Self {
        Self {
            grid: self.grid,
            slices: self.slices.iter().map(|s| s.rescaled(scale)).collect(),
            window: self.window,
        }
    }

    pub fn scale(&self) -> u64 {
        self.slices[0].scale()
    }

    pub fn torus(&self) -> &TorusSpec {
        self.slices[0].torus()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    fn edges_vanish(&self) -> bool {
        let first = self.slices[0].max_abs();
        let last = self.slices[self.slices.len() - 1].max_abs();
        first < EDGE_TOL && last < EDGE_TOL
    }

    /// Multiply by `phi(t / delta)` and mark the window as applied.
    pub fn windowed(&self, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        for (k, s) in out.slices.iter_mut().enumerate() {
            let w = phi_delta(self.grid.time(k), delta);
            *s = s.scaled(Complex64::new(w, 0.0));
        }
        out.window = Window::Applied;
        if !out.edges_vanish() {
            return Err(Error::GridTooShort { lo: -delta, hi: delta });
        }
        Ok(out)
    }

    /// Assert that the field already vanishes at the grid edges.
    pub fn mark_windowed(mut self) -> Result<Self> {
        if !self.edges_vanish() {
            return Err(Error::WindowNotApplied);
        }
        self.window = Window::Applied;
        Ok(self)
    }

    /// `(dt sum_k sum_n |a(n, t_k)|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dt * self.slices.iter().map(|s| s.mass()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::FieldMismatch("time grids differ".into()));
        }
        self.slices[0].check_compatible(&other.slices[0])
    }

    /// `self + c * other`; the result is windowed only if both inputs are.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| {
                let mut s = a.clone();
                s.axpy(Complex64::new(c, 0.0), b);
                s
            })
            .collect();
        let window = if self.window == Window::Applied && other.window == Window::Applied {
            Window::Applied
        } else {
            Window::Pending
        };
        Ok(Self {
            grid: self.grid,
            slices,
            window,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            slices: self.slices.iter().map(|s| s.scaled(Complex64::new(c, 0.0))).collect(),
            window: self.window,
        }
    }
}
