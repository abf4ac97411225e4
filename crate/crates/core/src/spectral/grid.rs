//! Zero-padded physical grids for products of trigonometric polynomials.
//!
//! A field of scale `N` is synthesized on an `M x M` grid `x_j = 2 pi j / M`.
//! Pointwise products of `p` such fields have frequencies up to `p N`, so the
//! coefficient of `n` with `|n_i| <= K` is recovered exactly as long as
//! `M > p N + K`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use crate::torus::TorusSpec;

/// Smallest integer `>= min` with no prime factor above 7.
pub fn smooth_size(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Transform plans for one grid size. Cheap to clone; shareable across
/// threads.
#[derive(Clone)]
pub struct PhysGrid {
    m: usize,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PhysGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhysGrid").field("m", &self.m).finish()
    }
}

/// Scratch buffers reused across transforms on one thread.
#[derive(Default)]
pub struct Workspace {
    rows: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PhysGrid {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            inv: planner.plan_fft_inverse(m),
            fwd: planner.plan_fft_forward(m),
        }
    }

    /// Grid on which a product of `degree` fields of scale `scale` is exact
    /// on output modes up to `out_scale`.
    pub fn for_product(degree: usize, scale: u64, out_scale: u64) -> Self {
        Self::new(smooth_size(degree * scale as usize + out_scale as usize + 1))
    }

    pub fn size(&self) -> usize {
        self.m
    }

    fn scratch_len(&self) -> usize {
        self.inv
            .get_inplace_scratch_len()
            .max(self.fwd.get_inplace_scratch_len())
    }

    /// Values `u(x_j) = sum a_n e^{i n . x_j}` on the grid, stored transposed:
    /// entry `j2 * M + j1` holds `u(x_{j1}, x_{j2})`.
    pub fn synthesize(&self, f: &SpectralField, ws: &mut Workspace) -> Vec<Complex64> {
        let m = self.m;
        let s = f.scale() as i64;
        let side = f.side();
        assert!(side <= m, "grid {m} too small for scale {s}");
        let zero = Complex64::new(0.0, 0.0);
        ws.scratch.resize(self.scratch_len(), zero);
        // rows n1 = -N..=N, each transformed along n2
        ws.rows.clear();
        ws.rows.resize(side * m, zero);
        let raw = f.raw();
        for r in 0..side {
            let row = &mut ws.rows[r * m..(r + 1) * m];
            for c in 0..side {
                let n2 = c as i64 - s;
                row[n2.rem_euclid(m as i64) as usize] = raw[r * side + c];
            }
        }
        self.inv.process_with_scratch(&mut ws.rows, &mut ws.scratch);
        // transpose into out[j2][n1 mod M], then transform along n1
        let mut out = vec![zero; m * m];
        for r in 0..side {
            let col = (r as i64 - s).rem_euclid(m as i64) as usize;
            let row = &ws.rows[r * m..(r + 1) * m];
            for (j2, &v) in row.iter().enumerate() {
                out[j2 * m + col] = v;
            }
        }
        self.inv.process_with_scratch(&mut out, &mut ws.scratch);
        out
    }

    /// Coefficients `(1/M^2) sum_j u(x_j) e^{-i n . x_j}` for `|n| <= scale`,
    /// from values in the transposed layout of [`PhysGrid::synthesize`].
    /// `values` is used as scratch.
    pub fn analyze(&self, values: &mut [Complex64], scale: u64, torus: TorusSpec, ws: &mut Workspace) -> SpectralField {
        let m = self.m;
        assert_eq!(values.len(), m * m);
        let s = scale as i64;
        let zero = Complex64::new(0.0, 0.0);
        ws.scratch.resize(self.scratch_len(), zero);
        // along j1 -> n1
        self.fwd.process_with_scratch(values, &mut ws.scratch);
        let side = 2 * scale as usize + 1;
        assert!(side <= m, "grid {m} too small for scale {s}");
        // gather needed n1 rows, laid out [n1][j2]
        ws.rows.clear();
        ws.rows.resize(side * m, zero);
        for r in 0..side {
            let col = (r as i64 - s).rem_euclid(m as i64) as usize;
            let row = &mut ws.rows[r * m..(r + 1) * m];
            for (j2, v) in row.iter_mut().enumerate() {
                *v = values[j2 * m + col];
            }
        }
        self.fwd.process_with_scratch(&mut ws.rows, &mut ws.scratch);
        let norm = 1.0 / (m * m) as f64;
        let mut out = SpectralField::zeros(scale, torus);
        {
            let raw = out.raw_mut();
            for r in 0..side {
                let row = &ws.rows[r * m..(r + 1) * m];
                for c in 0..side {
                    let n2 = c as i64 - s;
                    raw[r * side + c] = row[n2.rem_euclid(m as i64) as usize] * norm;
                }
            }
        }
        out.project();
        out
    }
}
