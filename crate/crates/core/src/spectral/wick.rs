//! The renormalized cubic term
//! `N(f, g, h) = f conj(g) h - <f, g> h - <h, g> f`, `<f, g> = sum f_n conj(g_n)`,
//! which in frequency space keeps only the triples with `n2 != n1, n3` and
//! subtracts the diagonal `f_n conj(g_n) h_n`.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{PhysGrid, Workspace};
use crate::error::Result;
use crate::torus::{in_ball, FreqIndex};

fn check3(f: &SpectralField, g: &SpectralField, h: &SpectralField) -> Result<()> {
    f.check_compatible(g)?;
    f.check_compatible(h)
}

/// Exclusion sum over frequency triples, projected onto `|n| <= out_scale`
/// (default: the input scale). Cost is cubic in the number of modes.
pub fn wick_oracle(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    out_scale: Option<u64>,
) -> Result<SpectralField> {
    check3(f, g, h)?;
    let out_scale = out_scale.unwrap_or(f.scale());
    let mut out = SpectralField::zeros(out_scale, *f.torus());
    let fm: Vec<(FreqIndex, Complex64)> = f.modes().filter(|m| m.1.norm_sqr() > 0.0).collect();
    let gm: Vec<(FreqIndex, Complex64)> = g.modes().filter(|m| m.1.norm_sqr() > 0.0).collect();
    let hm: Vec<(FreqIndex, Complex64)> = h.modes().filter(|m| m.1.norm_sqr() > 0.0).collect();
    for &(n1, a1) in &fm {
        for &(n2, a2) in &gm {
            if n2 == n1 {
                continue;
            }
            let p = a1 * a2.conj();
            for &(n3, a3) in &hm {
                if n3 == n2 {
                    continue;
                }
                let n = n1 - n2 + n3;
                if in_ball(n, out_scale) {
                    out.set(n, out.get(n) + p * a3);
                }
            }
        }
    }
    for (n, a) in f.modes() {
        if in_ball(n, out_scale) {
            let d = a * g.get(n).conj() * h.get(n);
            if d.norm_sqr() > 0.0 {
                out.set(n, out.get(n) - d);
            }
        }
    }
    Ok(out)
}

/// Cached grid for the fast path at one scale.
#[derive(Clone, Debug)]
pub struct WickPlan {
    grid: PhysGrid,
    scale: u64,
}

impl WickPlan {
    /// Exact for inputs of scale `scale` and outputs up to the same scale.
    pub fn new(scale: u64) -> Self {
        Self {
            grid: PhysGrid::for_product(3, scale, scale),
            scale,
        }
    }

    pub fn grid(&self) -> &PhysGrid {
        &self.grid
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// `P_{<=N}(|u|^2 u) - m u` for a frozen or instantaneous mass term `m`.
    pub fn cubic_minus(&self, u: &SpectralField, m: f64, ws: &mut Workspace) -> SpectralField {
        debug_assert_eq!(u.scale(), self.scale);
        let mut vals = self.grid.synthesize(u, ws);
        for v in vals.iter_mut() {
            *v *= v.norm_sqr();
        }
        let mut out = self.grid.analyze(&mut vals, self.scale, *u.torus(), ws);
        out.axpy(Complex64::new(-m, 0.0), u);
        out
    }

    /// `N(u, u, u) = |u|^2 u - 2 mass(u) u`.
    pub fn wick(&self, u: &SpectralField, ws: &mut Workspace) -> SpectralField {
        self.cubic_minus(u, 2.0 * u.mass(), ws)
    }

    /// Trilinear form via pointwise products.
    pub fn trilinear(
        &self,
        f: &SpectralField,
        g: &SpectralField,
        h: &SpectralField,
        ws: &mut Workspace,
    ) -> Result<SpectralField> {
        check3(f, g, h)?;
        let vf = self.grid.synthesize(f, ws);
        let vg = self.grid.synthesize(g, ws);
        let mut vh = self.grid.synthesize(h, ws);
        for ((x, a), b) in vh.iter_mut().zip(&vf).zip(&vg) {
            *x *= a * b.conj();
        }
        let mut out = self.grid.analyze(&mut vh, self.scale, *f.torus(), ws);
        let fg = g.inner(f); // sum f conj(g)
        let hg = g.inner(h);
        out.axpy(-fg, h);
        out.axpy(-hg, f);
        Ok(out)
    }
}

/// `N(u, u, u)` by zero-padded transforms.
pub fn wick_fast(u: &SpectralField) -> SpectralField {
    WickPlan::new(u.scale()).wick(u, &mut Workspace::default())
}

/// `N(f, g, h)` by zero-padded transforms.
pub fn wick_trilinear(f: &SpectralField, g: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    WickPlan::new(f.scale()).trilinear(f, g, h, &mut Workspace::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_mode() {
        let t = TorusSpec::sqrt2();
        let n = FreqIndex::new(1, -2);
        let a = c(0.7, -0.4);
        let u = SpectralField::single_mode(4, t, n, a).unwrap();
        let expect = SpectralField::single_mode(4, t, n, -a * a.norm_sqr()).unwrap();
        assert!(wick_oracle(&u, &u, &u, None).unwrap().sub(&expect).max_abs() < 1e-15);
        assert!(wick_fast(&u).sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn two_modes_by_hand() {
        // e^{in.x} + e^{im.x}: surviving triples are (m, n, m) and (n, m, n)
        let t = TorusSpec::three_halves();
        let (n, m) = (FreqIndex::new(1, 0), FreqIndex::new(0, 1));
        let one = c(1.0, 0.0);
        let u = SpectralField::from_modes(3, t, [(n, one), (m, one)]).unwrap();
        let got = wick_oracle(&u, &u, &u, None).unwrap();
        let expect =
            SpectralField::from_modes(3, t, [(m + m - n, one), (n + n - m, one), (n, -one), (m, -one)]).unwrap();
        assert!(got.sub(&expect).max_abs() < 1e-15);
        assert!(wick_fast(&u).sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn mismatched_inputs() {
        let a = SpectralField::zeros(2, TorusSpec::sqrt2());
        let b = SpectralField::zeros(4, TorusSpec::sqrt2());
        let d = SpectralField::zeros(2, TorusSpec::golden());
        assert!(wick_oracle(&a, &b, &a, None).is_err());
        assert!(wick_trilinear(&a, &a, &d).is_err());
    }

    #[test]
    fn trilinear_matches_oracle() {
        let t = TorusSpec::golden();
        let f = SpectralField::from_fn(3, t, |n| c(n.n1 as f64 * 0.3, 1.0 / (1 + n.norm_sq()) as f64));
        let g = SpectralField::from_fn(3, t, |n| c(0.2 - n.n2 as f64 * 0.1, n.n1 as f64 * 0.05));
        let h = SpectralField::from_fn(3, t, |n| c(1.0, (n.n1 * n.n2) as f64 * 0.1));
        let slow = wick_oracle(&f, &g, &h, None).unwrap();
        let fast = wick_trilinear(&f, &g, &h).unwrap();
        assert!(fast.sub(&slow).max_abs() < 1e-12 * slow.max_abs());
    }
}
