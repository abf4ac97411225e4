use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{in_ball, FreqIndex, TorusSpec};

/// Fourier coefficients `a_n` of a trigonometric polynomial supported in the
/// ball `|n| <= N`.
///
/// Storage is a dense `(2N+1) x (2N+1)` array indexed by `(n1 + N, n2 + N)`,
/// row-major, so iteration order is lexicographic in `(n1, n2)`. Entries
/// outside the ball are kept at zero by every constructor and mutator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    scale: u64,
    torus: TorusSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(scale: u64, torus: TorusSpec) -> Self {
        let side = 2 * scale as usize + 1;
        Self {
            scale,
            torus,
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    /// Build from `(n, a_n)` pairs; modes outside the ball are rejected.
    pub fn from_modes(
        scale: u64,
        torus: TorusSpec,
        modes: impl IntoIterator<Item = (FreqIndex, Complex64)>,
    ) -> Result<Self> {
        let mut f = Self::zeros(scale, torus);
        for (n, a) in modes {
            if !in_ball(n, scale) {
                return Err(Error::InvalidArgument(format!(
                    "mode {n} lies outside the ball of radius {scale}"
                )));
            }
            let i = f.index(n);
            f.coeffs[i] += a;
        }
        Ok(f)
    }

    pub fn single_mode(scale: u64, torus: TorusSpec, n: FreqIndex, a: Complex64) -> Result<Self> {
        Self::from_modes(scale, torus, [(n, a)])
    }

    /// Build from a closure evaluated on every ball point.
    pub fn from_fn(scale: u64, torus: TorusSpec, mut f: impl FnMut(FreqIndex) -> Complex64) -> Self {
        let mut out = Self::zeros(scale, torus);
        let s = scale as i64;
        for n1 in -s..=s {
            for n2 in -s..=s {
                let n = FreqIndex::new(n1, n2);
                if in_ball(n, scale) {
                    let i = out.index(n);
                    out.coeffs[i] = f(n);
                }
            }
        }
        out
    }

    #[inline]
    pub fn scale(&self) -> u64 {
        self.scale
    }

    #[inline]
    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.scale as usize + 1
    }

    #[inline]
    fn index(&self, n: FreqIndex) -> usize {
        let s = self.scale as i64;
        ((n.n1 + s) as usize) * self.side() + (n.n2 + s) as usize
    }

    /// Coefficient at `n`, zero outside the ball.
    pub fn get(&self, n: FreqIndex) -> Complex64 {
        if in_ball(n, self.scale) {
            self.coeffs[self.index(n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Set the coefficient at `n`; panics outside the ball.
    pub fn set(&mut self, n: FreqIndex, a: Complex64) {
        assert!(in_ball(n, self.scale), "mode {n} outside ball {}", self.scale);
        let i = self.index(n);
        self.coeffs[i] = a;
    }

    /// Dense storage, including the zero entries outside the ball.
    pub fn raw(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable dense storage. Callers must leave entries outside the ball at
    /// zero, or call [`SpectralField::project`] afterwards.
    pub fn raw_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `(n, a_n)` for every ball point, lexicographic.
    pub fn modes(&self) -> impl Iterator<Item = (FreqIndex, Complex64)> + '_ {
        let s = self.scale as i64;
        let side = self.side();
        self.coeffs.iter().enumerate().filter_map(move |(i, &a)| {
            let n = FreqIndex::new((i / side) as i64 - s, (i % side) as i64 - s);
            in_ball(n, self.scale).then_some((n, a))
        })
    }

    /// Nonzero modes only.
    pub fn support(&self) -> Vec<FreqIndex> {
        self.modes()
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
            .map(|(n, _)| n)
            .collect()
    }

    /// `sum |a_n|^2`, equal to the squared L2 norm under normalized measure.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `(sum <n>^{2s} |a_n|^2)^{1/2}` with `<n> = sqrt(1 + |n|^2)`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.modes()
            .map(|(n, a)| (1.0 + n.norm_sq() as f64).powf(s) * a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Zero every entry outside the ball.
    pub fn project(&mut self) {
        let s = self.scale as i64;
        let side = self.side();
        for (i, a) in self.coeffs.iter_mut().enumerate() {
            let n = FreqIndex::new((i / side) as i64 - s, (i % side) as i64 - s);
            if !in_ball(n, self.scale) {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// The same coefficients viewed at another scale: embedding when
    /// `scale >= N`, the projection `P_{<= scale}` otherwise.
    pub fn rescaled(&self, scale: u64) -> Self {
        let mut out = Self::zeros(scale, self.torus);
        let r = self.scale.min(scale) as i64;
        for n1 in -r..=r {
            for n2 in -r..=r {
                let n = FreqIndex::new(n1, n2);
                if in_ball(n, scale) && in_ball(n, self.scale) {
                    let i = out.index(n);
                    out.coeffs[i] = self.get(n);
                }
            }
        }
        out
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.scale != other.scale {
            return Err(Error::FieldMismatch(format!(
                "scales differ: {} vs {}",
                self.scale, other.scale
            )));
        }
        if self.torus != other.torus {
            return Err(Error::FieldMismatch(format!(
                "tori differ: {} vs {}",
                self.torus, other.torus
            )));
        }
        Ok(())
    }

    /// `self + c * other`, in place.
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.scale, other.scale);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    /// `sum conj(a_n) b_n`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Frequency-wise multiply by `e^{i Q(n) t}`.
    pub fn propagated(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.rotate(t);
        out
    }

    pub(crate) fn rotate(&mut self, t: f64) {
        if t == 0.0 {
            return;
        }
        let s = self.scale as i64;
        let side = self.side();
        let torus = self.torus;
        for (i, a) in self.coeffs.iter_mut().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = FreqIndex::new((i / side) as i64 - s, (i % side) as i64 - s);
            *a *= Complex64::cis(torus.qform(n) * t);
        }
    }
}

/// Serialized as `{ "N", "torus", "modes": [[n1, n2, re, im], ...] }` with
/// modes in lexicographic order.
#[derive(Serialize, Deserialize)]
struct FieldRepr {
    #[serde(rename = "N")]
    scale: u64,
    torus: TorusSpec,
    modes: Vec<(i64, i64, f64, f64)>,
}

impl Serialize for SpectralField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            scale: self.scale,
            torus: self.torus,
            modes: self.modes().map(|(n, a)| (n.n1, n.n2, a.re, a.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(d)?;
        SpectralField::from_modes(
            repr.scale,
            repr.torus,
            repr.modes
                .into_iter()
                .map(|(a, b, re, im)| (FreqIndex::new(a, b), Complex64::new(re, im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ball_points;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn support_stays_in_ball() {
        let t = TorusSpec::sqrt2();
        assert!(SpectralField::from_modes(2, t, [(FreqIndex::new(2, 1), c(1.0, 0.0))]).is_err());
        let f = SpectralField::from_fn(3, t, |_| c(1.0, 0.0));
        assert_eq!(f.support().len(), ball_points(3).len());
        assert_eq!(f.mass(), ball_points(3).len() as f64);
    }

    #[test]
    fn modes_are_lexicographic() {
        let f = SpectralField::from_fn(4, TorusSpec::golden(), |n| c(n.n1 as f64, n.n2 as f64));
        let ns: Vec<FreqIndex> = f.modes().map(|(n, _)| n).collect();
        let mut sorted = ns.clone();
        sorted.sort();
        assert_eq!(ns, sorted);
        assert_eq!(ns, ball_points(4));
    }

    #[test]
    fn rescale_roundtrip() {
        let f = SpectralField::from_fn(4, TorusSpec::sqrt2(), |n| c(1.0 + n.n1 as f64, n.n2 as f64));
        let up = f.rescaled(8);
        assert_eq!(up.rescaled(4), f);
        let down = f.rescaled(2);
        for (n, a) in down.modes() {
            assert_eq!(a, f.get(n));
        }
    }

    #[test]
    fn json_roundtrip() {
        let f = SpectralField::from_fn(2, TorusSpec::sqrt2(), |n| c(n.n1 as f64 * 0.5, -(n.n2 as f64)));
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with("{\"N\":2,\"torus\":\"1.41421356237\""));
        let back: SpectralField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn hs_norm_reduces_to_l2() {
        let f = SpectralField::from_fn(3, TorusSpec::sqrt2(), |n| c(1.0, n.n2 as f64));
        assert!((f.hs_norm(0.0) - f.l2_norm()).abs() < 1e-14);
        assert!(f.hs_norm(0.5) > f.l2_norm());
    }
}
