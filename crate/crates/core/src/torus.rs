//! Frequency-lattice geometry of the anisotropic torus.
//!
//! The torus carries the dispersion relation `Q(n) = n1^2 + gamma * n2^2`
//! and the matching bilinear form `<m, k> = m1 k1 + gamma m2 k2`. Every
//! truncation region (balls, dyadic shells) is measured in the Euclidean
//! norm of the integer vector; the anisotropy only enters through `Q`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// sqrt(2) truncated to 12 significant digits.
#[allow(clippy::approx_constant)]
pub const GAMMA_SQRT2: f64 = 1.41421356237;
/// The golden ratio truncated to 12 significant digits.
pub const GAMMA_GOLDEN: f64 = 1.61803398875;

/// Anisotropy parameter of the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusSpec {
    gamma: f64,
}

impl TorusSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidGamma(gamma))
        }
    }

    pub fn sqrt2() -> Self {
        Self { gamma: GAMMA_SQRT2 }
    }

    pub fn golden() -> Self {
        Self { gamma: GAMMA_GOLDEN }
    }

    /// The square (rational) torus.
    pub fn square() -> Self {
        Self { gamma: 1.0 }
    }

    pub fn three_halves() -> Self {
        Self { gamma: 1.5 }
    }

    /// Resolve a preset name (`sqrt2`, `golden`, `one`, `three_halves`), a
    /// fraction `p/q`, or a decimal literal.
    pub fn from_preset(name: &str) -> Result<Self> {
        match name.trim() {
            "sqrt2" => Ok(Self::sqrt2()),
            "golden" => Ok(Self::golden()),
            "one" | "square" => Ok(Self::square()),
            "three_halves" => Ok(Self::three_halves()),
            other => {
                if let Some((p, q)) = other.split_once('/') {
                    let p: f64 = p.trim().parse().map_err(|_| unknown(other))?;
                    let q: f64 = q.trim().parse().map_err(|_| unknown(other))?;
                    return Self::new(p / q);
                }
                let g: f64 = other.parse().map_err(|_| unknown(other))?;
                Self::new(g)
            }
        }
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `gamma` as a decimal string with at least 11 significant digits that
    /// parses back to the identical `f64`.
    pub fn gamma_string(&self) -> String {
        format_sig(self.gamma, 11)
    }

    /// `Q(n) = n1^2 + gamma n2^2`, rounded once.
    #[inline]
    pub fn qform(&self, n: FreqIndex) -> f64 {
        self.gamma.mul_add((n.n2 * n.n2) as f64, (n.n1 * n.n1) as f64)
    }

    /// `<m, k> = m1 k1 + gamma m2 k2`, rounded once.
    #[inline]
    pub fn pairing(&self, m: FreqIndex, k: FreqIndex) -> f64 {
        self.gamma.mul_add((m.n2 * k.n2) as f64, (m.n1 * k.n1) as f64)
    }
}

fn unknown(name: &str) -> Error {
    Error::UnknownGammaPreset(name.to_string())
}

fn format_sig(x: f64, min_sig: usize) -> String {
    let s = format!("{x}");
    let digits: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
    let sig = digits.trim_start_matches('0').len();
    if sig >= min_sig {
        return s;
    }
    let int_part = s.trim_start_matches('-').split('.').next().unwrap_or("0");
    let precision = if int_part != "0" {
        min_sig.saturating_sub(int_part.len())
    } else {
        let frac = s.split('.').nth(1).unwrap_or("");
        let zeros = frac.len() - frac.trim_start_matches('0').len();
        zeros + min_sig
    };
    format!("{x:.precision$}")
}

impl Serialize for TorusSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.gamma_string())
    }
}

impl<'de> Deserialize<'de> for TorusSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TorusSpec::from_preset(&s).map_err(serde::de::Error::custom)
    }
}

impl FromStr for TorusSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_preset(s)
    }
}

impl fmt::Display for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.gamma_string())
    }
}

/// A lattice frequency `n = (n1, n2)` in `Z^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[i64; 2]", from = "[i64; 2]")]
pub struct FreqIndex {
    pub n1: i64,
    pub n2: i64,
}

impl FreqIndex {
    pub const ZERO: FreqIndex = FreqIndex { n1: 0, n2: 0 };

    #[inline]
    pub const fn new(n1: i64, n2: i64) -> Self {
        Self { n1, n2 }
    }

    /// Squared Euclidean norm `n1^2 + n2^2`.
    #[inline]
    pub fn norm_sq(self) -> i64 {
        self.n1 * self.n1 + self.n2 * self.n2
    }

    #[inline]
    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }
}

impl From<[i64; 2]> for FreqIndex {
    fn from([n1, n2]: [i64; 2]) -> Self {
        Self { n1, n2 }
    }
}

impl From<FreqIndex> for [i64; 2] {
    fn from(n: FreqIndex) -> Self {
        [n.n1, n.n2]
    }
}

impl From<(i64, i64)> for FreqIndex {
    fn from((n1, n2): (i64, i64)) -> Self {
        Self { n1, n2 }
    }
}

impl Add for FreqIndex {
    type Output = FreqIndex;
    fn add(self, rhs: Self) -> Self {
        FreqIndex::new(self.n1 + rhs.n1, self.n2 + rhs.n2)
    }
}

impl Sub for FreqIndex {
    type Output = FreqIndex;
    fn sub(self, rhs: Self) -> Self {
        FreqIndex::new(self.n1 - rhs.n1, self.n2 - rhs.n2)
    }
}

impl Neg for FreqIndex {
    type Output = FreqIndex;
    fn neg(self) -> Self {
        FreqIndex::new(-self.n1, -self.n2)
    }
}

impl fmt::Display for FreqIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n1, self.n2)
    }
}

pub fn is_dyadic(scale: u64) -> bool {
    scale.is_power_of_two()
}

pub fn check_dyadic(scale: u64) -> Result<()> {
    if is_dyadic(scale) {
        Ok(())
    } else {
        Err(Error::NotDyadic(scale))
    }
}

/// Membership in the dyadic shell of scale `N`: `N/2 < |n| <= N`.
#[inline]
pub fn in_shell(n: FreqIndex, scale: u64) -> bool {
    let r2 = n.norm_sq();
    let s2 = (scale * scale) as i64;
    r2 <= s2 && 4 * r2 > s2
}

/// `|n| <= radius`, Euclidean.
#[inline]
pub fn in_ball(n: FreqIndex, radius: u64) -> bool {
    n.norm_sq() <= (radius * radius) as i64
}

/// The dyadic shell containing `n != 0`.
pub fn shell_of(n: FreqIndex) -> Option<u64> {
    if n == FreqIndex::ZERO {
        return None;
    }
    let mut scale = 1u64;
    while !in_shell(n, scale) {
        scale *= 2;
    }
    Some(scale)
}

/// Integer points of the dyadic shell of scale `N`, in lexicographic order.
pub fn shell_points(scale: u64) -> Result<Vec<FreqIndex>> {
    check_dyadic(scale)?;
    Ok(lattice_disk(scale).filter(|&n| in_shell(n, scale)).collect())
}

/// Integer points with `|n| <= radius` (origin included), lexicographic.
pub fn ball_points(radius: u64) -> Vec<FreqIndex> {
    lattice_disk(radius).collect()
}

fn lattice_disk(radius: u64) -> impl Iterator<Item = FreqIndex> {
    let r = radius as i64;
    (-r..=r).flat_map(move |n1| {
        let span = isqrt(r * r - n1 * n1);
        (-span..=span).map(move |n2| FreqIndex::new(n1, n2))
    })
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(x: i64) -> i64 {
    if x <= 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as i64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}
