//! Exact enumeration of resonance sets.
//!
//! A [`ResonanceQuery`] fixes three dyadic scales, a level `mu` and a window
//! half-width `W`; a triple `(n1, n2, n3)` belongs to the set when each
//! `n_i` lies in its shell and `<n2 - n1, n2 - n3>` lies in `[mu - W, mu + W]`
//! (optionally excluding `n2 = n1` and `n2 = n3`).
//!
//! Every count comes in two flavours: an exhaustive oracle that scans whole
//! shells, and an optimized enumerator (lattice lines for a fixed pair that
//! includes `n2`, an annulus for fixed `(n1, n3)`). The optimized enumerators
//! only generate candidates; each candidate is accepted by the same
//! membership predicate the oracle uses, so both must agree exactly.

mod arc;
mod divisor;
mod fit;
pub mod study;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{in_shell, isqrt, shell_points, FreqIndex, TorusSpec};

pub use arc::{annulus_arc_count, annulus_arc_count_oracle};
pub use divisor::{
    divisor_count, divisor_count_sieve, divisor_pairs, divisor_pairs_brute, record_exponents, DecadeExponent,
};
pub use fit::{fit_exponent, FitResult};

/// One instance of the resonance set to be counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceQuery {
    #[serde(rename = "N1")]
    pub n1_scale: u64,
    #[serde(rename = "N2")]
    pub n2_scale: u64,
    #[serde(rename = "N3")]
    pub n3_scale: u64,
    pub mu: f64,
    #[serde(rename = "W")]
    pub width: f64,
    pub torus: TorusSpec,
    pub wick: bool,
}

impl ResonanceQuery {
    pub fn new(scales: (u64, u64, u64), mu: f64, width: f64, torus: TorusSpec) -> Self {
        Self {
            n1_scale: scales.0,
            n2_scale: scales.1,
            n3_scale: scales.2,
            mu,
            width,
            torus,
            wick: true,
        }
    }

    pub fn with_wick(mut self, wick: bool) -> Self {
        self.wick = wick;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for s in [self.n1_scale, self.n2_scale, self.n3_scale] {
            crate::torus::check_dyadic(s)?;
        }
        if !(self.width >= 0.0 && self.width.is_finite()) || !self.mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "window needs finite mu and W >= 0, got mu = {}, W = {}",
                self.mu, self.width
            )));
        }
        Ok(())
    }

    #[inline]
    fn window(&self) -> (f64, f64) {
        (self.mu - self.width, self.mu + self.width)
    }

    /// Roles 1 and 3 exchanged; the level is symmetric under that swap.
    pub fn swapped_13(&self) -> Self {
        Self {
            n1_scale: self.n3_scale,
            n3_scale: self.n1_scale,
            ..self.clone()
        }
    }
}

/// `<n2 - n1, n2 - n3>` in the torus pairing.
#[inline]
pub fn resonance_level(n1: FreqIndex, n2: FreqIndex, n3: FreqIndex, torus: &TorusSpec) -> f64 {
    torus.pairing(n2 - n1, n2 - n3)
}

/// Window and exclusion test for a triple, ignoring shell membership.
#[inline]
fn accepts(n1: FreqIndex, n2: FreqIndex, n3: FreqIndex, q: &ResonanceQuery) -> bool {
    if q.wick && (n2 == n1 || n2 == n3) {
        return false;
    }
    let level = resonance_level(n1, n2, n3, &q.torus);
    let (lo, hi) = q.window();
    level >= lo && level <= hi
}

/// Full membership predicate for the resonance set.
pub fn is_member(n1: FreqIndex, n2: FreqIndex, n3: FreqIndex, q: &ResonanceQuery) -> bool {
    in_shell(n1, q.n1_scale) && in_shell(n2, q.n2_scale) && in_shell(n3, q.n3_scale) && accepts(n1, n2, n3, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exhaustive shell scan.
    Oracle,
    /// Line-band enumeration.
    Strip,
    /// Annulus enumeration.
    Annulus,
}

/// Which lattice points were held fixed for a count.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n1: Option<FreqIndex>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n2: Option<FreqIndex>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n3: Option<FreqIndex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub query: ResonanceQuery,
    pub fixed: Fixed,
    pub count: u64,
    pub method: Method,
    /// Wall-clock seconds; the only non-deterministic field.
    pub elapsed: f64,
}

impl CountRecord {
    /// The record with its timing field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed: 0.0,
            ..self.clone()
        }
    }
}

fn timed(f: impl FnOnce() -> u64) -> (u64, f64) {
    let start = Instant::now();
    let count = f();
    (count, start.elapsed().as_secs_f64())
}

/// Lattice points `x` (inclusive range) whose first coordinate lies within
/// the disk row of the shell.
#[inline]
fn row_span(scale: u64, y: i64) -> i64 {
    let s = scale as i64;
    isqrt(s * s - y * y)
}

/// Count `n3` in shell `N3` for fixed `n1 != n2` by walking the lattice
/// lines crossing the band `<n2 - n1, n3> ~ <n2 - n1, n2> - mu`.
pub fn fix12_strip(n1: FreqIndex, n2: FreqIndex, q: &ResonanceQuery) -> u64 {
    let d = n2 - n1;
    debug_assert!(d != FreqIndex::ZERO);
    let gamma = q.torus.gamma();
    let base = q.torus.pairing(d, n2);
    let (wlo, whi) = q.window();
    // <d, n3> must lie in [base - whi, base - wlo]
    let (lo, hi) = (base - whi, base - wlo);
    let scale = q.n3_scale as i64;
    let d1 = d.n1 as f64;
    let d2g = gamma * d.n2 as f64;
    let mut count = 0u64;
    if d1.abs() >= d2g.abs() {
        for y in -scale..=scale {
            let span = row_span(q.n3_scale, y);
            let shift = d2g * y as f64;
            let (a, b) = ordered((lo - shift) / d1, (hi - shift) / d1);
            let xlo = (a.floor() as i64 - 1).max(-span);
            let xhi = (b.ceil() as i64 + 1).min(span);
            for x in xlo..=xhi {
                let n3 = FreqIndex::new(x, y);
                if in_shell(n3, q.n3_scale) && accepts(n1, n2, n3, q) {
                    count += 1;
                }
            }
        }
    } else {
        for x in -scale..=scale {
            let span = row_span(q.n3_scale, x);
            let shift = d1 * x as f64;
            let (a, b) = ordered((lo - shift) / d2g, (hi - shift) / d2g);
            let ylo = (a.floor() as i64 - 1).max(-span);
            let yhi = (b.ceil() as i64 + 1).min(span);
            for y in ylo..=yhi {
                let n3 = FreqIndex::new(x, y);
                if in_shell(n3, q.n3_scale) && accepts(n1, n2, n3, q) {
                    count += 1;
                }
            }
        }
    }
    count
}

#[inline]
fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Exhaustive scan of shell `N3` for fixed `(n1, n2)`.
pub fn fix12_oracle(n1: FreqIndex, n2: FreqIndex, q: &ResonanceQuery) -> u64 {
    shell_points(q.n3_scale)
        .expect("validated scale")
        .into_iter()
        .filter(|&n3| accepts(n1, n2, n3, q))
        .count() as u64
}

/// Count `n2` in shell `N2` for fixed `(n1, n3)` by enumerating the annulus
/// `Q(2 n2 - n1 - n3) in 4 [Q(n1 - n3)/4 + mu - W, Q(n1 - n3)/4 + mu + W]`.
pub fn fix13_annulus(n1: FreqIndex, n3: FreqIndex, q: &ResonanceQuery) -> u64 {
    let gamma = q.torus.gamma();
    let s = n1 + n3;
    let rho = q.torus.qform(n1 - n3);
    let (wlo, whi) = q.window();
    // Q(v) with v = 2 n2 - s lies in [rho + 4 wlo, rho + 4 whi]
    let lo = rho + 4.0 * wlo;
    let hi = rho + 4.0 * whi;
    let slack = 1e-9 * (rho.abs() + hi.abs() + 1.0);
    if hi + slack < 0.0 {
        return 0;
    }
    let scale = q.n2_scale as i64;
    let mut count = 0u64;
    for y in -scale..=scale {
        let span = row_span(q.n2_scale, y);
        let v2 = (2 * y - s.n2) as f64;
        let rest_hi = hi - gamma * v2 * v2 + slack;
        if rest_hi < 0.0 {
            continue;
        }
        let rest_lo = lo - gamma * v2 * v2 - slack;
        let outer = rest_hi.sqrt();
        let inner = if rest_lo > 0.0 { rest_lo.sqrt() } else { 0.0 };
        // v1 in [inner, outer] or [-outer, -inner]; x = (v1 + s1) / 2
        let to_x = |v: f64| (v + s.n1 as f64) / 2.0;
        let pos = (to_x(inner).floor() as i64 - 1, to_x(outer).ceil() as i64 + 1);
        let neg = (to_x(-outer).floor() as i64 - 1, to_x(-inner).ceil() as i64 + 1);
        let ranges: [(i64, i64); 2] = if neg.1 >= pos.0 {
            [(neg.0, pos.1), (1, 0)]
        } else {
            [neg, pos]
        };
        for (a, b) in ranges {
            for x in a.max(-span)..=b.min(span) {
                let n2 = FreqIndex::new(x, y);
                if in_shell(n2, q.n2_scale) && accepts(n1, n2, n3, q) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Exhaustive scan of shell `N2` for fixed `(n1, n3)`.
pub fn fix13_oracle(n1: FreqIndex, n3: FreqIndex, q: &ResonanceQuery) -> u64 {
    shell_points(q.n2_scale)
        .expect("validated scale")
        .into_iter()
        .filter(|&n2| accepts(n1, n2, n3, q))
        .count() as u64
}

/// Pairs `(n2, n3)` for fixed `n1`, partitioned over `n2`; each `n2 != n1`
/// reuses the line band of [`fix12_strip`].
pub fn fix1_strip(n1: FreqIndex, q: &ResonanceQuery) -> u64 {
    let outer = shell_points(q.n2_scale).expect("validated scale");
    outer
        .par_iter()
        .map(|&n2| {
            if n2 == n1 {
                if q.wick {
                    0
                } else {
                    fix12_oracle(n1, n2, q)
                }
            } else {
                fix12_strip(n1, n2, q)
            }
        })
        .collect::<Vec<u64>>()
        .into_iter()
        .sum()
}

/// Double scan over shells `N2 x N3`, partitioned over `n2`.
pub fn fix1_oracle(n1: FreqIndex, q: &ResonanceQuery) -> u64 {
    let outer = shell_points(q.n2_scale).expect("validated scale");
    let inner = shell_points(q.n3_scale).expect("validated scale");
    outer
        .par_iter()
        .map(|&n2| inner.iter().filter(|&&n3| accepts(n1, n2, n3, q)).count() as u64)
        .collect::<Vec<u64>>()
        .into_iter()
        .sum()
}

/// `#S(n1, n2)`: lattice points `n3` of shell `N3` in the window.
pub fn count_fix12(n1: FreqIndex, n2: FreqIndex, q: &ResonanceQuery, method: Method) -> Result<CountRecord> {
    q.validate()?;
    if n1 == n2 {
        return Err(Error::DegenerateLine(n1.to_string()));
    }
    let (count, elapsed) = match method {
        Method::Oracle => timed(|| fix12_oracle(n1, n2, q)),
        Method::Strip | Method::Annulus => timed(|| fix12_strip(n1, n2, q)),
    };
    Ok(CountRecord {
        query: q.clone(),
        fixed: Fixed {
            n1: Some(n1),
            n2: Some(n2),
            n3: None,
        },
        count,
        method: if method == Method::Oracle {
            Method::Oracle
        } else {
            Method::Strip
        },
        elapsed,
    })
}

/// `#S(n2, n3)`, realized as [`count_fix12`] with roles 1 and 3 exchanged.
pub fn count_fix23(n2: FreqIndex, n3: FreqIndex, q: &ResonanceQuery, method: Method) -> Result<CountRecord> {
    let mut rec = count_fix12(n3, n2, &q.swapped_13(), method)?;
    rec.query = q.clone();
    rec.fixed = Fixed {
        n1: None,
        n2: Some(n2),
        n3: Some(n3),
    };
    Ok(rec)
}

/// `#S(n1, n3)`: lattice points `n2` of shell `N2` in the window.
pub fn count_fix13(n1: FreqIndex, n3: FreqIndex, q: &ResonanceQuery, method: Method) -> Result<CountRecord> {
    q.validate()?;
    let (count, elapsed) = match method {
        Method::Oracle => timed(|| fix13_oracle(n1, n3, q)),
        Method::Strip | Method::Annulus => timed(|| fix13_annulus(n1, n3, q)),
    };
    Ok(CountRecord {
        query: q.clone(),
        fixed: Fixed {
            n1: Some(n1),
            n2: None,
            n3: Some(n3),
        },
        count,
        method: if method == Method::Oracle {
            Method::Oracle
        } else {
            Method::Annulus
        },
        elapsed,
    })
}

/// `#S(n1)`: pairs `(n2, n3)` in shells `N2 x N3` in the window.
pub fn count_fix1(n1: FreqIndex, q: &ResonanceQuery, method: Method) -> Result<CountRecord> {
    q.validate()?;
    let (count, elapsed) = match method {
        Method::Oracle => timed(|| fix1_oracle(n1, q)),
        Method::Strip | Method::Annulus => timed(|| fix1_strip(n1, q)),
    };
    Ok(CountRecord {
        query: q.clone(),
        fixed: Fixed {
            n1: Some(n1),
            n2: None,
            n3: None,
        },
        count,
        method: if method == Method::Oracle {
            Method::Oracle
        } else {
            Method::Strip
        },
        elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ball_points;
    use proptest::prelude::*;

    fn f(a: i64, b: i64) -> FreqIndex {
        FreqIndex::new(a, b)
    }

    fn sqrt2_query(scales: (u64, u64, u64), mu: f64, w: f64) -> ResonanceQuery {
        ResonanceQuery::new(scales, mu, w, TorusSpec::sqrt2())
    }

    #[test]
    fn level_examples() {
        let t = TorusSpec::three_halves();
        assert_eq!(resonance_level(f(3, 4), f(3, 4), f(-7, 2), &t), 0.0);
        assert_eq!(resonance_level(f(0, 0), f(1, 0), f(0, 1), &t), 1.0);
    }

    proptest! {
        #[test]
        fn level_matches_quartic_phase(
            a in (-500i64..500, -500i64..500),
            b in (-500i64..500, -500i64..500),
            c in (-500i64..500, -500i64..500),
        ) {
            let t = TorusSpec::sqrt2();
            let (n1, n2, n3) = (FreqIndex::from(a), FreqIndex::from(b), FreqIndex::from(c));
            let n4 = n1 - n2 + n3;
            let phase = -0.5 * (t.qform(n1) - t.qform(n2) + t.qform(n3) - t.qform(n4));
            let level = resonance_level(n1, n2, n3, &t);
            let scale = t.qform(n1) + t.qform(n2) + t.qform(n3) + t.qform(n4) + 1.0;
            prop_assert!((phase - level).abs() <= 1e-10 * scale.max(level.abs()));
        }
    }

    #[test]
    fn fix12_line_example() {
        // d = (1, 0): <d, n2 - n3> = 1 - x, window [-1, 1] => x in {0, 1, 2}
        let q = sqrt2_query((1, 1, 8), 0.0, 1.0).with_wick(false);
        let (n1, n2) = (f(0, 0), f(1, 0));
        let expected = shell_points(8)
            .unwrap()
            .into_iter()
            .filter(|n| (0..=2).contains(&n.n1))
            .count() as u64;
        let oracle = count_fix12(n1, n2, &q, Method::Oracle).unwrap();
        let strip = count_fix12(n1, n2, &q, Method::Strip).unwrap();
        assert_eq!(oracle.count, expected);
        assert_eq!(strip.count, expected);
        assert_eq!(strip.method, Method::Strip);
    }

    #[test]
    fn fix12_vacuous_and_empty_windows() {
        let (n1, n2) = (f(3, -1), f(-2, 2));
        let size = shell_points(16).unwrap().len() as u64;
        let q = sqrt2_query((4, 4, 16), 0.0, 1e6).with_wick(false);
        assert_eq!(fix12_strip(n1, n2, &q), size);
        let q = q.with_wick(true);
        // n3 = n2 is not in shell 16, so nothing is excluded
        assert_eq!(fix12_strip(n1, n2, &q), size);
        let q = sqrt2_query((4, 4, 16), 1e5, 1.0);
        assert_eq!(fix12_strip(n1, n2, &q), 0);
        assert_eq!(fix12_oracle(n1, n2, &q), 0);
    }

    #[test]
    fn fix12_rejects_coincident_points() {
        let q = sqrt2_query((4, 4, 8), 0.0, 1.0);
        assert!(matches!(
            count_fix12(f(1, 2), f(1, 2), &q, Method::Strip),
            Err(Error::DegenerateLine(_))
        ));
    }

    #[test]
    fn fix23_alias_matches_direct_scan() {
        let q = sqrt2_query((16, 4, 8), 3.5, 1.0);
        let (n2, n3) = (f(2, -3), f(5, 4));
        let direct = shell_points(16)
            .unwrap()
            .into_iter()
            .filter(|&n1| is_member(n1, n2, n3, &q))
            .count() as u64;
        for m in [Method::Oracle, Method::Strip] {
            let rec = count_fix23(n2, n3, &q, m).unwrap();
            assert_eq!(rec.count, direct);
            assert_eq!(rec.fixed.n2, Some(n2));
            assert_eq!(rec.query, q);
        }
    }

    #[test]
    fn fix13_degenerate_center() {
        // n1 = n3 = 0, mu = 0, W = 1: Q(n2) <= 1, empty beyond the unit shell
        for scale in [2u64, 4, 8] {
            let q = sqrt2_query((1, scale, 1), 0.0, 1.0).with_wick(false);
            assert_eq!(fix13_annulus(f(0, 0), f(0, 0), &q), 0);
            assert_eq!(fix13_oracle(f(0, 0), f(0, 0), &q), 0);
        }
        let q = sqrt2_query((1, 1, 1), 0.0, 1.0).with_wick(false);
        // unit shell: Q = 1 on (+-1, 0), Q = gamma on (0, +-1)
        assert_eq!(fix13_annulus(f(0, 0), f(0, 0), &q), 2);
    }

    #[test]
    fn fix13_empty_annulus() {
        let q = sqrt2_query((8, 8, 8), -1000.0, 1.0);
        assert_eq!(fix13_annulus(f(3, 4), f(-5, 1), &q), 0);
        assert_eq!(fix13_oracle(f(3, 4), f(-5, 1), &q), 0);
    }

    #[test]
    fn fix13_generic_instance() {
        let q = sqrt2_query((64, 16, 64), 10.5, 1.0);
        let (n1, n3) = (f(40, -30), f(-35, 41));
        let oracle = count_fix13(n1, n3, &q, Method::Oracle).unwrap();
        let fast = count_fix13(n1, n3, &q, Method::Annulus).unwrap();
        assert_eq!(oracle.count, fast.count);
        assert_eq!(fast.method, Method::Annulus);
    }

    #[test]
    fn fix1_example_and_wick_difference() {
        let q = sqrt2_query((16, 4, 4), 0.0, 1.0);
        let n1 = f(16, 0);
        let oracle = count_fix1(n1, &q, Method::Oracle).unwrap().count;
        let strip = count_fix1(n1, &q, Method::Strip).unwrap().count;
        assert_eq!(oracle, strip);

        // wick off minus wick on equals the pairs with n2 in {n1, n3}
        let q_off = q.clone().with_wick(false);
        let off = count_fix1(n1, &q_off, Method::Strip).unwrap().count;
        let excluded = shell_points(4)
            .unwrap()
            .into_iter()
            .flat_map(|n2| shell_points(4).unwrap().into_iter().map(move |n3| (n2, n3)))
            .filter(|&(n2, n3)| (n2 == n1 || n2 == n3) && is_member(n1, n2, n3, &q_off))
            .count() as u64;
        assert_eq!(off - strip, excluded);
        assert!(excluded > 0);
    }

    #[test]
    fn fix1_beyond_range_is_empty() {
        let q = sqrt2_query((8, 4, 4), 1e4, 1.0);
        assert_eq!(fix1_strip(f(8, 0), &q), 0);
    }

    #[test]
    fn count_nondecreasing_in_width() {
        let (n1, n2, n3) = (f(5, -2), f(-3, 1), f(7, 7));
        let mut last = (0, 0, 0);
        for w in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let q = sqrt2_query((8, 4, 16), 2.0, w);
            let now = (fix12_strip(n1, n2, &q), fix13_annulus(n1, n3, &q), fix1_strip(n1, &q));
            assert!(now.0 >= last.0 && now.1 >= last.1 && now.2 >= last.2);
            last = now;
        }
    }

    #[test]
    fn swapped_line_counts_agree() {
        // <n1 - n2, n1 - n3> = Q(n1 - n2) - <n2 - n1, n2 - n3>
        let t = TorusSpec::sqrt2();
        for (n1, n2, mu) in [
            (f(6, 1), f(2, 1), -3.0),
            (f(-4, 5), f(0, -3), 7.25),
            (f(7, -2), f(-1, -2), 0.0),
        ] {
            let q = ResonanceQuery::new((8, 8, 8), mu, 1.5, t).with_wick(false);
            let mut r = q.clone();
            r.mu = t.qform(n1 - n2) - mu;
            let a = fix12_strip(n1, n2, &q);
            let b = fix12_strip(n2, n1, &r);
            assert_eq!(a, b);
            assert_eq!(a, fix12_oracle(n2, n1, &r));
        }
    }

    #[test]
    fn strip_handles_axis_aligned_and_steep_directions() {
        let q = sqrt2_query((16, 16, 16), 5.0, 0.5).with_wick(false);
        let n1 = f(0, 0);
        for n2 in ball_points(4).into_iter().filter(|n| *n != n1) {
            assert_eq!(fix12_strip(n1, n2, &q), fix12_oracle(n1, n2, &q), "n2 = {n2}");
        }
    }

    #[test]
    fn record_serializes_with_spec_field_names() {
        let q = sqrt2_query((4, 2, 8), 1.0, 1.0);
        let rec = count_fix12(f(3, 1), f(1, 1), &q, Method::Oracle).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        for key in ["query", "fixed", "count", "method", "elapsed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["N1", "N2", "N3", "mu", "W", "torus", "wick"] {
            assert!(v["query"].get(key).is_some(), "{key}");
        }
        assert_eq!(v["query"]["torus"], "1.41421356237");
        assert_eq!(v["fixed"]["n1"], serde_json::json!([3, 1]));
        assert_eq!(v["method"], "oracle");
        let back: CountRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
    }
}
