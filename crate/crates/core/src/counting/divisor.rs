use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of positive divisors, by trial division.
pub fn divisor_count(mut n: u64) -> u64 {
    assert!(n > 0, "divisor_count(0) is undefined");
    let mut total = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            total *= e + 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        total *= 2;
    }
    total
}

/// Ordered integer pairs `(a, b)` with `a b = m`, signs included.
pub fn divisor_pairs(m: i64) -> Result<u64> {
    if m == 0 {
        return Err(Error::ZeroArgument);
    }
    Ok(2 * divisor_count(m.unsigned_abs()))
}

/// Direct enumeration over `|a| <= |m|`; slow, for cross-checks only.
pub fn divisor_pairs_brute(m: i64) -> Result<u64> {
    if m == 0 {
        return Err(Error::ZeroArgument);
    }
    let bound = m.abs();
    let mut count = 0;
    for a in -bound..=bound {
        if a != 0 && m % a == 0 {
            count += 1;
        }
    }
    Ok(count)
}

/// `d(n)` for every `0 <= n <= limit` (index 0 holds 0).
pub fn divisor_count_sieve(limit: usize) -> Vec<u32> {
    let mut d = vec![0u32; limit + 1];
    for k in 1..=limit {
        for m in (k..=limit).step_by(k) {
            d[m] += 1;
        }
    }
    d
}

/// Largest running maximum of the pair count below a power of ten.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecadeExponent {
    pub decade: u32,
    pub m: u64,
    pub pairs: u64,
    pub exponent: f64,
}

/// For each `10^k` with `lo <= k <= hi`, the last record setter `M <= 10^k`
/// of `M -> divisor_pairs(M)` and its exponent `log(pairs) / log(M)`.
pub fn record_exponents(lo: u32, hi: u32) -> Vec<DecadeExponent> {
    let limit = 10usize.pow(hi);
    let d = divisor_count_sieve(limit);
    let mut best = 0u32;
    let mut last = (1u64, 2u64);
    let mut out = Vec::new();
    let mut next_decade = lo;
    let mut edge = 10usize.pow(lo);
    // M = 1 has log M = 0; start from 2
    for (m, &dm) in d.iter().enumerate().skip(2) {
        if dm > best {
            best = dm;
            last = (m as u64, 2 * dm as u64);
        }
        while m == edge {
            out.push(DecadeExponent {
                decade: next_decade,
                m: last.0,
                pairs: last.1,
                exponent: (last.1 as f64).ln() / (last.0 as f64).ln(),
            });
            next_decade += 1;
            if next_decade > hi {
                return out;
            }
            edge = 10usize.pow(next_decade);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(divisor_pairs(1).unwrap(), 2);
        assert_eq!(divisor_pairs(12).unwrap(), 12);
        assert_eq!(divisor_pairs(-6).unwrap(), 8);
        assert_eq!(divisor_pairs_brute(12).unwrap(), 12);
        assert_eq!(divisor_pairs_brute(-6).unwrap(), 8);
        assert!(matches!(divisor_pairs(0), Err(Error::ZeroArgument)));
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let d = divisor_count_sieve(5000);
        for n in 1..=5000u64 {
            assert_eq!(d[n as usize] as u64, divisor_count(n), "n = {n}");
        }
    }

    #[test]
    fn record_setters() {
        let rec = record_exponents(2, 4);
        let ms: Vec<u64> = rec.iter().map(|r| r.m).collect();
        assert_eq!(ms, vec![60, 840, 7560]);
        assert_eq!(rec[0].pairs, 24);
        assert!((rec[1].exponent - (64f64).ln() / (840f64).ln()).abs() < 1e-15);
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    proptest! {
        #[test]
        fn sign_symmetry(m in 1i64..100_000) {
            prop_assert_eq!(divisor_pairs(m).unwrap(), divisor_pairs(-m).unwrap());
        }

        #[test]
        fn multiplicative_on_coprimes(p in 1u64..100, q in 1u64..100) {
            prop_assume!(gcd(p, q) == 1);
            let brute = |n: u64| (1..=n).filter(|k| n.is_multiple_of(*k)).count() as u64;
            prop_assert_eq!(brute(p * q), brute(p) * brute(q));
            prop_assert_eq!(divisor_count(p * q), brute(p * q));
        }

        #[test]
        fn matches_brute_force(m in -10_000i64..10_000) {
            prop_assume!(m != 0);
            prop_assert_eq!(divisor_pairs(m).unwrap(), divisor_pairs_brute(m).unwrap());
        }
    }
}
