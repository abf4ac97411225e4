//! Random data, its sup norm, and the chaos tail estimator.

use num_complex::Complex64;
use proptest::prelude::*;
use wicktorus::harness::in_pool;
use wicktorus::randomfield::{
    chaos_tail, linf_scan, philox4x32_10, sample_data, sup_norm, ChaosTensor, GaussianEnsemble, StreamRng,
};
use wicktorus::{FreqIndex, SpectralField, TorusSpec};

/// `sum a_n e^{i n.x}` evaluated term by term.
fn direct(f: &SpectralField, x: (f64, f64)) -> Complex64 {
    f.modes()
        .map(|(n, a)| a * Complex64::from_polar(1.0, n.n1 as f64 * x.0 + n.n2 as f64 * x.1))
        .sum()
}

#[test]
fn philox_reference_vectors() {
    // published known-answer vectors for Philox4x32-10
    assert_eq!(
        philox4x32_10([0; 4], [0; 2]),
        [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]
    );
    assert_eq!(
        philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
        [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
    );
    assert_eq!(
        philox4x32_10(
            [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344],
            [0xa4093822, 0x299f31d0]
        ),
        [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
    );
}

#[test]
fn gaussian_moments() {
    // 1e5 draws: E g = 0, E|g|^2 = 1, E g^2 = 0 within 4 standard errors
    let n = 100_000usize;
    let ens = GaussianEnsemble::new(11, TorusSpec::sqrt2());
    let side = 160i64;
    let draws: Vec<Complex64> = (-side..side)
        .flat_map(|a| (-side..side).map(move |b| FreqIndex::new(a, b)))
        .take(n)
        .map(|k| ens.coefficient(k))
        .collect();
    assert_eq!(draws.len(), n);
    let nf = n as f64;
    let mean: Complex64 = draws.iter().sum::<Complex64>() / nf;
    let second: f64 = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / nf;
    let pseudo: Complex64 = draws.iter().map(|z| z * z).sum::<Complex64>() / nf;
    // sd of Re g is 1/sqrt 2; |g|^2 is Exp(1) with sd 1; Re g^2 has sd 1/sqrt 2
    let se_half = (0.5 / nf).sqrt();
    let se_one = (1.0 / nf).sqrt();
    assert!(mean.re.abs() < 4.0 * se_half && mean.im.abs() < 4.0 * se_half, "{mean}");
    assert!((second - 1.0).abs() < 4.0 * se_one, "{second}");
    assert!(
        pseudo.re.abs() < 4.0 * se_half && pseudo.im.abs() < 4.0 * se_half,
        "{pseudo}"
    );

    let mut rng = StreamRng::new(3, 9);
    let second: f64 = (0..n).map(|_| rng.gaussian().norm_sqr()).sum::<f64>() / nf;
    assert!((second - 1.0).abs() < 4.0 * se_one);
}

#[test]
fn mean_mass_matches_the_weight_sum() {
    let t = TorusSpec::sqrt2();
    let scale = 8;
    let target: f64 = (-8i64..=8)
        .flat_map(|a| (-8i64..=8).map(move |b| a * a + b * b))
        .filter(|&r2| r2 > 0 && r2 <= 64)
        .map(|r2| 1.0 / r2 as f64)
        .sum();
    let masses: Vec<f64> = (0..10_000u64)
        .map(|s| sample_data(&GaussianEnsemble::new(s, t), scale).mass())
        .collect();
    let n = masses.len() as f64;
    let mean = masses.iter().sum::<f64>() / n;
    let var = masses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(
        (mean - target).abs() < 3.0 * (var / n).sqrt(),
        "mean {mean}, target {target}"
    );
}

#[test]
fn sup_norm_resolutions_agree() {
    let f = sample_data(&GaussianEnsemble::new(5, TorusSpec::sqrt2()), 64);
    let coarse = sup_norm(&f, 8).unwrap().value;
    let fine = sup_norm(&f, 16).unwrap().value;
    assert!((coarse - fine).abs() < 0.01 * fine, "{coarse} vs {fine}");
}

#[test]
fn aligned_coefficients_peak_at_origin() {
    let t = TorusSpec::sqrt2();
    let f = SpectralField::from_fn(8, t, |n| {
        if n == FreqIndex::ZERO {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0 / n.norm(), 0.0)
        }
    });
    let total: f64 = f.modes().map(|(_, a)| a.re).sum();
    let s = sup_norm(&f, 4).unwrap();
    assert!((s.value - total).abs() < 1e-12 * total);
}

#[test]
fn sup_norm_is_reproducible_across_pools() {
    let t = TorusSpec::golden();
    let seeds: Vec<u64> = (0..6).collect();
    let a = in_pool(1, || linf_scan(&seeds, &[4, 8, 16], t, 2).unwrap()).unwrap();
    let b = in_pool(3, || linf_scan(&seeds, &[4, 8, 16], t, 2).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn tails_are_monotone_and_start_at_one() {
    let grid = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let r = chaos_tail(&ChaosTensor::single(), &grid, 20_000, 4, 4.0).unwrap();
    assert_eq!(r.empirical_tail[0], 1.0);
    assert!(r.empirical_tail.windows(2).all(|w| w[1] <= w[0]));
    let t = ChaosTensor::reference_k2(4);
    let grid: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|x| x * t.l2_norm()).collect();
    let r = chaos_tail(&t, &grid, 20_000, 4, 4.0).unwrap();
    assert!(r.empirical_tail.windows(2).all(|w| w[1] <= w[0]));
    assert!(chaos_tail(&t, &grid, 0, 4, 4.0).is_err());
}

#[test]
fn second_order_norm_by_enumeration() {
    // c_{mn} = 1/(|m||n|) off the diagonal on 0 < |m|, |n| <= R
    let r = 3i64;
    let pts: Vec<f64> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| a * a + b * b))
        .filter(|&q| q > 0 && q <= r * r)
        .map(|q| 1.0 / q as f64)
        .collect();
    let mut sum = 0.0;
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate() {
            if i != j {
                sum += x * y;
            }
        }
    }
    let t = ChaosTensor::reference_k2(r as u64);
    // F = 2 sum_{i<j} c_ij g_i g_j, so E|F|^2 = 4 sum_{i<j} c^2 = 2 sum_{i != j} c^2
    let norm = t.l2_norm();
    assert!((norm * norm - 2.0 * sum).abs() < 1e-12 * sum, "{norm} vs {sum}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncations_nest(seed in any::<u64>(), k in 0u32..4) {
        let t = TorusSpec::sqrt2();
        let ens = GaussianEnsemble::new(seed, t);
        let small = 1u64 << k;
        let big = sample_data(&ens, 2 * small);
        let f = sample_data(&ens, small);
        for (n, a) in f.modes() {
            prop_assert_eq!(a, big.get(n));
        }
        prop_assert_eq!(f.get(FreqIndex::ZERO), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sup_norm_bounds_pointwise_values(seed in any::<u64>(), x in 0.0f64..6.3, y in 0.0f64..6.3) {
        let f = sample_data(&GaussianEnsemble::new(seed, TorusSpec::sqrt2()), 8);
        let s = sup_norm(&f, 2).unwrap();
        prop_assert!(direct(&f, (x, y)).norm() <= s.value + s.pad + 1e-12);
        // the grid value is attained somewhere, so it cannot exceed the sum of moduli
        let l1: f64 = f.modes().map(|(_, a)| a.norm()).sum();
        prop_assert!(s.value <= l1 + 1e-12);
    }
}
