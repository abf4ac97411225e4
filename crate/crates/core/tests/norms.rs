//! Space-time norms and scans against one-dimensional quadrature.

use num_complex::Complex64;
use proptest::prelude::*;
use wicktorus::norms::{
    lp_norm, matrix_cs_check, strichartz_ratio, time_localization_scan, xsb_norm, CsOrientation, FieldFamily,
    LocalizationVariant, Matrix, SpaceTimeField, TimeGrid, XsbParams,
};
use wicktorus::randomfield::{sample_data, GaussianEnsemble, StreamRng};
use wicktorus::spectral::cutoff::phi_delta;
use wicktorus::{FreqIndex, SpectralField, TorusSpec};

fn windowed_wave(u0: &SpectralField, delta: f64, samples: usize) -> SpaceTimeField {
    SpaceTimeField::free_wave(TimeGrid::centered(2.0 * delta, samples), u0)
        .windowed(delta)
        .unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `(1/2pi) int <lambda>^{2b} |phi_d^(lambda)|^2 d lambda` with the transform
/// itself computed by quadrature.
fn window_weight(delta: f64, b: f64, lambda_max: f64) -> f64 {
    let transform = |l: f64| -> f64 {
        let re = simpson(|t| phi_delta(t, delta) * (l * t).cos(), -delta, delta, 4000);
        let im = simpson(|t| phi_delta(t, delta) * (l * t).sin(), -delta, delta, 4000);
        re * re + im * im
    };
    // even integrand
    2.0 * simpson(|l| (1.0 + l * l).powf(b) * transform(l), 0.0, lambda_max, 8000) / std::f64::consts::TAU
}

#[test]
fn windowed_single_mode_against_quadrature() {
    let t = TorusSpec::sqrt2();
    let n0 = FreqIndex::new(2, -1);
    let u0 = SpectralField::single_mode(4, t, n0, Complex64::new(1.0, 0.0)).unwrap();
    let delta = 1.0;
    // A span of 16 delta keeps the periodized spectrum free of aliasing for b > 0.
    let wide = SpaceTimeField::free_wave(TimeGrid::centered(8.0 * delta, 4096), &u0)
        .windowed(delta)
        .unwrap();
    let tight = windowed_wave(&u0, delta, 1024);
    for (s, b) in [(0.0, 0.0), (0.3, 0.0), (0.0, 0.51), (0.5, 0.51)] {
        let bracket = 1.0 + n0.norm_sq() as f64;
        let expect = (bracket.powf(s) * window_weight(delta, b, 400.0)).sqrt();
        let got = xsb_norm(&wide, XsbParams::new(s, b)).unwrap();
        assert!(
            (got - expect).abs() < 1e-7 * expect,
            "s = {s}, b = {b}: {got} vs {expect}"
        );
        let got = xsb_norm(&tight, XsbParams::new(s, b)).unwrap();
        assert!(
            (got - expect).abs() < 2e-3 * expect,
            "s = {s}, b = {b}: {got} vs {expect}"
        );
    }
}

#[test]
fn constant_mode_l4_against_quadrature() {
    let t = TorusSpec::golden();
    let a = Complex64::new(0.6, -0.3);
    let u0 = SpectralField::single_mode(2, t, FreqIndex::new(1, 1), a).unwrap();
    let delta = 0.5;
    let v = windowed_wave(&u0, delta, 512);
    let window = simpson(|s| phi_delta(s, delta).powi(4), -delta, delta, 20_000).powf(0.25);
    let got = lp_norm(&v, 4.0, 2).unwrap();
    assert!((got - a.norm() * window).abs() < 1e-9 * got, "{got}");
}

#[test]
fn l2_three_ways() {
    let t = TorusSpec::sqrt2();
    for seed in 0..4 {
        let v = windowed_wave(&sample_data(&GaussianEnsemble::new(seed, t), 8), 0.1, 256);
        let a = xsb_norm(&v, XsbParams::new(0.0, 0.0)).unwrap();
        let b = lp_norm(&v, 2.0, 2).unwrap();
        let c = v.l2_norm();
        assert!((a - c).abs() < 1e-10 * c && (b - c).abs() < 1e-10 * c);
    }
}

#[test]
fn spatial_oversampling_is_converged() {
    let t = TorusSpec::sqrt2();
    for scale in [16, 64] {
        let v = windowed_wave(&sample_data(&GaussianEnsemble::new(1, t), scale), 0.05, 64);
        for p in [3.0, 4.0] {
            let a = lp_norm(&v, p, 4).unwrap();
            let b = lp_norm(&v, p, 8).unwrap();
            assert!((a - b).abs() < 0.005 * b, "N = {scale}, p = {p}: {a} vs {b}");
        }
    }
}

#[test]
fn xsb_is_stable_under_time_refinement() {
    let t = TorusSpec::sqrt2();
    let u0 = sample_data(&GaussianEnsemble::new(2, t), 8);
    let p = XsbParams::new(0.1, 0.51);
    let a = xsb_norm(&windowed_wave(&u0, 1.0, 1024), p).unwrap();
    let b = xsb_norm(&windowed_wave(&u0, 1.0, 2048), p).unwrap();
    assert!((a - b).abs() < 0.005 * b, "{a} vs {b}");
}

#[test]
fn strichartz_ratio_is_translation_invariant() {
    let t = TorusSpec::sqrt2();
    let mut rng = StreamRng::new(5, 1);
    let base: Vec<(FreqIndex, Complex64)> = wicktorus::torus::ball_points(3)
        .into_iter()
        .map(|n| (n, rng.gaussian()))
        .collect();
    let centred = SpectralField::from_modes(3, t, base.iter().copied()).unwrap();
    let shift = FreqIndex::new(3, -2);
    let moved = SpectralField::from_modes(8, t, base.iter().map(|&(n, a)| (n + shift, a))).unwrap();
    let (a, b) = (strichartz_ratio(&centred), strichartz_ratio(&moved));
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
}

#[test]
fn time_localization_exponents() {
    let t = TorusSpec::sqrt2();
    let deltas = [0.5, 0.25, 0.125, 0.0625];
    let pure = time_localization_scan(
        &deltas,
        LocalizationVariant::Xsb {
            s: 0.0,
            b: 0.0,
            samples: 256,
        },
        &FieldFamily::Constant,
        t,
    )
    .unwrap();
    assert!((pure.fit.slope - 0.5).abs() < 1e-6, "{}", pure.fit.slope);

    let b = 0.51;
    let sharp = time_localization_scan(
        &deltas,
        LocalizationVariant::Xsb {
            s: 0.0,
            b,
            samples: 512,
        },
        &FieldFamily::Random { seed: 0, scale: 8 },
        t,
    )
    .unwrap();
    assert!(sharp.fit.slope <= 0.5 - b + 0.05, "{}", sharp.fit.slope);

    let l4 = time_localization_scan(
        &deltas,
        LocalizationVariant::L4,
        &FieldFamily::Random { seed: 0, scale: 8 },
        t,
    )
    .unwrap();
    assert!(l4.fit.slope >= 0.1 / 8.0 - 0.05, "{}", l4.fit.slope);
}

fn unit_ball(rng: &mut StreamRng, len: usize) -> Vec<Complex64> {
    let g: Vec<Complex64> = (0..len).map(|_| rng.gaussian()).collect();
    let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let r = rng.uniform().sqrt() * (1.0 - 1e-15);
    g.into_iter().map(|z| z * (r / norm)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matrix_bound_holds(seed in any::<u64>(), rows in 1usize..=32, cols in 1usize..=32, sparse in any::<bool>()) {
        let mut rng = StreamRng::new(seed, 2);
        let a = Matrix::from_fn(rows, cols, |_, _| {
            let z = rng.gaussian();
            if sparse && rng.below(3) != 0 { Complex64::new(0.0, 0.0) } else { z }
        });
        let b = unit_ball(&mut rng, cols);
        for o in [CsOrientation::Rows, CsOrientation::Columns] {
            let (lhs, rhs) = matrix_cs_check(&a, &b, o).unwrap();
            // lhs computed directly here
            let direct: f64 = (0..rows)
                .map(|i| (0..cols).map(|j| a.get(i, j) * b[j]).sum::<Complex64>().norm_sqr())
                .sum();
            prop_assert!((lhs - direct).abs() <= 1e-12 * direct.max(1e-300));
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}

#[test]
fn matrix_precondition_is_enforced() {
    let a = Matrix::identity(3);
    let b = vec![Complex64::new(1.0, 0.0); 3];
    assert!(matrix_cs_check(&a, &b, CsOrientation::Rows).is_err());
}
