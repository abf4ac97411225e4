//! Gaussian random data `sum g_n / |n| e^{i n . x}` and Monte Carlo studies
//! of its tails and sup norm.
//!
//! The zero mode is never populated: the weight `1/|n|` is undefined there.
//! Each `g_n` is a pure function of `(seed, n)`, so truncations at different
//! scales are nested and sampling order does not matter.

mod philox;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use philox::{complex_gaussian, derive_seed, key_of, philox4x32_10, to_unit, uniforms, StreamRng, PRNG_ID};

use crate::counting::{fit_exponent, FitResult};
use crate::error::{Error, Result};
use crate::spectral::grid::{PhysGrid, Workspace};
use crate::spectral::SpectralField;
use crate::torus::{FreqIndex, TorusSpec};

/// Counter word reserved for initial-data coefficients.
const COEFF_STREAM: u32 = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    pub seed: u64,
    pub torus: TorusSpec,
    pub prng_id: String,
}

impl GaussianEnsemble {
    pub fn new(seed: u64, torus: TorusSpec) -> Self {
        Self {
            seed,
            torus,
            prng_id: PRNG_ID.to_string(),
        }
    }

    /// `g_n`: Philox block at counter `(n1, n2, 0, 0)` (two's complement
    /// words) under key `(seed lo, seed hi)`, then Box-Muller.
    pub fn coefficient(&self, n: FreqIndex) -> Complex64 {
        let block = philox4x32_10(
            [n.n1 as i32 as u32, n.n2 as i32 as u32, COEFF_STREAM, 0],
            key_of(self.seed),
        );
        let (u1, u2) = uniforms(block);
        complex_gaussian(u1, u2)
    }
}

/// `a_n = g_n / |n|` for `0 < |n| <= N`, `a_0 = 0`.
pub fn sample_data(ensemble: &GaussianEnsemble, scale: u64) -> SpectralField {
    SpectralField::from_fn(scale, ensemble.torus, |n| {
        if n == FreqIndex::ZERO {
            Complex64::new(0.0, 0.0)
        } else {
            ensemble.coefficient(n) / n.norm()
        }
    })
}

/// `sum_{0 < |n| <= N} 1 / |n|^2`, the expected mass of [`sample_data`].
pub fn expected_mass(scale: u64) -> f64 {
    crate::torus::ball_points(scale)
        .into_iter()
        .filter(|&n| n != FreqIndex::ZERO)
        .map(|n| 1.0 / n.norm_sq() as f64)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    /// Largest modulus on the grid.
    pub value: f64,
    /// `(h / sqrt 2) sum |a_n| |n|`, `h = 2 pi / M`: the true supremum is at
    /// most `value + pad`.
    pub pad: f64,
    pub grid: usize,
}

/// Maximum modulus on an `M x M` grid, `M = oversample (2N + 1)`.
pub fn sup_norm(field: &SpectralField, oversample: usize) -> Result<SupNorm> {
    if oversample < 2 {
        return Err(Error::InvalidArgument(format!(
            "oversample must be >= 2, got {oversample}"
        )));
    }
    let m = oversample * field.side();
    let grid = PhysGrid::new(m);
    let vals = grid.synthesize(field, &mut Workspace::default());
    let value = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let grad: f64 = field.modes().map(|(n, a)| a.norm() * n.norm()).sum();
    let h = std::f64::consts::TAU / m as f64;
    Ok(SupNorm {
        value,
        pad: h / std::f64::consts::SQRT_2 * grad,
        grid: m,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinfRecord {
    pub gamma: String,
    #[serde(rename = "N")]
    pub scale: u64,
    pub seed: u64,
    pub prng_id: String,
    pub sup: f64,
    pub pad: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinfReport {
    pub records: Vec<LinfRecord>,
    /// `(N, median, 99th percentile)` per scale.
    pub quantiles: Vec<(u64, f64, f64)>,
    pub fit_median: FitResult,
    pub fit_p99: FitResult,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sup norms of `sample_data(seed, N)` over seeds, with slopes of the
/// median and 99th percentile against `N`.
pub fn linf_scan(seeds: &[u64], scales: &[u64], torus: TorusSpec, oversample: usize) -> Result<LinfReport> {
    if seeds.is_empty() || scales.len() < 2 {
        return Err(Error::InvalidArgument(
            "linf scan needs seeds and at least two scales".into(),
        ));
    }
    let mut records = Vec::new();
    let mut quantiles = Vec::new();
    for &n in scales {
        let grid = PhysGrid::new(oversample * (2 * n as usize + 1));
        let sups: Vec<LinfRecord> = seeds
            .par_iter()
            .map_init(Workspace::default, |ws, &seed| {
                let ens = GaussianEnsemble::new(seed, torus);
                let f = sample_data(&ens, n);
                let vals = grid.synthesize(&f, ws);
                let sup = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let grad: f64 = f.modes().map(|(k, a)| a.norm() * k.norm()).sum();
                LinfRecord {
                    gamma: torus.gamma_string(),
                    scale: n,
                    seed,
                    prng_id: ens.prng_id,
                    sup,
                    pad: std::f64::consts::TAU / grid.size() as f64 / std::f64::consts::SQRT_2 * grad,
                }
            })
            .collect();
        let mut vals: Vec<f64> = sups.iter().map(|r| r.sup).collect();
        vals.sort_by(f64::total_cmp);
        quantiles.push((n, quantile(&vals, 0.5), quantile(&vals, 0.99)));
        records.extend(sups);
    }
    let fit_median = fit_exponent(&quantiles.iter().map(|q| (q.0 as f64, q.1)).collect::<Vec<_>>())?;
    let fit_p99 = fit_exponent(&quantiles.iter().map(|q| (q.0 as f64, q.2)).collect::<Vec<_>>())?;
    Ok(LinfReport {
        records,
        quantiles,
        fit_median,
        fit_p99,
    })
}

/// Coefficients of `F = sum c_{i_1..i_k} g_{i_1} ... g_{i_k}` over `n_vars`
/// independent standard complex Gaussians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosTensor {
    pub k: usize,
    pub n_vars: usize,
    pub entries: Vec<(Vec<u32>, Complex64)>,
}

impl ChaosTensor {
    pub fn new(k: usize, n_vars: usize, entries: Vec<(Vec<u32>, Complex64)>) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "chaos order must be 1, 2 or 3, got {k}"
            )));
        }
        for (idx, c) in &entries {
            if idx.len() != k || idx.iter().any(|&i| i as usize >= n_vars) {
                return Err(Error::InvalidArgument(format!("bad tensor index {idx:?}")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(Self { k, n_vars, entries })
    }

    /// `F = g`.
    pub fn single() -> Self {
        Self::new(1, 1, vec![(vec![0], Complex64::new(1.0, 0.0))]).unwrap()
    }

    /// `c_{mn} = 1 / (|m| |n|)` for `m != n` in `0 < |m|, |n| <= radius`.
    pub fn reference_k2(radius: u64) -> Self {
        let pts: Vec<FreqIndex> = crate::torus::ball_points(radius)
            .into_iter()
            .filter(|&n| n != FreqIndex::ZERO)
            .collect();
        let mut entries = Vec::with_capacity(pts.len() * pts.len());
        for (i, m) in pts.iter().enumerate() {
            for (j, n) in pts.iter().enumerate() {
                if i != j {
                    entries.push((
                        vec![i as u32, j as u32],
                        Complex64::new(1.0 / (m.norm() * n.norm()), 0.0),
                    ));
                }
            }
        }
        Self::new(2, pts.len(), entries).unwrap()
    }

    /// `E|F|^2 = sum over index multisets S of |T_S|^2 prod_j m_j(S)!`, with
    /// `T_S` the sum of the coefficients whose indices rearrange to `S`.
    pub fn l2_norm(&self) -> f64 {
        let mut orbits: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (idx, c) in &self.entries {
            let mut key = idx.clone();
            key.sort_unstable();
            *orbits.entry(key).or_default() += c;
        }
        orbits
            .iter()
            .map(|(key, t)| {
                let mut stab = 1.0;
                let mut run = 1;
                for w in key.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                        stab *= run as f64;
                    } else {
                        run = 1;
                    }
                }
                stab * t.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn evaluate(&self, g: &[Complex64]) -> Complex64 {
        self.entries
            .iter()
            .map(|(idx, c)| idx.iter().fold(*c, |acc, &i| acc * g[i as usize]))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    /// `P(|F| > lambda)` over the trials.
    pub empirical_tail: Vec<f64>,
    /// Binomial standard error of each estimate.
    pub std_err: Vec<f64>,
    pub l2_norm: f64,
    /// The constant `K` of the bound curve.
    pub bound_constant: f64,
    /// `exp(1 - lambda^{2/k} / (K ||F||^{2/k}))`.
    pub bound: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub prng_id: String,
}

/// Monte Carlo tail of a chaos of order `k`; trial `t` draws its Gaussians
/// from `StreamRng::new(seed, t)`.
pub fn chaos_tail(
    tensor: &ChaosTensor,
    lambda_grid: &[f64],
    trials: usize,
    seed: u64,
    bound_constant: f64,
) -> Result<TailReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if !(bound_constant > 0.0) {
        return Err(Error::InvalidArgument("bound constant must be positive".into()));
    }
    let mut sorted = lambda_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted != lambda_grid {
        return Err(Error::InvalidArgument("lambda grid must be increasing".into()));
    }
    let moduli: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map_init(Vec::new, |g, t| {
            let mut rng = StreamRng::new(seed, t);
            g.clear();
            g.extend((0..tensor.n_vars).map(|_| rng.gaussian()));
            tensor.evaluate(g).norm()
        })
        .collect();
    let n = trials as f64;
    let empirical_tail: Vec<f64> = lambda_grid
        .iter()
        .map(|&l| moduli.iter().filter(|&&m| m > l).count() as f64 / n)
        .collect();
    let std_err = empirical_tail.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    let l2 = tensor.l2_norm();
    let e = 2.0 / tensor.k as f64;
    let bound = lambda_grid
        .iter()
        .map(|&l| (1.0 - l.powf(e) / (bound_constant * l2.powf(e))).exp())
        .collect();
    Ok(TailReport {
        k: tensor.k,
        lambda_grid: lambda_grid.to_vec(),
        empirical_tail,
        std_err,
        l2_norm: l2,
        bound_constant,
        bound,
        trials,
        seed,
        prng_id: PRNG_ID.to_string(),
    })
}
