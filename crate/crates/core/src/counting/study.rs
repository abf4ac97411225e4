//! Sweeps that turn the counting kernels into growth-exponent and
//! best-constant measurements.
//!
//! Cell parameters are drawn sequentially from one [`StreamRng`] so that a
//! study is a pure function of its configuration; the counts themselves are
//! computed in parallel and collected in cell order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    count_fix1, count_fix12, count_fix13, fit_exponent, resonance_level, CountRecord, FitResult, Method, ResonanceQuery,
};
use crate::error::{Error, Result};
use crate::randomfield::StreamRng;
use crate::torus::{check_dyadic, shell_points, FreqIndex, TorusSpec};

/// Worst case at one value of the sweep variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    /// Sweep variable (a scale, or a product of scales).
    pub x: f64,
    pub max_count: u64,
    /// Largest `count / bound` over the cells at this point.
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyReport {
    pub records: Vec<CountRecord>,
    pub points: Vec<ScalePoint>,
    /// Slope of `max_count` against `x`.
    pub fit: FitResult,
    /// Smallest `C` with `count <= C bound` over every cell.
    pub best_constant: f64,
}

impl StudyReport {
    /// `C_run(x) = max over x' <= x of constant(x')`.
    pub fn running_constants(&self) -> Vec<(f64, f64)> {
        let mut best: f64 = 0.0;
        self.points
            .iter()
            .map(|p| {
                best = best.max(p.constant);
                (p.x, best)
            })
            .collect()
    }
}

fn dyadics_up_to(n: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |&k| Some(2 * k))
        .take_while(|&k| k <= n)
        .collect()
}

struct Shells(BTreeMap<u64, Vec<FreqIndex>>);

impl Shells {
    fn new() -> Self {
        Self(BTreeMap::new())
    }

    fn get(&mut self, scale: u64) -> &[FreqIndex] {
        self.0
            .entry(scale)
            .or_insert_with(|| shell_points(scale).expect("dyadic"))
    }

    fn pick(&mut self, scale: u64, rng: &mut StreamRng) -> FreqIndex {
        *rng.choose(self.get(scale))
    }
}

fn summarize(records: Vec<CountRecord>, keyed: Vec<(f64, u64, f64)>) -> Result<StudyReport> {
    let mut by_x: BTreeMap<u64, ScalePoint> = BTreeMap::new();
    for (x, count, bound) in keyed {
        let key = x.to_bits();
        let e = by_x.entry(key).or_insert(ScalePoint {
            x,
            max_count: 0,
            constant: 0.0,
        });
        e.max_count = e.max_count.max(count);
        e.constant = e.constant.max(count as f64 / bound);
    }
    let mut points: Vec<ScalePoint> = by_x.into_values().collect();
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    let fit_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.max_count > 0)
        .map(|p| (p.x, p.max_count as f64))
        .collect();
    let fit = fit_exponent(&fit_pts)?;
    let best_constant = points.iter().map(|p| p.constant).fold(0.0, f64::max);
    Ok(StudyReport {
        records,
        points,
        fit,
        best_constant,
    })
}

/// Fixed `(n1, n2)`, counting `n3`: the bound is `N3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineStudy {
    /// Values of `N3`.
    pub scales: Vec<u64>,
    pub cells: usize,
    pub width: f64,
    pub torus: TorusSpec,
    pub seed: u64,
    pub method: Method,
}

/// Each cell draws `N1, N2` among the dyadic scales up to `N3`, points
/// `n1 != n2` in those shells, and a level `mu` planted at a random `n3` of
/// shell `N3` and jittered uniformly within `W`.
pub fn line_study(cfg: &LineStudy) -> Result<StudyReport> {
    for &s in &cfg.scales {
        check_dyadic(s)?;
    }
    let mut rng = StreamRng::new(cfg.seed, 4_3);
    let mut shells = Shells::new();
    let mut cells = Vec::new();
    for &n3s in &cfg.scales {
        let scales = dyadics_up_to(n3s);
        for _ in 0..cfg.cells {
            let n1s = *rng.choose(&scales);
            let n2s = *rng.choose(&scales);
            let n1 = shells.pick(n1s, &mut rng);
            let n2 = loop {
                let p = shells.pick(n2s, &mut rng);
                if p != n1 {
                    break p;
                }
            };
            let anchor = shells.pick(n3s, &mut rng);
            let mu = resonance_level(n1, n2, anchor, &cfg.torus) + rng.range(-cfg.width, cfg.width);
            let q = ResonanceQuery::new((n1s, n2s, n3s), mu, cfg.width, cfg.torus);
            cells.push((q, n1, n2));
        }
    }
    let records: Vec<CountRecord> = cells
        .par_iter()
        .map(|(q, n1, n2)| count_fix12(*n1, *n2, q, cfg.method))
        .collect::<Result<_>>()?;
    let keyed = records
        .iter()
        .map(|r| (r.query.n3_scale as f64, r.count, r.query.n3_scale as f64))
        .collect();
    summarize(records, keyed)
}

/// Which case of the annulus bound a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusBranch {
    /// `N2, N3 <= N1 / 8`; bound `max(N2 / N1^{1/3}, 1)`.
    Separated,
    /// `N3 = N1`, `N2 <= N1 / 8`; bound `N2^{2/3}`.
    Comparable,
}

impl AnnulusBranch {
    pub fn bound(self, n1: u64, n2: u64) -> f64 {
        match self {
            AnnulusBranch::Separated => (n2 as f64 / (n1 as f64).cbrt()).max(1.0),
            AnnulusBranch::Comparable => (n2 as f64).powf(2.0 / 3.0),
        }
    }
}

/// Fixed `(n1, n3)`, counting `n2` in an annulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusStudy {
    /// Values of `N1`.
    pub scales: Vec<u64>,
    pub branch: AnnulusBranch,
    /// Cells per `(N1, N2, N3)` triple.
    pub cells: usize,
    pub width: f64,
    pub torus: TorusSpec,
    pub seed: u64,
    pub method: Method,
}

/// Draw `n1`, `n2*` in their shells and `n3` in shell `N3` with
/// `|level(n1, n2*, n3)| <= N1`, then plant `mu` at that level with a
/// uniform jitter within `W`. Returns `None` when no admissible `n3` exists.
fn planted_13(
    scales: (u64, u64, u64),
    width: f64,
    torus: &TorusSpec,
    shells: &mut Shells,
    rng: &mut StreamRng,
) -> Option<(ResonanceQuery, FreqIndex, FreqIndex)> {
    let (n1s, n2s, n3s) = scales;
    for _ in 0..16 {
        let n1 = shells.pick(n1s, rng);
        let n2 = shells.pick(n2s, rng);
        let admissible: Vec<FreqIndex> = shells
            .get(n3s)
            .iter()
            .copied()
            .filter(|&n3| resonance_level(n1, n2, n3, torus).abs() <= n1s as f64)
            .collect();
        if admissible.is_empty() {
            continue;
        }
        let n3 = *rng.choose(&admissible);
        let mu = resonance_level(n1, n2, n3, torus) + rng.range(-width, width);
        return Some((ResonanceQuery::new(scales, mu, width, *torus), n1, n3));
    }
    None
}

pub fn annulus_study(cfg: &AnnulusStudy) -> Result<StudyReport> {
    for &s in &cfg.scales {
        check_dyadic(s)?;
        if s < 8 {
            return Err(Error::InvalidArgument(format!("annulus sweep needs N1 >= 8, got {s}")));
        }
    }
    let mut rng = StreamRng::new(cfg.seed, 4_4);
    let mut shells = Shells::new();
    let mut cells = Vec::new();
    for &n1s in &cfg.scales {
        let small = dyadics_up_to(n1s / 8);
        let triples: Vec<(u64, u64, u64)> = match cfg.branch {
            AnnulusBranch::Separated => small
                .iter()
                .flat_map(|&n2| small.iter().map(move |&n3| (n1s, n2, n3)))
                .collect(),
            AnnulusBranch::Comparable => small.iter().map(|&n2| (n1s, n2, n1s)).collect(),
        };
        for t in triples {
            for _ in 0..cfg.cells {
                if let Some(cell) = planted_13(t, cfg.width, &cfg.torus, &mut shells, &mut rng) {
                    cells.push(cell);
                }
            }
        }
    }
    let records: Vec<CountRecord> = cells
        .par_iter()
        .map(|(q, n1, n3)| count_fix13(*n1, *n3, q, cfg.method))
        .collect::<Result<_>>()?;
    let keyed = records
        .iter()
        .map(|r| {
            let q = &r.query;
            (q.n1_scale as f64, r.count, cfg.branch.bound(q.n1_scale, q.n2_scale))
        })
        .collect();
    summarize(records, keyed)
}

/// Fixed `n1`, counting pairs `(n2, n3)`: the bound is `N2 N3` up to `N^eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStudy {
    /// Largest `N1`; every dyadic triple with `N2, N3 <= N1 <= max_scale`
    /// is visited.
    pub max_scale: u64,
    pub min_scale: u64,
    /// Random cells per triple, in addition to one cell at `mu = 0`.
    pub cells: usize,
    pub width: f64,
    pub torus: TorusSpec,
    pub seed: u64,
    pub method: Method,
}

pub fn pair_study(cfg: &PairStudy) -> Result<StudyReport> {
    check_dyadic(cfg.max_scale)?;
    check_dyadic(cfg.min_scale)?;
    let mut rng = StreamRng::new(cfg.seed, 4_6);
    let mut shells = Shells::new();
    let mut cells = Vec::new();
    for n1s in dyadics_up_to(cfg.max_scale).into_iter().filter(|&s| s >= cfg.min_scale) {
        for n2s in dyadics_up_to(n1s) {
            for n3s in dyadics_up_to(n1s) {
                for c in 0..=cfg.cells {
                    let n1 = shells.pick(n1s, &mut rng);
                    let mu = if c == 0 {
                        0.0
                    } else {
                        rng.range(-(n1s as f64), n1s as f64)
                    };
                    cells.push((ResonanceQuery::new((n1s, n2s, n3s), mu, cfg.width, cfg.torus), n1));
                }
            }
        }
    }
    let records: Vec<CountRecord> = cells
        .par_iter()
        .map(|(q, n1)| count_fix1(*n1, q, cfg.method))
        .collect::<Result<_>>()?;
    let keyed = records
        .iter()
        .map(|r| {
            let p = (r.query.n2_scale * r.query.n3_scale) as f64;
            (p, r.count, p)
        })
        .collect();
    summarize(records, keyed)
}

/// Exhaustive comparison of the optimized enumerators against the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub max_scale: u64,
    /// Levels as multiples of `N1`.
    pub mu_factors: Vec<f64>,
    pub widths: Vec<f64>,
    pub torus: TorusSpec,
    pub seed: u64,
    pub fix12_points: usize,
    pub fix13_points: usize,
    pub fix1_points: usize,
}

impl CrossCheck {
    pub fn standard(max_scale: u64, torus: TorusSpec, seed: u64) -> Self {
        Self {
            max_scale,
            mu_factors: vec![0.0, 0.5, -0.5, 1.0, -1.0],
            widths: vec![0.5, 1.0, 2.0],
            torus,
            seed,
            fix12_points: 2,
            fix13_points: 2,
            fix1_points: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossReport {
    pub comparisons: usize,
    /// `(oracle, fast)` pairs whose counts differ.
    pub mismatches: Vec<(CountRecord, CountRecord)>,
    pub nonzero: usize,
}

#[derive(Clone, Copy)]
enum Kind {
    Fix12(FreqIndex, FreqIndex),
    Fix13(FreqIndex, FreqIndex),
    Fix1(FreqIndex),
}

pub fn cross_check(cfg: &CrossCheck) -> Result<CrossReport> {
    check_dyadic(cfg.max_scale)?;
    let scales = dyadics_up_to(cfg.max_scale);
    let mut rng = StreamRng::new(cfg.seed, 7);
    let mut shells = Shells::new();
    let mut jobs: Vec<(ResonanceQuery, Kind)> = Vec::new();
    let mut alternate = false;
    for &a in &scales {
        for &b in &scales {
            for &c in &scales {
                for &f in &cfg.mu_factors {
                    for &w in &cfg.widths {
                        let base = ResonanceQuery::new((a, b, c), f * a as f64, w, cfg.torus);
                        for wick in [true, false] {
                            let q = base.clone().with_wick(wick);
                            for _ in 0..cfg.fix12_points {
                                let n1 = shells.pick(a, &mut rng);
                                let n2 = loop {
                                    let p = shells.pick(b, &mut rng);
                                    if p != n1 {
                                        break p;
                                    }
                                };
                                jobs.push((q.clone(), Kind::Fix12(n1, n2)));
                            }
                            for _ in 0..cfg.fix13_points {
                                let n1 = shells.pick(a, &mut rng);
                                let n3 = shells.pick(c, &mut rng);
                                jobs.push((q.clone(), Kind::Fix13(n1, n3)));
                            }
                        }
                        for _ in 0..cfg.fix1_points {
                            alternate = !alternate;
                            let n1 = shells.pick(a, &mut rng);
                            jobs.push((base.clone().with_wick(alternate), Kind::Fix1(n1)));
                        }
                    }
                }
            }
        }
    }
    let results: Vec<(CountRecord, CountRecord)> = jobs
        .par_iter()
        .map(|(q, kind)| -> Result<(CountRecord, CountRecord)> {
            Ok(match *kind {
                Kind::Fix12(n1, n2) => (
                    count_fix12(n1, n2, q, Method::Oracle)?,
                    count_fix12(n1, n2, q, Method::Strip)?,
                ),
                Kind::Fix13(n1, n3) => (
                    count_fix13(n1, n3, q, Method::Oracle)?,
                    count_fix13(n1, n3, q, Method::Annulus)?,
                ),
                Kind::Fix1(n1) => (count_fix1(n1, q, Method::Oracle)?, count_fix1(n1, q, Method::Strip)?),
            })
        })
        .collect::<Result<_>>()?;
    let nonzero = results.iter().filter(|(o, _)| o.count > 0).count();
    let comparisons = results.len();
    let mismatches = results.into_iter().filter(|(o, f)| o.count != f.count).collect();
    Ok(CrossReport {
        comparisons,
        mismatches,
        nonzero,
    })
}
