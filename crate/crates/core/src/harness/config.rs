//! Experiment configuration: one flat TOML table.
//!
//! A file names its `experiment` and overrides any subset of the keys; the
//! rest come from [`ExperimentConfig::reference`] for that experiment.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::counting::Method;
use crate::error::{Error, IoContext, Result};
use crate::torus::{check_dyadic, TorusSpec};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "WICKTORUS_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CountVerify,
    Converge,
    Evolve,
    Picard,
    ProbVerify,
    StrichartzScan,
    TlocScan,
    CsCheck,
    DivisorScan,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::CountVerify,
        Experiment::Converge,
        Experiment::Evolve,
        Experiment::Picard,
        Experiment::ProbVerify,
        Experiment::StrichartzScan,
        Experiment::TlocScan,
        Experiment::CsCheck,
        Experiment::DivisorScan,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::CountVerify => "count-verify",
            Experiment::Converge => "converge",
            Experiment::Evolve => "evolve",
            Experiment::Picard => "picard",
            Experiment::ProbVerify => "prob-verify",
            Experiment::StrichartzScan => "strichartz-scan",
            Experiment::TlocScan => "tloc-scan",
            Experiment::CsCheck => "cs-check",
            Experiment::DivisorScan => "divisor-scan",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Every knob of every suite. Keys a suite does not read are ignored by it
/// but still hashed, so two configs hash equal only if they are equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Preset name (`sqrt2`, `golden`, `one`, `three_halves`) or a literal.
    pub gamma: String,
    pub scales: Vec<u64>,
    /// Seeds `seed_start..seed_end`.
    pub seed_start: u64,
    pub seed_end: u64,

    // counting
    /// Window half-width of the counting studies.
    pub width: f64,
    /// Window half-widths swept by the cross-method check.
    pub widths: Vec<f64>,
    /// Levels swept by the cross-method check, as multiples of `N1`.
    pub mus: Vec<f64>,
    pub cells: usize,
    pub annulus_scales: Vec<u64>,
    pub annulus_cells: usize,
    pub pair_max_scale: u64,
    pub pair_cells: usize,
    pub cross_max_scale: u64,
    /// `fast` or `oracle`.
    pub method: String,
    pub slope_max: f64,
    pub constant_spread_max: f64,

    // probability
    pub trials: usize,
    /// Thresholds for the first-order chaos.
    pub lambdas: Vec<f64>,
    /// Thresholds for the second-order chaos, as multiples of its norm.
    pub lambda_factors: Vec<f64>,
    pub chaos_radius: u64,
    pub bound_constant: f64,
    pub oversample: usize,
    pub linf_slope_max: f64,
    pub sigma_max: f64,

    // flow
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub mass_tol: f64,
    pub energy_tol: f64,
    pub checkpoints: bool,

    // Picard and convergence
    pub delta: f64,
    pub s0: f64,
    pub b0: f64,
    pub s_prime: f64,
    pub samples: usize,
    pub max_iter: usize,
    pub picard_tol: f64,
    pub residual_tol: f64,
    pub contraction_within: usize,
    /// Fraction of seeds that must satisfy a per-seed check.
    pub seed_fraction: f64,
    pub xsb_differences: bool,
    pub dt_check: bool,
    pub dt_change_max: f64,

    // scans
    pub deltas: Vec<f64>,
    /// `xsb` or `l4`.
    pub norm: String,
    pub s: f64,
    pub b: f64,
    /// `random`, `flat` or `constant`.
    pub family: String,

    // matrix inequality
    pub instances: usize,
    pub max_dim: usize,

    // divisor scan
    pub decade_lo: u32,
    pub decade_hi: u32,
    pub spot_checks: usize,
    pub spot_max: i64,
    pub exponent_max: f64,

    pub workers: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::CountVerify,
            gamma: "sqrt2".into(),
            scales: vec![8, 16, 32, 64],
            seed_start: 0,
            seed_end: 5,
            width: 1.0,
            widths: vec![0.5, 1.0, 2.0],
            mus: vec![0.0, 0.5, -0.5, 1.0, -1.0],
            cells: 64,
            annulus_scales: vec![16, 32, 64, 128, 256],
            annulus_cells: 64,
            pair_max_scale: 128,
            pair_cells: 4,
            cross_max_scale: 32,
            method: "fast".into(),
            slope_max: 1.15,
            constant_spread_max: 2.0,
            trials: 100_000,
            lambdas: vec![0.5, 1.0, 1.5, 2.0],
            lambda_factors: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            chaos_radius: 8,
            bound_constant: 4.0,
            oversample: 4,
            linf_slope_max: 0.45,
            sigma_max: 3.0,
            dt: 1e-4,
            t_end: 1.0,
            save_every: 1000,
            mass_tol: 1e-9,
            energy_tol: 1e-6,
            checkpoints: true,
            delta: 0.01,
            s0: 0.1,
            b0: 0.51,
            s_prime: 0.05,
            samples: 1024,
            max_iter: 40,
            picard_tol: 1e-10,
            residual_tol: 1e-8,
            contraction_within: 3,
            seed_fraction: 0.8,
            xsb_differences: true,
            dt_check: true,
            dt_change_max: 0.05,
            deltas: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            norm: "xsb".into(),
            s: 0.0,
            b: 0.51,
            family: "random".into(),
            instances: 10_000,
            max_dim: 32,
            decade_lo: 2,
            decade_hi: 6,
            spot_checks: 100,
            spot_max: 10_000,
            exponent_max: 0.6,
            workers: 0,
            out: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    /// Full-size configuration of each suite.
    pub fn reference(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            out: PathBuf::from("runs").join(experiment.id()),
            ..Self::default()
        };
        match experiment {
            Experiment::CountVerify => base,
            Experiment::Converge => Self {
                scales: vec![8, 16, 32, 64],
                seed_end: 5,
                dt: 1e-4,
                t_end: 0.01,
                ..base
            },
            Experiment::Evolve => Self {
                scales: vec![32],
                seed_end: 5,
                ..base
            },
            Experiment::Picard => Self {
                scales: vec![8, 16, 32],
                seed_end: 5,
                ..base
            },
            Experiment::ProbVerify => Self {
                scales: vec![16, 32, 64, 128, 256],
                seed_end: 200,
                ..base
            },
            Experiment::StrichartzScan => Self {
                scales: vec![8, 16, 32, 64, 128],
                seed_end: 20,
                slope_max: 0.10,
                ..base
            },
            Experiment::TlocScan => Self {
                scales: vec![16],
                seed_end: 1,
                samples: 512,
                ..base
            },
            Experiment::CsCheck | Experiment::DivisorScan => Self { seed_end: 1, ..base },
        }
    }

    /// Small configuration of each suite for quick checks.
    pub fn smoke(experiment: Experiment) -> Self {
        let base = Self::reference(experiment);
        match experiment {
            Experiment::CountVerify => Self {
                scales: vec![4, 8, 16],
                cells: 64,
                annulus_scales: vec![8, 16],
                annulus_cells: 8,
                pair_max_scale: 16,
                pair_cells: 2,
                cross_max_scale: 16,
                mus: vec![0.0, 0.5, -1.0],
                widths: vec![1.0],
                ..base
            },
            Experiment::Converge => Self {
                scales: vec![8, 16, 32],
                seed_end: 2,
                dt: 1e-3,
                samples: 256,
                xsb_differences: false,
                ..base
            },
            Experiment::Evolve => Self {
                scales: vec![8],
                seed_end: 2,
                t_end: 0.05,
                save_every: 100,
                ..base
            },
            Experiment::Picard => Self {
                scales: vec![4, 8],
                seed_end: 2,
                samples: 256,
                ..base
            },
            Experiment::ProbVerify => Self {
                scales: vec![8, 16, 32],
                seed_end: 20,
                trials: 10_000,
                chaos_radius: 3,
                oversample: 2,
                ..base
            },
            Experiment::StrichartzScan => Self {
                scales: vec![4, 8, 16],
                seed_end: 3,
                ..base
            },
            Experiment::TlocScan => Self {
                scales: vec![4],
                deltas: vec![0.5, 0.25, 0.125],
                samples: 256,
                ..base
            },
            Experiment::CsCheck => Self {
                instances: 500,
                max_dim: 8,
                ..base
            },
            Experiment::DivisorScan => Self {
                decade_hi: 4,
                spot_checks: 20,
                spot_max: 1000,
                ..base
            },
        }
    }

    /// Parse a TOML table; keys absent from it take their reference values.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse()?;
        let experiment: Experiment = match table.get("experiment") {
            Some(toml::Value::String(s)) => s.parse()?,
            Some(_) => return Err(Error::Config("`experiment` must be a string".into())),
            None => return Err(Error::Config("missing key `experiment`".into())),
        };
        let mut merged =
            toml::Table::try_from(Self::reference(experiment)).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in table {
            if !merged.contains_key(&k) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            merged.insert(k, v);
        }
        let cfg: Self = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn torus(&self) -> Result<TorusSpec> {
        self.gamma.parse()
    }

    pub fn seeds(&self) -> Vec<u64> {
        (self.seed_start..self.seed_end).collect()
    }

    pub fn method(&self) -> Result<FastOrOracle> {
        match self.method.as_str() {
            "fast" => Ok(FastOrOracle::Fast),
            "oracle" => Ok(FastOrOracle::Oracle),
            other => Err(Error::Config(format!(
                "method must be `fast` or `oracle`, got `{other}`"
            ))),
        }
    }

    /// Output directory, honouring [`OUT_ENV`].
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => self.out.clone(),
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring `workers` and `out`,
    /// which cannot change any record.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("workers");
            obj.remove("out");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    /// Checks shared by every suite plus the ones specific to `experiment`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.torus()?;
        let needs_scales = !matches!(self.experiment, Experiment::CsCheck | Experiment::DivisorScan);
        if needs_scales && self.scales.is_empty() {
            return bad("scale list is empty".into());
        }
        for &s in &self.scales {
            check_dyadic(s)?;
        }
        let needs_seeds = matches!(
            self.experiment,
            Experiment::Converge
                | Experiment::Evolve
                | Experiment::Picard
                | Experiment::ProbVerify
                | Experiment::StrichartzScan
        );
        if needs_seeds && self.seed_end <= self.seed_start {
            return bad(format!("empty seed range {}..{}", self.seed_start, self.seed_end));
        }
        if !(0.0..=1.0).contains(&self.seed_fraction) {
            return bad(format!("seed_fraction must lie in [0, 1], got {}", self.seed_fraction));
        }
        match self.experiment {
            Experiment::CountVerify => {
                self.method()?;
                for &s in self
                    .annulus_scales
                    .iter()
                    .chain([&self.pair_max_scale, &self.cross_max_scale])
                {
                    check_dyadic(s)?;
                }
                if self.annulus_scales.iter().any(|&s| s < 8) {
                    return bad("annulus scales must be at least 8".into());
                }
                if !(self.width >= 0.0) || self.widths.iter().any(|w| !(*w >= 0.0)) {
                    return bad("window widths must be nonnegative".into());
                }
                if self.cells == 0 || self.annulus_cells == 0 {
                    return bad("cell counts must be positive".into());
                }
                if self.mus.is_empty() || self.widths.is_empty() {
                    return bad("cross-check sweeps must be nonempty".into());
                }
            }
            Experiment::Converge => {
                for w in self.scales.windows(2) {
                    if w[1] != 2 * w[0] {
                        return bad(format!("scales must form a doubling chain, got {:?}", self.scales));
                    }
                }
                self.check_flow()?;
                self.check_picard()?;
            }
            Experiment::Evolve => self.check_flow()?,
            Experiment::Picard => self.check_picard()?,
            Experiment::ProbVerify => {
                if self.trials == 0 {
                    return bad("trials must be positive".into());
                }
                if self.oversample < 2 {
                    return bad("oversample must be at least 2".into());
                }
                if self.scales.len() < 2 {
                    return bad("sup-norm scan needs at least two scales".into());
                }
                if !(self.bound_constant > 0.0) {
                    return bad("bound_constant must be positive".into());
                }
            }
            Experiment::StrichartzScan => {
                if self.scales.len() < 2 {
                    return bad("strichartz scan needs at least two scales".into());
                }
            }
            Experiment::TlocScan => {
                if self.deltas.len() < 2 {
                    return bad("time-localization scan needs at least two deltas".into());
                }
                if !matches!(self.norm.as_str(), "xsb" | "l4") {
                    return bad(format!("norm must be `xsb` or `l4`, got `{}`", self.norm));
                }
                if !matches!(self.family.as_str(), "random" | "flat" | "constant") {
                    return bad(format!("unknown family `{}`", self.family));
                }
            }
            Experiment::CsCheck => {
                if self.instances == 0 || self.max_dim == 0 {
                    return bad("instances and max_dim must be positive".into());
                }
            }
            Experiment::DivisorScan => {
                if self.decade_lo < 1 || self.decade_hi < self.decade_lo || self.decade_hi > 8 {
                    return bad(format!(
                        "decades must satisfy 1 <= lo <= hi <= 8, got {}..{}",
                        self.decade_lo, self.decade_hi
                    ));
                }
                if self.spot_max < 1 {
                    return bad("spot_max must be positive".into());
                }
            }
        }
        Ok(())
    }

    fn check_flow(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) {
            return Err(Error::Config(format!(
                "need dt > 0 and t_end >= dt, got {} and {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    fn check_picard(&self) -> Result<()> {
        if !(self.delta > 0.0) || self.samples < 16 || self.max_iter == 0 {
            return Err(Error::Config("need delta > 0, samples >= 16 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// Which enumerator family a counting run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastOrOracle {
    Fast,
    Oracle,
}

impl FastOrOracle {
    pub fn line(self) -> Method {
        match self {
            FastOrOracle::Fast => Method::Strip,
            FastOrOracle::Oracle => Method::Oracle,
        }
    }

    pub fn annulus(self) -> Method {
        match self {
            FastOrOracle::Fast => Method::Annulus,
            FastOrOracle::Oracle => Method::Oracle,
        }
    }
}
