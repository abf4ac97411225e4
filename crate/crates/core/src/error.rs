use std::path::PathBuf;

/// Errors raised by the numerical kernels and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid torus: gamma must be finite and positive, got {0}")]
    InvalidGamma(f64),
    #[error("unknown gamma preset `{0}` (expected sqrt2, golden, one, three_halves or a decimal literal)")]
    UnknownGammaPreset(String),
    #[error("scale {0} is not a power of two")]
    NotDyadic(u64),
    #[error("degenerate line: fixed frequencies coincide at {0}")]
    DegenerateLine(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divisor count of zero is infinite")]
    ZeroArgument,
    #[error("exponent fit needs at least two points with distinct positive scales, got {0}")]
    TooFewPoints(usize),
    #[error("exponent fit needs positive scale and value, got ({scale}, {value})")]
    NonPositive { scale: f64, value: f64 },
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("non-finite state at t = {t_failed}; last finite time {last_finite_time}")]
    NonFinite { t_failed: f64, last_finite_time: f64 },
    #[error("time grid too coarse: {samples_per_delta:.1} samples per unit delta, need at least {required}")]
    GridTooCoarse { samples_per_delta: f64, required: usize },
    #[error("time grid does not cover [-2 delta, 2 delta] = [{lo}, {hi}]")]
    GridTooShort { lo: f64, hi: f64 },
    #[error("window not applied to the space-time field")]
    WindowNotApplied,
    #[error("unsupported Lebesgue exponent {0} (supported: 2, 3, 4, inf)")]
    UnsupportedExponent(f64),
    #[error("precondition violated: sum |b_j|^2 = {0} exceeds 1")]
    VectorNotInUnitBall(f64),
    #[error("Picard iteration diverged at iterate {iterate}: contraction ratio {ratio}")]
    Divergence { iterate: usize, ratio: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}
