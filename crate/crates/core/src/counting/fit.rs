use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(ln scale, ln value)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// The fitted `(ln scale, ln value)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl FitResult {
    pub fn predict(&self, scale: f64) -> f64 {
        (self.intercept + self.slope * scale.ln()).exp()
    }
}

pub fn fit_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for &(scale, value) in points {
        if !(scale > 0.0 && value > 0.0) || !scale.is_finite() || !value.is_finite() {
            return Err(Error::NonPositive { scale, value });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 {
        // all scales coincide; no slope is defined
        return Err(Error::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy <= 1e-300 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomfield::StreamRng;

    #[test]
    fn exact_square_law() {
        let fit = fit_exponent(&[(2.0, 4.0), (4.0, 16.0), (8.0, 64.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(16.0) - 256.0).abs() < 1e-9);
    }

    #[test]
    fn constant_data() {
        let fit = fit_exponent(&[(2.0, 3.5), (4.0, 3.5)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_exponent(&[(2.0, 1.0)]), Err(Error::TooFewPoints(1))));
        assert!(matches!(
            fit_exponent(&[(2.0, 1.0), (4.0, 0.0)]),
            Err(Error::NonPositive { .. })
        ));
        assert!(fit_exponent(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = StreamRng::new(12345, 0);
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|k| {
                let s = 2f64.powi(k + 1);
                let noise = 1.0 + 0.05 * rng.range(-1.0, 1.0);
                (s, 3.0 * s.powf(1.5) * noise)
            })
            .collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.1, "slope {}", fit.slope);
    }
}
