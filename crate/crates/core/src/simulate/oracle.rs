//! Closed-form checks for the simulation engine.

use serde::Serialize;
use libm::erfc;

use super::SimError;

/// Standard normal CDF, accurate in the far lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Misidentification probability of a two-arm CRT with `t/2` Gaussian pulls
/// per arm: `Φ(-Δ√t / (2σ))`.
pub fn exact_crt_error_two_arms(delta: f64, sigma: f64, t: u64) -> Result<f64, SimError> {
    if t < 2 || !t.is_multiple_of(2) {
        return Err(SimError::OddSampleSize(t));
    }
    if !(delta > 0.0) || !(sigma > 0.0) {
        return Err(SimError::InvalidModel(format!(
            "delta and sigma must be positive, got {delta} and {sigma}"
        )));
    }
    Ok(normal_cdf(-delta * (t as f64).sqrt() / (2.0 * sigma)))
}

/// Least-squares fit of `-ln(error)` against `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Finite-sample proxy for the efficiency exponent: the OLS slope of
/// `-ln(error_rate)` on `T`.
pub fn empirical_exponent(points: &[(f64, f64)]) -> Result<ExponentFit, SimError> {
    if points.len() < 3 {
        return Err(SimError::TooFewPoints(points.len()));
    }
    if let Some(&(t, e)) = points.iter().find(|&&(_, e)| !(e > 0.0 && e < 1.0)) {
        return Err(SimError::DegenerateErrorRate { t, rate: e });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::TooFewPoints(1));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = (rss / (n - 2.0) / sxx).sqrt();
    Ok(ExponentFit {
        slope,
        slope_se,
        intercept,
    })
}
