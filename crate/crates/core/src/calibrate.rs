//! Semi-synthetic outcome models calibrated from per-arm outcome records.
//!
//! Outcomes are modelled as a point mass at zero mixed with a lognormal
//! positive part. Zeros are detected by exact equality.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulate::{OutcomeModel, SimError, ZiLogNormal};

/// Lower bound applied to fitted log-scale standard deviations.
pub const SDLOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: negative outcome {value}")]
    NegativeOutcome { line: u64, value: f64 },
    #[error("no data rows")]
    NoData,
    #[error("arm {arm}: need at least 2 positive outcomes to fit, got {found}")]
    TooFewPositive { arm: String, found: usize },
    #[error("arm {arm}: {message}")]
    InvalidSummary { arm: usize, message: String },
    #[error(transparent)]
    Model(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSamples {
    pub arm_label: String,
    pub outcomes: Vec<f64>,
}

/// Reads a CSV with header `arm,outcome`, grouping outcomes by arm label.
pub fn load_arm_samples(path: impl AsRef<Path>) -> Result<BTreeMap<String, ArmSamples>, CalibrateError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CalibrateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_arm_samples(file)
}

pub fn parse_arm_samples(reader: impl std::io::Read) -> Result<BTreeMap<String, ArmSamples>, CalibrateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CalibrateError::Malformed {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() {
        return Err(CalibrateError::NoData);
    }
    let expected = ["arm", "outcome"];
    if headers.len() != 2 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(CalibrateError::Malformed {
            line: 1,
            message: format!("expected header \"arm,outcome\", got {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }

    let mut arms: BTreeMap<String, ArmSamples> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CalibrateError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record[0].trim();
        if label.is_empty() {
            return Err(CalibrateError::Malformed {
                line,
                message: "empty arm label".into(),
            });
        }
        let value: f64 = record[1].trim().parse().map_err(|_| CalibrateError::Malformed {
            line,
            message: format!("cannot parse outcome {:?}", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(CalibrateError::Malformed {
                line,
                message: format!("outcome {value} is not finite"),
            });
        }
        if value < 0.0 {
            return Err(CalibrateError::NegativeOutcome { line, value });
        }
        arms.entry(label.to_string())
            .or_insert_with(|| ArmSamples {
                arm_label: label.to_string(),
                outcomes: Vec::new(),
            })
            .outcomes
            .push(value);
    }
    if arms.is_empty() {
        return Err(CalibrateError::NoData);
    }
    Ok(arms)
}

/// Zero fraction plus log-scale mean and sample standard deviation of the
/// positive outcomes.
pub fn fit_zero_inflated_lognormal(samples: &ArmSamples) -> Result<ZiLogNormal, CalibrateError> {
    let logs: Vec<f64> = samples
        .outcomes
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x.ln())
        .collect();
    if logs.len() < 2 {
        return Err(CalibrateError::TooFewPositive {
            arm: samples.arm_label.clone(),
            found: logs.len(),
        });
    }
    let zeros = samples.outcomes.iter().filter(|&&x| x == 0.0).count();
    let n = logs.len() as f64;
    let meanlog = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - meanlog).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ZiLogNormal {
        p_zero: zeros as f64 / samples.outcomes.len() as f64,
        meanlog,
        sdlog: var.sqrt().max(SDLOG_FLOOR),
    })
}

/// Fitted parameters keyed by arm label; the wire form is
/// `{"<arm>": {"p_zero": …, "meanlog": …, "sdlog": …}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FittedModel {
    pub arms: BTreeMap<String, ZiLogNormal>,
}

impl FittedModel {
    pub fn fit(samples: &BTreeMap<String, ArmSamples>) -> Result<Self, CalibrateError> {
        let arms = samples
            .iter()
            .map(|(label, s)| Ok((label.clone(), fit_zero_inflated_lognormal(s)?)))
            .collect::<Result<_, CalibrateError>>()?;
        Ok(Self { arms })
    }

    /// Outcome model with arms in label order.
    pub fn to_model(&self) -> Result<OutcomeModel, CalibrateError> {
        Ok(OutcomeModel::zero_inflated_lognormal(self.arms.values().copied().collect())?)
    }
}

/// Summary of one arm: probability of a zero, and mean and standard deviation
/// of the outcome conditional on it being positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub p_zero: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Lognormal parameters matching a positive part with the given mean and sd.
pub fn lognormal_from_moments(mean: f64, sd: f64) -> (f64, f64) {
    let var_log = (sd / mean).powi(2).ln_1p();
    (mean.ln() - var_log / 2.0, var_log.sqrt())
}

/// Builds a zero-inflated lognormal model by moment-matching each arm's
/// positive part. Arm means are `(1 - p_zero)·mean`.
pub fn model_from_summary(arms: &[ArmSummary]) -> Result<OutcomeModel, CalibrateError> {
    let mut laws = Vec::with_capacity(arms.len());
    let mut means = Vec::with_capacity(arms.len());
    for (i, a) in arms.iter().enumerate() {
        if !(0.0..1.0).contains(&a.p_zero) {
            return Err(CalibrateError::InvalidSummary {
                arm: i,
                message: format!("p_zero must lie in [0, 1), got {}", a.p_zero),
            });
        }
        if !(a.mean > 0.0 && a.mean.is_finite()) || !(a.sd > 0.0 && a.sd.is_finite()) {
            return Err(CalibrateError::InvalidSummary {
                arm: i,
                message: format!("mean and sd must be positive, got {} and {}", a.mean, a.sd),
            });
        }
        let (meanlog, sdlog) = lognormal_from_moments(a.mean, a.sd);
        laws.push(ZiLogNormal {
            p_zero: a.p_zero,
            meanlog,
            sdlog,
        });
        means.push((1.0 - a.p_zero) * a.mean);
    }
    Ok(OutcomeModel::zero_inflated_with_means(laws, means)?)
}
