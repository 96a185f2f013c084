//! Problem instances and batched arm elimination designs.
//!
//! Batch weights are always stored in descending candidate-count order,
//! `(β_K, β_{K-1}, …, β_2)`: entry `j` is the fraction of the sample spent
//! while `K - j` arms are still candidates. Use [`BatchWeights::beta`] to look
//! a weight up by candidate count rather than by position.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for simplex membership of user supplied weights.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("arm count must be at least {min}, got {k}")]
    ArmCount { k: usize, min: usize },
    #[error("expected {expected} batch weights, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("batch weight at position {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("batch weight at position {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("batch weights sum to zero")]
    ZeroSum,
    #[error("batch weights sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },
    #[error("number of arms dropped after the first batch must lie in 1..={max}, got {s}")]
    DropCount { s: usize, max: usize },
    #[error("first batch weight must lie strictly between 0 and 1, got {0}")]
    FirstBatchWeight(f64),
    #[error("sigma must be positive and finite, got {0}")]
    Sigma(f64),
    #[error("arm mean at position {0} is not finite")]
    NonFiniteMean(usize),
    #[error("best arm is not unique (arms {0} and {1} tie for the maximum)")]
    TiedBest(usize, usize),
}

/// A Gaussian bandit instance with a common noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    means: Vec<f64>,
    sigma: f64,
    #[serde(skip)]
    best: usize,
}

impl Instance {
    pub fn new(means: Vec<f64>, sigma: f64) -> Result<Self, DesignError> {
        if means.len() < 2 {
            return Err(DesignError::ArmCount {
                k: means.len(),
                min: 2,
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(DesignError::Sigma(sigma));
        }
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(DesignError::NonFiniteMean(i));
        }
        let best = unique_argmax(&means)?;
        Ok(Self { means, sigma, best })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    /// Index of the best arm (0-based).
    pub fn best_arm(&self) -> usize {
        self.best
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best]
    }

    /// Gap between the best arm and the runner-up.
    pub fn delta_min(&self) -> f64 {
        let runner_up = self
            .suboptimal()
            .map(|(_, m)| m)
            .fold(f64::NEG_INFINITY, f64::max);
        self.best_mean() - runner_up
    }

    /// Gap between the best arm and the worst arm.
    pub fn delta_max(&self) -> f64 {
        let worst = self
            .suboptimal()
            .map(|(_, m)| m)
            .fold(f64::INFINITY, f64::min);
        self.best_mean() - worst
    }

    /// Iterator over `(index, mean)` of every arm except the best one.
    pub fn suboptimal(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let best = self.best;
        self.means
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(i, _)| i != best)
    }
}

/// Index of the unique maximum of `values`; errors if the maximum is shared.
pub(crate) fn unique_argmax(values: &[f64]) -> Result<usize, DesignError> {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    if let Some(j) = values
        .iter()
        .enumerate()
        .position(|(i, &v)| i != best && v == values[best])
    {
        return Err(DesignError::TiedBest(best.min(j), best.max(j)));
    }
    Ok(best)
}

/// A point of the simplex `Σ_{K-1}` describing how the sample is split into
/// elimination batches.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchWeights {
    k: usize,
    weights: Vec<f64>,
}

impl BatchWeights {
    /// Validates `raw` and rescales it to sum to one.
    pub fn new(k: usize, raw: &[f64]) -> Result<Self, DesignError> {
        let sum = validate_raw(k, raw)?;
        if sum == 0.0 {
            return Err(DesignError::ZeroSum);
        }
        let mut weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        // Rescaling can leave the total one ulp away from 1; fold the residue
        // into the largest entry.
        let total: f64 = weights.iter().sum();
        let (imax, _) = weights
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
        weights[imax] += 1.0 - total;
        Ok(Self { k, weights })
    }

    /// Accepts weights that already lie on the simplex (sum within
    /// [`SIMPLEX_TOL`] of 1) and rejects anything else.
    pub fn from_simplex(k: usize, weights: &[f64]) -> Result<Self, DesignError> {
        let sum = validate_raw(k, weights)?;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(DesignError::NotOnSimplex { sum });
        }
        Self::new(k, weights)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Weights in `(β_K, …, β_2)` order.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// `β_n`, the weight of the batch run with `n` candidates.
    ///
    /// Panics if `n` is outside `2..=K`.
    pub fn beta(&self, n: usize) -> f64 {
        assert!((2..=self.k).contains(&n), "candidate count {n} out of range");
        self.weights[self.k - n]
    }

    /// `(n, β_n)` pairs for `n = K, …, 2`.
    pub fn stages(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(j, &b)| (self.k - j, b))
    }
}

fn validate_raw(k: usize, raw: &[f64]) -> Result<f64, DesignError> {
    if k < 2 {
        return Err(DesignError::ArmCount { k, min: 2 });
    }
    if raw.len() != k - 1 {
        return Err(DesignError::LengthMismatch {
            expected: k - 1,
            found: raw.len(),
        });
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(DesignError::NonFiniteWeight { index });
        }
        if value < 0.0 {
            return Err(DesignError::NegativeWeight { index, value });
        }
    }
    Ok(raw.iter().sum())
}

pub fn make_batch_weights(k: usize, raw: &[f64]) -> Result<BatchWeights, DesignError> {
    BatchWeights::new(k, raw)
}

/// The completely randomized trial: one batch holding the whole sample.
pub fn crt_weights(k: usize) -> Result<BatchWeights, DesignError> {
    if k < 2 {
        return Err(DesignError::ArmCount { k, min: 2 });
    }
    let mut weights = vec![0.0; k - 1];
    weights[0] = 1.0;
    Ok(BatchWeights { k, weights })
}

/// Successive rejects expressed as batch weights.
///
/// `β_K = 1/L`, `β_n = (1/(n+1))/L` for `3 ≤ n < K`, and `β_2` takes the rest,
/// where `L = 1/2 + Σ_{i=2}^K 1/i`. With two arms there is a single batch.
pub fn successive_rejects_weights(k: usize) -> Result<BatchWeights, DesignError> {
    if k < 2 {
        return Err(DesignError::ArmCount { k, min: 2 });
    }
    if k == 2 {
        return crt_weights(2);
    }
    let log_bar = 0.5 + (2..=k).map(|i| 1.0 / i as f64).sum::<f64>();
    let mut weights = Vec::with_capacity(k - 1);
    weights.push(1.0 / log_bar);
    // (β_{K-1}, …, β_3) = (1/K, …, 1/4) / L
    for n in (3..k).rev() {
        weights.push(1.0 / ((n + 1) as f64 * log_bar));
    }
    let used: f64 = weights.iter().sum();
    weights.push(1.0 - used);
    Ok(BatchWeights { k, weights })
}

/// A two-batch design together with whether it clears the closed-form
/// dominance threshold `β_K > 1/2 + 1/(2(K-s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBatchDesign {
    pub weights: BatchWeights,
    pub threshold: f64,
    pub meets_threshold: bool,
}

/// Runs `beta_first` of the sample on all `k` arms, drops `s` arms, and spends
/// the remainder on the surviving `k - s` arms before the final eliminations.
pub fn two_batch_weights(k: usize, s: usize, beta_first: f64) -> Result<TwoBatchDesign, DesignError> {
    if k < 3 {
        return Err(DesignError::ArmCount { k, min: 3 });
    }
    if s < 1 || s > k - 2 {
        return Err(DesignError::DropCount { s, max: k - 2 });
    }
    if !(beta_first > 0.0 && beta_first < 1.0) {
        return Err(DesignError::FirstBatchWeight(beta_first));
    }
    let mut weights = vec![0.0; k - 1];
    weights[0] = beta_first;
    // position of β_{K-s}
    weights[s] = 1.0 - beta_first;
    let threshold = 0.5 + 1.0 / (2.0 * (k - s) as f64);
    Ok(TwoBatchDesign {
        weights: BatchWeights { k, weights },
        threshold,
        meets_threshold: beta_first > threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    Bae(BatchWeights),
    Crt(usize),
}

/// A named design from the BAE family.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub kind: DesignKind,
    pub name: String,
}

impl DesignSpec {
    pub fn bae(weights: BatchWeights, name: impl Into<String>) -> Self {
        Self {
            kind: DesignKind::Bae(weights),
            name: name.into(),
        }
    }

    pub fn crt(k: usize) -> Result<Self, DesignError> {
        crt_weights(k)?;
        Ok(Self {
            kind: DesignKind::Crt(k),
            name: "crt".to_string(),
        })
    }

    pub fn k(&self) -> usize {
        match &self.kind {
            DesignKind::Bae(w) => w.k(),
            DesignKind::Crt(k) => *k,
        }
    }

    /// The batch weights the engine runs. A CRT resolves to `(1, 0, …, 0)`.
    pub fn weights(&self) -> BatchWeights {
        match &self.kind {
            DesignKind::Bae(w) => w.clone(),
            DesignKind::Crt(k) => crt_weights(*k).expect("validated at construction"),
        }
    }

    pub fn to_json(&self) -> DesignJson {
        DesignJson {
            k: self.k(),
            weights: self.weights().as_slice().to_vec(),
            name: self.name.clone(),
        }
    }

    pub fn from_json(json: &DesignJson) -> Result<Self, DesignError> {
        Ok(Self::bae(BatchWeights::from_simplex(json.k, &json.weights)?, json.name.clone()))
    }
}

/// Wire form of a design: `{"k": 4, "weights": [β_K, …, β_2], "name": "…"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignJson {
    pub k: usize,
    pub weights: Vec<f64>,
    pub name: String,
}
