use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::design::unique_argmax;

/// Zero-inflated lognormal law of one arm: `0` with probability `p_zero`,
/// otherwise `exp(meanlog + sdlog·Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZiLogNormal {
    pub p_zero: f64,
    pub meanlog: f64,
    pub sdlog: f64,
}

impl ZiLogNormal {
    pub fn mean(&self) -> f64 {
        (1.0 - self.p_zero) * (self.meanlog + self.sdlog * self.sdlog / 2.0).exp()
    }

    fn validate(&self, arm: usize) -> Result<(), SimError> {
        let ok = (0.0..1.0).contains(&self.p_zero)
            && self.meanlog.is_finite()
            && self.sdlog.is_finite()
            && self.sdlog > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidModel(format!(
                "arm {arm}: need 0 <= p_zero < 1, finite meanlog and sdlog > 0, got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Gaussian { means: Vec<f64>, sigma: f64 },
    ZeroInflatedLogNormal(Vec<ZiLogNormal>),
    Empirical(Vec<Vec<f64>>),
}

/// Per-arm outcome distribution together with the arm means used for
/// error and regret accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeModel {
    kind: ModelKind,
    true_means: Vec<f64>,
    best: usize,
}

impl OutcomeModel {
    pub fn gaussian(means: Vec<f64>, sigma: f64) -> Result<Self, SimError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(SimError::InvalidModel(format!("sigma must be positive, got {sigma}")));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(SimError::InvalidModel("gaussian means must be finite".into()));
        }
        let true_means = means.clone();
        Self::finish(ModelKind::Gaussian { means, sigma }, true_means)
    }

    pub fn from_instance(instance: &crate::design::Instance) -> Self {
        Self::gaussian(instance.means().to_vec(), instance.sigma()).expect("instance already validated")
    }

    pub fn zero_inflated_lognormal(arms: Vec<ZiLogNormal>) -> Result<Self, SimError> {
        for (i, a) in arms.iter().enumerate() {
            a.validate(i)?;
        }
        let true_means = arms.iter().map(ZiLogNormal::mean).collect();
        Self::finish(ModelKind::ZeroInflatedLogNormal(arms), true_means)
    }

    /// Like [`Self::zero_inflated_lognormal`] but with caller-supplied arm
    /// means, for parameterizations where the mean is known exactly.
    pub(crate) fn zero_inflated_with_means(
        arms: Vec<ZiLogNormal>,
        true_means: Vec<f64>,
    ) -> Result<Self, SimError> {
        for (i, a) in arms.iter().enumerate() {
            a.validate(i)?;
        }
        Self::finish(ModelKind::ZeroInflatedLogNormal(arms), true_means)
    }

    pub fn empirical(samples: Vec<Vec<f64>>) -> Result<Self, SimError> {
        if let Some(i) = samples.iter().position(Vec::is_empty) {
            return Err(SimError::InvalidModel(format!("arm {i} has no samples")));
        }
        if samples.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SimError::InvalidModel("empirical samples must be finite".into()));
        }
        let true_means = samples
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect();
        Self::finish(ModelKind::Empirical(samples), true_means)
    }

    fn finish(kind: ModelKind, true_means: Vec<f64>) -> Result<Self, SimError> {
        if true_means.len() < 2 {
            return Err(SimError::InvalidModel(format!(
                "need at least two arms, got {}",
                true_means.len()
            )));
        }
        let best = unique_argmax(&true_means).map_err(|e| SimError::InvalidModel(e.to_string()))?;
        Ok(Self {
            kind,
            true_means,
            best,
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn k(&self) -> usize {
        self.true_means.len()
    }

    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    pub fn best_arm(&self) -> usize {
        self.best
    }

    /// Short label used in report rows.
    pub fn descriptor(&self) -> &'static str {
        match self.kind {
            ModelKind::Gaussian { .. } => "gaussian",
            ModelKind::ZeroInflatedLogNormal(_) => "zero_inflated_lognormal",
            ModelKind::Empirical(_) => "empirical",
        }
    }

    /// Draws one outcome for `arm`. Panics if `arm` is out of range.
    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        match &self.kind {
            ModelKind::Gaussian { means, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                means[arm] + sigma * z
            }
            ModelKind::ZeroInflatedLogNormal(arms) => {
                let law = &arms[arm];
                if rng.random::<f64>() < law.p_zero {
                    0.0
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    (law.meanlog + law.sdlog * z).exp()
                }
            }
            ModelKind::Empirical(samples) => {
                let s = &samples[arm];
                s[rng.random_range(0..s.len())]
            }
        }
    }
}

pub fn sample_outcome<R: Rng + ?Sized>(model: &OutcomeModel, arm: usize, rng: &mut R) -> f64 {
    model.sample(arm, rng)
}
