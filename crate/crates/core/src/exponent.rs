//! Large-deviation analytics for batched arm elimination under Gaussian noise.
//!
//! The central quantity is `Ψ(μ_1, …, μ_n)`, the squared Euclidean distance
//! from a sorted mean vector to the closest vector in which the leader
//! `μ_1` is (weakly) the smallest coordinate. Its optimizer pools the leader
//! with the lowest few coordinates at their common average, which gives the
//! closed form in [`psi_closed_form`]. [`psi_brute_force`] enumerates every
//! pooling set and serves as an independent check.
//!
//! All rates are in nats per sample.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{BatchWeights, Instance};

/// Largest `n` accepted by [`psi_brute_force`].
pub const BRUTE_FORCE_MAX_N: usize = 12;
/// Largest arm count accepted by [`gamma`].
pub const GAMMA_MAX_K: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("need at least two means, got {0}")]
    TooFewMeans(usize),
    #[error("means must be sorted in descending order (violated at position {0})")]
    Unsorted(usize),
    #[error("the leading mean must be strictly larger than the second")]
    LeaderNotStrict,
    #[error("mean at position {0} is not finite")]
    NonFinite(usize),
    #[error("brute-force enumeration supports at most {BRUTE_FORCE_MAX_N} means, got {0}")]
    BruteForceTooLarge(usize),
    #[error("candidate count {n} outside 2..={k}")]
    CandidateCount { n: usize, k: usize },
    #[error("subset enumeration supports at most {GAMMA_MAX_K} arms, got {0}")]
    TooManyArms(usize),
    #[error("instance has {instance} arms but weights are for {weights}")]
    ArmMismatch { instance: usize, weights: usize },
}

/// Gaps `Δ_i = μ_1 - μ_i` of a sorted mean vector, `Δ_1 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector {
    deltas: Vec<f64>,
}

impl GapVector {
    /// Builds the gaps of `mu`, which must be sorted descending with a strict leader.
    pub fn from_sorted_means(mu: &[f64]) -> Result<Self, ExponentError> {
        check_sorted(mu)?;
        Ok(Self {
            deltas: mu.iter().map(|m| mu[0] - m).collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

fn check_sorted(mu: &[f64]) -> Result<(), ExponentError> {
    if mu.len() < 2 {
        return Err(ExponentError::TooFewMeans(mu.len()));
    }
    if let Some(i) = mu.iter().position(|m| !m.is_finite()) {
        return Err(ExponentError::NonFinite(i));
    }
    if let Some(i) = mu.windows(2).position(|w| w[0] < w[1]) {
        return Err(ExponentError::Unsorted(i + 1));
    }
    if mu[0] <= mu[1] {
        return Err(ExponentError::LeaderNotStrict);
    }
    Ok(())
}

/// Closed-form `Ψ` for `μ_1 > μ_2 ≥ … ≥ μ_n`.
///
/// Case `m` (for `m = 1, …, n-1`) pools the leader with the `m` lowest means;
/// it applies when `Δ_{n-m} ≤ (Σ_{i>n-m} Δ_i)/(m+1)`. Cases are tried in
/// increasing `m` and the first match wins; `m = n-1` is the fallthrough.
pub fn psi_closed_form(mu: &[f64]) -> Result<f64, ExponentError> {
    let gaps = GapVector::from_sorted_means(mu)?;
    Ok(psi_from_gaps(&gaps))
}

pub fn psi_from_gaps(gaps: &GapVector) -> f64 {
    let d = gaps.as_slice();
    let n = d.len();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for m in 1..n {
        // pool now holds Δ_{n-m+1}, …, Δ_n (1-based), i.e. d[n-m..]
        let di = d[n - m];
        sum += di;
        sum_sq += di * di;
        if m == n - 1 || d[n - m - 1] <= sum / (m + 1) as f64 {
            return sum_sq - sum * sum / (m + 1) as f64;
        }
    }
    unreachable!("n >= 2 guarantees the fallthrough case")
}

/// Exact `Ψ` by enumerating every set of arms pooled with the leader.
///
/// For each subset `S ⊆ {2, …, n}` the candidate sets `λ_j` to the average of
/// `{μ_1} ∪ {μ_i : i ∈ S}` on the pool and `λ_j = μ_j` elsewhere. Candidates
/// where the leader is not the minimum are discarded.
pub fn psi_brute_force(mu: &[f64]) -> Result<f64, ExponentError> {
    check_sorted(mu)?;
    let n = mu.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(ExponentError::BruteForceTooLarge(n));
    }
    let scale = mu.iter().fold(1.0_f64, |a, m| a.max(m.abs()));
    let tol = 1e-12 * scale;
    let mut best = f64::INFINITY;
    let mut lambda = vec![0.0; n];
    for mask in 0u32..(1 << (n - 1)) {
        let in_pool = |j: usize| j == 0 || mask & (1 << (j - 1)) != 0;
        let (total, count) = (0..n)
            .filter(|&j| in_pool(j))
            .fold((0.0, 0usize), |(s, c), j| (s + mu[j], c + 1));
        let avg = total / count as f64;
        for j in 0..n {
            lambda[j] = if in_pool(j) { avg } else { mu[j] };
        }
        if lambda.iter().any(|&l| lambda[0] > l + tol) {
            continue;
        }
        let cost: f64 = lambda.iter().zip(mu).map(|(l, m)| (l - m).powi(2)).sum();
        best = best.min(cost);
    }
    Ok(best)
}

/// `Γ_{θ,n}`: the cheapest (in Gaussian KL) way to make the best arm the
/// worst among some `n`-subset that contains it.
pub fn gamma(instance: &Instance, n: usize) -> Result<f64, ExponentError> {
    let k = instance.k();
    if k > GAMMA_MAX_K {
        return Err(ExponentError::TooManyArms(k));
    }
    if n < 2 || n > k {
        return Err(ExponentError::CandidateCount { n, k });
    }
    let best = instance.best_mean();
    let others: Vec<f64> = instance.suboptimal().map(|(_, m)| m).collect();
    let mut mu = Vec::with_capacity(n);
    let mut min_psi = f64::INFINITY;
    for subset in others.iter().copied().combinations(n - 1) {
        mu.clear();
        mu.push(best);
        mu.extend(subset);
        mu[1..].sort_by(|a, b| b.total_cmp(a));
        let psi = psi_closed_form(&mu)?;
        min_psi = min_psi.min(psi);
    }
    Ok(min_psi / (2.0 * instance.sigma().powi(2)))
}

/// `w_n = β_K/K + β_{K-1}/(K-1) + … + β_n/n`: the fraction of the sample that
/// the arm eliminated with `n` candidates left has received.
pub fn allocation_proportion(weights: &BatchWeights, n: usize) -> Result<f64, ExponentError> {
    let k = weights.k();
    if n < 2 || n > k {
        return Err(ExponentError::CandidateCount { n, k });
    }
    Ok((n..=k).rev().map(|r| weights.beta(r) / r as f64).sum())
}

/// Efficiency exponent of the completely randomized trial,
/// `Δ_min² / (4Kσ²)`.
pub fn crt_exponent(instance: &Instance) -> f64 {
    instance.delta_min().powi(2) / (4.0 * instance.k() as f64 * instance.sigma().powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageExponent {
    pub n: usize,
    pub w: f64,
    pub gamma: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub stages: Vec<StageExponent>,
    pub bae_lower_bound: f64,
    /// Instance-free relaxation `Δ_min²/(2σ²) · min_n w_n(n-1)/n`.
    pub corollary_bound: f64,
    pub crt_exponent: f64,
    pub dominance_margin: f64,
    pub dominates: bool,
}

impl ExponentReport {
    /// One row per stage with header `n,w,gamma,product`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,w,gamma,product\n");
        for s in &self.stages {
            out.push_str(&format!("{},{},{},{}\n", s.n, s.w, s.gamma, s.product));
        }
        out
    }
}

/// Lower bound `min_n w_n Γ_{θ,n}` on the BAE efficiency exponent, along with
/// its per-stage terms, the CRT exponent and the dominance margin.
pub fn bae_exponent_lower_bound(
    instance: &Instance,
    weights: &BatchWeights,
) -> Result<ExponentReport, ExponentError> {
    let k = instance.k();
    if weights.k() != k {
        return Err(ExponentError::ArmMismatch {
            instance: k,
            weights: weights.k(),
        });
    }
    let mut stages = Vec::with_capacity(k - 1);
    for n in (2..=k).rev() {
        let w = allocation_proportion(weights, n)?;
        let g = gamma(instance, n)?;
        stages.push(StageExponent {
            n,
            w,
            gamma: g,
            product: w * g,
        });
    }
    let bae_lower_bound = stages.iter().map(|s| s.product).fold(f64::INFINITY, f64::min);
    let (dominates, dominance_margin) = dominance_condition(weights);
    let corollary_bound = instance.delta_min().powi(2) / (2.0 * instance.sigma().powi(2))
        * (dominance_margin + 1.0 / (2.0 * k as f64));
    Ok(ExponentReport {
        stages,
        bae_lower_bound,
        corollary_bound,
        crt_exponent: crt_exponent(instance),
        dominance_margin,
        dominates,
    })
}

/// Instance-free sufficient condition for beating the CRT:
/// `min_n w_n (n-1)/n > 1/(2K)`. Returns `(dominates, margin)`; a zero margin
/// does not dominate.
pub fn dominance_condition(weights: &BatchWeights) -> (bool, f64) {
    let k = weights.k();
    let mut w = 0.0;
    let mut min_term = f64::INFINITY;
    for (n, beta) in weights.stages() {
        w += beta / n as f64;
        min_term = min_term.min(w * (n - 1) as f64 / n as f64);
    }
    let margin = min_term - 1.0 / (2.0 * k as f64);
    (margin > 0.0, margin)
}
