//! One run of batched arm elimination.

use rand::Rng;
use serde::Serialize;

use super::model::OutcomeModel;
use super::SimError;
use crate::design::{BatchWeights, DesignSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Elimination {
    /// Number of candidates before this elimination.
    pub stage: usize,
    pub arm: usize,
    /// Number of units assigned when the elimination happened.
    pub time: u64,
    /// Per-arm pull counts at that moment.
    pub pulls: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub chosen_arm: usize,
    pub pull_counts: Vec<u64>,
    pub elimination_order: Vec<Elimination>,
    pub final_means: Vec<f64>,
}

/// Elimination times `t_K, …, t_2` for a sample of size `t`.
///
/// `t_n = round_half_up((β_K + … + β_n)·t)`, made nondecreasing, capped at
/// `t`, with `t_2 = t`.
pub fn checkpoints(weights: &BatchWeights, t: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(weights.k() - 1);
    let mut cumulative = 0.0;
    let mut prev = 0u64;
    for (n, beta) in weights.stages() {
        cumulative += beta;
        let raw = (cumulative * t as f64 + 0.5).floor();
        let mut tn = if raw <= 0.0 { 0 } else { (raw as u64).min(t) };
        if n == 2 {
            tn = t;
        }
        tn = tn.max(prev);
        out.push(tn);
        prev = tn;
    }
    out
}

fn lowest_mean(candidates: &[usize], sums: &[f64], pulls: &[u64]) -> usize {
    let mean = |i: usize| if pulls[i] == 0 { 0.0 } else { sums[i] / pulls[i] as f64 };
    let mut best = candidates[0];
    let mut best_mean = mean(best);
    for &i in &candidates[1..] {
        let m = mean(i);
        if m < best_mean {
            best = i;
            best_mean = m;
        }
    }
    best
}

/// Simulates one experiment of `t` units under `design`.
///
/// Each unit goes to the candidate with the fewest pulls (lowest index on
/// ties). At each checkpoint the candidate with the lowest running mean is
/// removed (lowest index on ties); coincident checkpoints remove several arms
/// in sequence, recomputing the minimum after each removal. An arm with no
/// pulls has mean 0.
pub fn run_trial<R: Rng + ?Sized>(
    design: &DesignSpec,
    model: &OutcomeModel,
    t: u64,
    rng: &mut R,
) -> Result<TrialRecord, SimError> {
    let k = design.k();
    if model.k() != k {
        return Err(SimError::ArmMismatch {
            design: k,
            model: model.k(),
        });
    }
    if t < k as u64 {
        return Err(SimError::SampleTooSmall { t, k });
    }
    let stops = checkpoints(&design.weights(), t);
    let mut candidates: Vec<usize> = (0..k).collect();
    let mut pulls = vec![0u64; k];
    let mut sums = vec![0.0f64; k];
    let mut eliminations = Vec::with_capacity(k - 1);
    let mut next = 0;

    let mut eliminate_due = |now: u64, candidates: &mut Vec<usize>, pulls: &[u64], sums: &[f64]| {
        while next < stops.len() && stops[next] == now {
            let arm = lowest_mean(candidates, sums, pulls);
            candidates.retain(|&c| c != arm);
            eliminations.push(Elimination {
                stage: k - next,
                arm,
                time: now,
                pulls: pulls.to_vec(),
            });
            next += 1;
        }
    };

    eliminate_due(0, &mut candidates, &pulls, &sums);
    for now in 1..=t {
        let mut arm = candidates[0];
        for &c in &candidates[1..] {
            if pulls[c] < pulls[arm] {
                arm = c;
            }
        }
        sums[arm] += model.sample(arm, rng);
        pulls[arm] += 1;
        eliminate_due(now, &mut candidates, &pulls, &sums);
    }
    debug_assert_eq!(candidates.len(), 1);

    let final_means = sums
        .iter()
        .zip(&pulls)
        .map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
        .collect();
    Ok(TrialRecord {
        chosen_arm: candidates[0],
        pull_counts: pulls,
        elimination_order: eliminations,
        final_means,
    })
}
