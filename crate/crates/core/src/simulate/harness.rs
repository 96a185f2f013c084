//! Replicated simulation with reproducible, schedule-independent results.
//!
//! Replication `r` draws from the ChaCha8 stream `r` under key `master_seed`,
//! so each replication's randomness is fixed by `(master_seed, r, draw index)`
//! and does not depend on which worker runs it. Per-replication results are
//! collected in replication order and reduced sequentially with compensated
//! (Neumaier) summation, which makes the report bit-identical for any thread
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::run_trial;
use super::model::OutcomeModel;
use super::SimError;
use crate::design::DesignSpec;

/// Random stream for replication `replication` under `master_seed`.
pub fn replication_stream(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub design: String,
    pub model: String,
    pub t: u64,
    pub replications: u64,
    pub seed: u64,
    pub error_rate: f64,
    pub error_se: f64,
    pub regret: f64,
    pub regret_se: f64,
    pub mean_pulls: Vec<f64>,
}

impl SimReport {
    pub fn csv_header(k: usize) -> String {
        let mut h = String::from("design,model,T,reps,seed,error_rate,error_se,regret,regret_se");
        for i in 1..=k {
            h.push_str(&format!(",pulls_arm{i}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{}",
            self.design,
            self.model,
            self.t,
            self.replications,
            self.seed,
            self.error_rate,
            self.error_se,
            self.regret,
            self.regret_se
        );
        for p in &self.mean_pulls {
            row.push_str(&format!(",{p}"));
        }
        row
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

struct Outcome {
    chosen: usize,
    pulls: Vec<u64>,
}

/// Runs `replications` independent trials and aggregates error rate, regret
/// and mean allocation. Uses the current rayon pool.
pub fn monte_carlo(
    design: &DesignSpec,
    model: &OutcomeModel,
    t: u64,
    replications: u64,
    master_seed: u64,
) -> Result<SimReport, SimError> {
    if replications == 0 {
        return Err(SimError::NoReplications);
    }
    let outcomes: Vec<Outcome> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_stream(master_seed, r);
            run_trial(design, model, t, &mut rng).map(|rec| Outcome {
                chosen: rec.chosen_arm,
                pulls: rec.pull_counts,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(aggregate(design, model, t, master_seed, &outcomes))
}

/// As [`monte_carlo`], on a dedicated pool of `threads` workers.
pub fn monte_carlo_with_threads(
    design: &DesignSpec,
    model: &OutcomeModel,
    t: u64,
    replications: u64,
    master_seed: u64,
    threads: usize,
) -> Result<SimReport, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    pool.install(|| monte_carlo(design, model, t, replications, master_seed))
}

fn aggregate(design: &DesignSpec, model: &OutcomeModel, t: u64, seed: u64, outcomes: &[Outcome]) -> SimReport {
    let k = model.k();
    let best = model.best_arm();
    let means = model.true_means();
    let n = outcomes.len() as f64;

    let mut errors = 0u64;
    let mut regret = NeumaierSum::default();
    let mut regret_sq = NeumaierSum::default();
    let mut pulls = vec![0u128; k];
    for o in outcomes {
        if o.chosen != best {
            errors += 1;
        }
        let gap = means[best] - means[o.chosen];
        regret.add(gap);
        regret_sq.add(gap * gap);
        for (acc, &p) in pulls.iter_mut().zip(&o.pulls) {
            *acc += p as u128;
        }
    }
    let error_rate = errors as f64 / n;
    let error_se = (error_rate * (1.0 - error_rate) / n).sqrt();
    let mean_regret = regret.value() / n;
    let regret_se = if outcomes.len() > 1 {
        let var = ((regret_sq.value() - n * mean_regret * mean_regret) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    SimReport {
        design: design.name.clone(),
        model: model.descriptor().to_string(),
        t,
        replications: outcomes.len() as u64,
        seed,
        error_rate,
        error_se,
        regret: mean_regret,
        regret_se,
        mean_pulls: pulls.iter().map(|&p| p as f64 / n).collect(),
    }
}
