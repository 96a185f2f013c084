//! Batched arm elimination as a sequential experiment, plus the replication
//! harness and analytic cross-checks.

mod engine;
mod harness;
mod model;
mod oracle;

use thiserror::Error;

pub use engine::{checkpoints, run_trial, Elimination, TrialRecord};
pub use harness::{monte_carlo, monte_carlo_with_threads, replication_stream, SimReport};
pub use model::{sample_outcome, ModelKind, OutcomeModel, ZiLogNormal};
pub use oracle::{empirical_exponent, exact_crt_error_two_arms, normal_cdf, ExponentFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid outcome model: {0}")]
    InvalidModel(String),
    #[error("design has {design} arms but the model has {model}")]
    ArmMismatch { design: usize, model: usize },
    #[error("sample size {t} is smaller than the number of arms {k}")]
    SampleTooSmall { t: u64, k: usize },
    #[error("at least one replication is required")]
    NoReplications,
    #[error("sample size must be even and at least 2, got {0}")]
    OddSampleSize(u64),
    #[error("need at least 3 distinct sample sizes for a slope, got {0}")]
    TooFewPoints(usize),
    #[error("error rate at T={t} is {rate}; a slope needs rates strictly inside (0, 1), so increase replications or shrink T")]
    DegenerateErrorRate { t: f64, rate: f64 },
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}
