//! Inputs shared by the benchmarks.

use humble_core::synth::{sample_jobs, synthetic_pool};
use humble_core::{
    empirical_scores, CandidateProfile, EmpiricalScoreDistribution, JobSpec, ScorerHandle,
};

pub const SEED: u64 = 11;

pub fn pool(n: usize) -> Vec<CandidateProfile> {
    synthetic_pool(n, SEED)
}

pub fn job() -> JobSpec {
    sample_jobs().remove(0)
}

/// Perturbed score distributions for an `n`-candidate pool.
pub fn distributions(n: usize, samples: usize) -> Vec<EmpiricalScoreDistribution> {
    let job = job();
    let mut scorer = ScorerHandle::default();
    pool(n)
        .iter()
        .map(|c| empirical_scores(&mut scorer, &job, c, samples, 0.5, SEED).expect("valid fixture"))
        .collect()
}
