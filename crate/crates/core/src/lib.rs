//! Uncertainty-aware candidate screening.
//!
//! Point-estimate scores from a black-box matcher are turned into *rank sets*:
//! for each candidate, a probability distribution over the ranks it could
//! take. Perturbing each candidate's features gives an empirical score
//! distribution; Monte Carlo draws over those distributions give the
//! rank-probability matrix, from which expected rank, rank entropy and rank
//! variance follow.
//!
//! ```
//! use humble_core::{estimate_rank_set, EmpiricalScoreDistribution};
//!
//! let dists = vec![
//!     EmpiricalScoreDistribution::new("a", vec![1.0, 3.0]).unwrap(),
//!     EmpiricalScoreDistribution::new("b", vec![2.0]).unwrap(),
//! ];
//! let rs = estimate_rank_set(&dists, 10_000, 7).unwrap();
//! assert!((rs.expected_rank(0).unwrap() - 1.5).abs() < 0.05);
//! ```

pub mod error;
pub mod experiments;
pub mod export;
mod id;
pub mod ingest;
pub mod metrics;
pub mod rankset;
pub mod rng;
pub mod scoring;
pub mod screening;
pub mod shortlist;
pub mod store;
pub mod synth;

pub use error::{Error, IngestError, LineIssue, Result};
pub use experiments::{
    generate_truth, run_sweep, run_trial, Method, NoiseSweepConfig, SweepResult, Truth,
};
pub use export::{RankSetExport, Triplet};
pub use id::CandidateId;
pub use metrics::{compare, jaccard_topk, rbo, ComparisonReport};
pub use rankset::{estimate_rank_set, EmpiricalScoreDistribution, RankProb, RankSet, RankStats};
pub use scoring::{
    empirical_scores, perturb, synthetic_oracle, BlackBoxScorer, CandidateProfile, JobSpec,
    JobStatus, ReferenceScorer, ScorerHandle, ScorerKind, SyntheticOracle,
};
pub use screening::{screen, screen_pool, RunParams, RunResults, RunStatus, ScreeningRun};
pub use shortlist::{compose_shortlist, Shortlist, ShortlistEntry};
pub use store::{JobFilter, JobSummary, Store};
