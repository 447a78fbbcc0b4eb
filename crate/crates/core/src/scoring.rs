//! Black-box scoring, feature-mask perturbation and the synthetic noisy oracle.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::rankset::EmpiricalScoreDistribution;
use crate::rng;

pub const DEFAULT_MASK_PROB: f64 = 0.5;
pub const DEFAULT_SAMPLES: usize = 100;

/// Feature strengths of one applicant. Unlisted features are 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateProfile {
    pub id: CandidateId,
    #[serde(default)]
    pub label: String,
    pub features: BTreeMap<String, f64>,
    /// Set on perturbed copies: index of the perturbation that produced it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<u32>,
}

impl CandidateProfile {
    pub fn new(id: impl Into<CandidateId>, features: BTreeMap<String, f64>) -> Self {
        let id = id.into();
        CandidateProfile {
            label: id.to_string(),
            id,
            features,
            perturbation: None,
        }
    }

    pub fn feature(&self, name: &str) -> f64 {
        self.features.get(name).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Draft,
    Open,
    Closed,
}

impl fmt::Display for JobStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JobStatus::Draft => "draft",
            JobStatus::Open => "open",
            JobStatus::Closed => "closed",
        })
    }
}

impl std::str::FromStr for JobStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "draft" => Ok(JobStatus::Draft),
            "open" => Ok(JobStatus::Open),
            "closed" => Ok(JobStatus::Closed),
            other => Err(Error::invalid(format!("unknown job status '{other}'"))),
        }
    }
}

/// A job requisition: requirement weights over feature names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub requirements: BTreeMap<String, f64>,
    pub status: JobStatus,
    /// ISO-8601 UTC creation time, used to order job listings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl JobSpec {
    pub fn total_weight(&self) -> f64 {
        self.requirements.values().sum()
    }
}

/// A relevance function available for inference only. Implementations must be
/// deterministic for a given `(job, candidate)` and return finite scores where
/// higher means more relevant.
pub trait BlackBoxScorer: Send + Sync {
    fn score(&self, job: &JobSpec, candidate: &CandidateProfile) -> Result<f64>;
}

/// Weighted mean of the candidate's features over the job's requirements.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceScorer;

impl BlackBoxScorer for ReferenceScorer {
    fn score(&self, job: &JobSpec, candidate: &CandidateProfile) -> Result<f64> {
        let total = job.total_weight();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid(format!(
                "job {} has no positive requirement weight",
                job.id
            )));
        }
        let hit: f64 = job
            .requirements
            .iter()
            .map(|(name, w)| w * candidate.feature(name))
            .sum();
        Ok(hit / total)
    }
}

/// Scores `true_scores[i] + N(0, sigma^2)` on every evaluation. Each candidate
/// draws from its own seeded stream, so call sequences per candidate do not
/// depend on how evaluations of different candidates interleave.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    ids: Vec<CandidateId>,
    index: HashMap<CandidateId, usize>,
    true_scores: Vec<f64>,
    noise: Normal<f64>,
    sigma: f64,
    seed: u64,
    streams: Vec<Option<ChaCha8Rng>>,
}

impl SyntheticOracle {
    pub fn new(ids: Vec<CandidateId>, true_scores: Vec<f64>, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if ids.len() != true_scores.len() {
            return Err(Error::invalid("one id per true score required"));
        }
        if true_scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("true scores must be finite"));
        }
        let index: HashMap<CandidateId, usize> =
            ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        if index.len() != ids.len() {
            return Err(Error::invalid("duplicate candidate id"));
        }
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let streams = vec![None; ids.len()];
        Ok(SyntheticOracle {
            ids,
            index,
            true_scores,
            noise,
            sigma,
            seed,
            streams,
        })
    }

    pub fn len(&self) -> usize {
        self.true_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_scores.is_empty()
    }

    pub fn ids(&self) -> &[CandidateId] {
        &self.ids
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// One noisy evaluation for candidate `i`.
    pub fn evaluate(&mut self, i: usize) -> Result<f64> {
        let truth = *self
            .true_scores
            .get(i)
            .ok_or_else(|| Error::invalid(format!("candidate index {i} out of range")))?;
        if self.sigma == 0.0 {
            return Ok(truth);
        }
        let (seed, id) = (self.seed, &self.ids[i]);
        let stream = self.streams[i]
            .get_or_insert_with(|| rng::stream(seed, "oracle", id.as_str().as_bytes()));
        Ok(truth + self.noise.sample(stream))
    }

    pub fn evaluate_id(&mut self, id: &str) -> Result<f64> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| Error::NotFound(format!("candidate {id} unknown to oracle")))?;
        self.evaluate(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    Reference,
    SyntheticOracle,
    External,
}

/// The scorer a screening uses.
#[derive(Clone)]
pub enum ScorerHandle {
    Reference(ReferenceScorer),
    SyntheticOracle(SyntheticOracle),
    External(Arc<dyn BlackBoxScorer>),
}

impl fmt::Debug for ScorerHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScorerHandle").field(&self.kind()).finish()
    }
}

impl Default for ScorerHandle {
    fn default() -> Self {
        ScorerHandle::Reference(ReferenceScorer)
    }
}

impl ScorerHandle {
    pub fn kind(&self) -> ScorerKind {
        match self {
            ScorerHandle::Reference(_) => ScorerKind::Reference,
            ScorerHandle::SyntheticOracle(_) => ScorerKind::SyntheticOracle,
            ScorerHandle::External(_) => ScorerKind::External,
        }
    }

    /// Evaluate the scorer. The synthetic oracle ignores the job and looks the
    /// candidate up by id.
    pub fn score(&mut self, job: &JobSpec, candidate: &CandidateProfile) -> Result<f64> {
        let z = match self {
            ScorerHandle::Reference(s) => s.score(job, candidate)?,
            ScorerHandle::SyntheticOracle(o) => o.evaluate_id(candidate.id.as_str())?,
            ScorerHandle::External(s) => s.score(job, candidate)?,
        };
        if !z.is_finite() {
            return Err(Error::invalid(format!(
                "scorer returned non-finite score for {}",
                candidate.id
            )));
        }
        Ok(z)
    }
}

/// Noisy oracle around `true_scores`, with ids `c1..cn` as produced by
/// [`crate::experiments::truth_ids`].
pub fn synthetic_oracle(true_scores: Vec<f64>, sigma: f64, seed: u64) -> Result<ScorerHandle> {
    let ids = crate::experiments::truth_ids(true_scores.len());
    Ok(ScorerHandle::SyntheticOracle(SyntheticOracle::new(
        ids,
        true_scores,
        sigma,
        seed,
    )?))
}

fn check_mask_prob(mask_prob: f64) -> Result<()> {
    if mask_prob > 0.0 && mask_prob < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "mask probability must be in (0, 1), got {mask_prob}"
        )))
    }
}

/// Mask each feature to 0 independently with probability `mask_prob`.
/// Exactly one Bernoulli draw is consumed per feature, in name order.
pub fn perturb<R: Rng + ?Sized>(
    candidate: &CandidateProfile,
    mask_prob: f64,
    tag: u32,
    rng: &mut R,
) -> Result<CandidateProfile> {
    check_mask_prob(mask_prob)?;
    if candidate.features.is_empty() {
        return Err(Error::invalid(format!(
            "candidate {} has no features to mask",
            candidate.id
        )));
    }
    let features = candidate
        .features
        .iter()
        .map(|(name, &v)| {
            let masked = rng.random_bool(mask_prob);
            (name.clone(), if masked { 0.0 } else { v })
        })
        .collect();
    Ok(CandidateProfile {
        id: candidate.id.clone(),
        label: candidate.label.clone(),
        features,
        perturbation: Some(tag),
    })
}

/// Score `samples` independent feature-masked copies of `candidate`. The
/// unperturbed score is attached as the point estimate.
pub fn empirical_scores(
    scorer: &mut ScorerHandle,
    job: &JobSpec,
    candidate: &CandidateProfile,
    samples: usize,
    mask_prob: f64,
    seed: u64,
) -> Result<EmpiricalScoreDistribution> {
    if samples == 0 {
        return Err(Error::invalid("need at least one perturbation sample"));
    }
    check_mask_prob(mask_prob)?;
    let point = scorer.score(job, candidate)?;
    let mut stream = rng::stream(seed, "perturb", candidate.id.as_str().as_bytes());
    let mut scores = Vec::with_capacity(samples);
    for tag in 0..samples {
        let masked = perturb(candidate, mask_prob, tag as u32, &mut stream)?;
        scores.push(scorer.score(job, &masked)?);
    }
    Ok(EmpiricalScoreDistribution::new(candidate.id.clone(), scores)?.with_point_estimate(point))
}
