//! The screening pipeline: perturbed scores, rank set, statistics and the
//! comparison report for one job against a candidate pool.

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::metrics::{self, ComparisonReport, DEFAULT_PERSISTENCE};
use crate::rankset::{estimate_rank_set, RankSet, RankStats, DEFAULT_DRAWS, DEFAULT_THRESHOLD};
use crate::scoring::{
    empirical_scores, CandidateProfile, JobSpec, ScorerHandle, DEFAULT_MASK_PROB, DEFAULT_SAMPLES,
};
use crate::store::Store;

pub const DEFAULT_SHORTLIST: usize = 50;
pub const DEFAULT_ENTROPY_PROPORTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    /// Perturbations per candidate.
    pub samples: usize,
    pub mask_prob: f64,
    /// Monte Carlo draws.
    pub draws: u32,
    /// Support threshold for stored statistics.
    pub threshold: f64,
    /// Shortlist size and comparison depth.
    pub k: usize,
    pub entropy_proportion: f64,
    pub persistence: f64,
    pub seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            samples: DEFAULT_SAMPLES,
            mask_prob: DEFAULT_MASK_PROB,
            draws: DEFAULT_DRAWS,
            threshold: DEFAULT_THRESHOLD,
            k: DEFAULT_SHORTLIST,
            entropy_proportion: DEFAULT_ENTROPY_PROPORTION,
            persistence: DEFAULT_PERSISTENCE,
            seed: 0,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples must be positive"));
        }
        if !(self.mask_prob > 0.0 && self.mask_prob < 1.0) {
            return Err(Error::invalid("mask_prob must be in (0, 1)"));
        }
        if self.draws == 0 {
            return Err(Error::invalid("draws must be positive"));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::invalid("threshold must be in [0, 1)"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if !(0.0..=1.0).contains(&self.entropy_proportion) {
            return Err(Error::invalid("entropy_proportion must be in [0, 1]"));
        }
        if !(self.persistence > 0.0 && self.persistence < 1.0) {
            return Err(Error::invalid("persistence must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pending,
    Complete,
    Failed,
}

/// Per-candidate facts that do not depend on the Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenedCandidate {
    pub id: CandidateId,
    pub label: String,
    /// Unperturbed score.
    pub score: f64,
    /// 1-based position in the point-estimate ranking.
    pub deterministic_rank: usize,
    /// 1-based position in the expected-rank ranking.
    pub humble_rank: usize,
}

/// Everything a complete run produced. `candidates` and `stats` are aligned
/// with `rank_set.candidate_ids()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub candidates: Vec<ScreenedCandidate>,
    pub deterministic_order: Vec<CandidateId>,
    pub humble_order: Vec<CandidateId>,
    pub stats: Vec<RankStats>,
    pub report: ComparisonReport,
    pub rank_set: RankSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRun {
    pub run_id: String,
    pub job_id: String,
    pub params: RunParams,
    /// ISO-8601 UTC.
    pub created_at: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<RunResults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScreeningRun {
    pub fn results(&self) -> Result<&RunResults> {
        match (&self.status, &self.results) {
            (RunStatus::Complete, Some(r)) => Ok(r),
            _ => Err(Error::Conflict(format!("run {} is not complete", self.run_id))),
        }
    }
}

pub fn now_timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Content address of a screening: same job, pool and parameters give the
/// same id.
pub fn run_id_for(job: &JobSpec, pool: &[CandidateProfile], params: &RunParams) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(job)?);
    h.update([0]);
    h.update(serde_json::to_vec(pool)?);
    h.update([0]);
    h.update(serde_json::to_vec(params)?);
    let digest = h.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("run-{hex}"))
}

/// Point-estimate ranking: descending unperturbed score, ties by id.
pub fn deterministic_order(ids: &[CandidateId], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    order
}

/// Run the full pipeline for `job` over `pool`.
pub fn screen_pool(
    job: &JobSpec,
    pool: &[CandidateProfile],
    params: &RunParams,
    scorer: &mut ScorerHandle,
) -> Result<RunResults> {
    params.validate()?;
    if pool.len() < 2 {
        return Err(Error::invalid(format!(
            "pool has {} candidate(s); screening needs at least 2",
            pool.len()
        )));
    }
    let dists = pool
        .iter()
        .map(|c| empirical_scores(scorer, job, c, params.samples, params.mask_prob, params.seed))
        .collect::<Result<Vec<_>>>()?;
    let rank_set = estimate_rank_set(&dists, params.draws, params.seed)?;

    let ids = rank_set.candidate_ids().to_vec();
    let scores: Vec<f64> = dists
        .iter()
        .map(|d| d.point_estimate().expect("empirical_scores sets the point estimate"))
        .collect();
    let det = deterministic_order(&ids, &scores);
    let humble = rank_set.humble_order_indices();
    let mut det_rank = vec![0; ids.len()];
    for (pos, &i) in det.iter().enumerate() {
        det_rank[i] = pos + 1;
    }
    let mut humble_rank = vec![0; ids.len()];
    for (pos, &i) in humble.iter().enumerate() {
        humble_rank[i] = pos + 1;
    }
    let candidates = pool
        .iter()
        .enumerate()
        .map(|(i, c)| ScreenedCandidate {
            id: c.id.clone(),
            label: c.label.clone(),
            score: scores[i],
            deterministic_rank: det_rank[i],
            humble_rank: humble_rank[i],
        })
        .collect();
    let deterministic_order: Vec<CandidateId> = det.iter().map(|&i| ids[i].clone()).collect();
    let humble_order: Vec<CandidateId> = humble.iter().map(|&i| ids[i].clone()).collect();
    let report = metrics::compare(
        &rank_set,
        &deterministic_order,
        params.k,
        params.persistence,
        &job.id,
        &job.title,
    )?;
    Ok(RunResults {
        candidates,
        deterministic_order,
        humble_order,
        stats: rank_set.all_stats(params.threshold)?,
        report,
        rank_set,
    })
}

/// Screen `job_id` against the store's pool with the reference scorer and
/// persist the run. Identical job, pool and parameters return the existing run.
pub fn screen(store: &Store, job_id: &str, params: &RunParams) -> Result<ScreeningRun> {
    params.validate()?;
    let job = store.job(job_id)?;
    let pool = store.pool()?;
    if pool.len() < 2 {
        return Err(Error::invalid(format!(
            "pool has {} candidate(s); screening needs at least 2",
            pool.len()
        )));
    }
    let run_id = run_id_for(&job, &pool, params)?;
    if let Some(existing) = store.find_run(&run_id)? {
        return Ok(existing);
    }
    let mut scorer = ScorerHandle::default();
    let (status, results, error) = match screen_pool(&job, &pool, params, &mut scorer) {
        Ok(r) => (RunStatus::Complete, Some(r), None),
        Err(e) => (RunStatus::Failed, None, Some(e.to_string())),
    };
    let run = ScreeningRun {
        run_id,
        job_id: job.id.clone(),
        params: *params,
        created_at: now_timestamp(),
        status,
        results,
        error,
    };
    match store.save_run(&run) {
        Ok(()) => Ok(run),
        // a concurrent identical request won the race
        Err(Error::Conflict(_)) => store.load_run(&run.run_id),
        Err(e) => Err(e),
    }
}
