//! Shortlist composition: expected-rank leaders ("exploit") plus a proportion
//! of the highest-entropy candidates ("explore").

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::rankset::RankProb;
use crate::screening::{RunResults, ScreeningRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryUncertainty {
    pub expected_rank: f64,
    pub entropy: f64,
    pub variance: f64,
    pub support: Vec<RankProb>,
    pub humble_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortlistEntry {
    pub candidate_id: CandidateId,
    pub label: String,
    /// Unperturbed score.
    pub score: f64,
    pub deterministic_rank: usize,
    /// Absent in deterministic mode, which must not depend on the Monte Carlo run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<EntryUncertainty>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shortlist {
    pub job_id: String,
    pub k: usize,
    pub humble: bool,
    pub entropy_proportion: f64,
    pub exploit: Vec<ShortlistEntry>,
    /// Sorted by entropy, descending.
    pub explore: Vec<ShortlistEntry>,
}

impl Shortlist {
    pub fn len(&self) -> usize {
        self.exploit.len() + self.explore.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Explore slots for a shortlist of `k`: `floor(rho * k)`. The small epsilon
/// keeps products such as `0.7 * 10` from flooring to 6.
pub fn explore_slots(k: usize, rho: f64) -> usize {
    let m = (rho * k as f64 + 1e-9).floor() as usize;
    m.min(k)
}

fn entry(results: &RunResults, i: usize, humble: bool) -> ShortlistEntry {
    let c = &results.candidates[i];
    let uncertainty = humble.then(|| {
        let s = &results.stats[i];
        EntryUncertainty {
            expected_rank: s.expected_rank,
            entropy: s.entropy,
            variance: s.variance,
            support: s.support.clone(),
            humble_rank: c.humble_rank,
        }
    });
    ShortlistEntry {
        candidate_id: c.id.clone(),
        label: c.label.clone(),
        score: c.score,
        deterministic_rank: c.deterministic_rank,
        uncertainty,
    }
}

/// Compose a shortlist of `min(k, n)` candidates from a complete run.
///
/// With `humble == false` this is the top of the point-estimate ranking.
/// Otherwise `m = floor(rho * k)` slots go to the highest-entropy candidates
/// outside the top `k - m` of the expected-rank order, which fill the rest.
pub fn compose_shortlist(run: &ScreeningRun, k: usize, humble: bool, rho: f64) -> Result<Shortlist> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("entropy proportion must be in [0, 1], got {rho}")));
    }
    let results = run.results()?;
    let n = results.candidates.len();
    let k_eff = k.min(n);
    let position: std::collections::HashMap<&CandidateId, usize> = results
        .rank_set
        .candidate_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    let index = |id: &CandidateId| position[id];

    let (exploit, explore) = if !humble {
        let exploit = results.deterministic_order[..k_eff]
            .iter()
            .map(|id| entry(results, index(id), false))
            .collect();
        (exploit, Vec::new())
    } else {
        let m = explore_slots(k_eff, rho);
        let leaders: Vec<usize> = results.humble_order[..k_eff - m]
            .iter()
            .map(index)
            .collect();
        let taken: HashSet<usize> = leaders.iter().copied().collect();
        let explore = results
            .rank_set
            .entropy_order_indices()
            .into_iter()
            .filter(|i| !taken.contains(i))
            .take(m)
            .map(|i| entry(results, i, true))
            .collect();
        let exploit = leaders.into_iter().map(|i| entry(results, i, true)).collect();
        (exploit, explore)
    };
    Ok(Shortlist {
        job_id: run.job_id.clone(),
        k,
        humble,
        entropy_proportion: rho,
        exploit,
        explore,
    })
}
