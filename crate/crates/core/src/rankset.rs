//! Rank sets: per-candidate probability distributions over ranks.
//!
//! A [`RankSet`] is estimated by Monte Carlo. Each draw picks one sample per
//! candidate from its [`EmpiricalScoreDistribution`], sorts candidates by the
//! picked score (descending, ties shuffled uniformly) and records the rank each
//! candidate lands on. Counts are kept sparse per candidate; the matrix
//! `P[i][j] = count(i, j) / draws` is doubly stochastic by construction.
//!
//! Randomness follows a fixed contract so results are bit-identical however
//! the work is scheduled:
//! - sample selection for candidate `c` comes from stream `("sample", id(c))`;
//! - tie-breaking in draw `d` comes from stream `("ties", d)`, and tied
//!   candidates are put in id order before being shuffled.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::rng;

pub const DEFAULT_DRAWS: u32 = 10_000;
pub const DEFAULT_THRESHOLD: f64 = 0.01;

const DRAW_BLOCK: u32 = 256;

/// The perturbed scores observed for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalScoreDistribution {
    candidate_id: CandidateId,
    samples: Vec<f64>,
    point_estimate: Option<f64>,
}

impl EmpiricalScoreDistribution {
    pub fn new(candidate_id: impl Into<CandidateId>, samples: Vec<f64>) -> Result<Self> {
        let candidate_id = candidate_id.into();
        if samples.is_empty() {
            return Err(Error::invalid(format!(
                "candidate {candidate_id} has an empty score distribution"
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::invalid(format!(
                "candidate {candidate_id} has a non-finite sample ({bad})"
            )));
        }
        Ok(EmpiricalScoreDistribution {
            candidate_id,
            samples,
            point_estimate: None,
        })
    }

    /// Attach the unperturbed score as metadata. It does not take part in
    /// rank-set estimation.
    pub fn with_point_estimate(mut self, score: f64) -> Self {
        self.point_estimate = Some(score);
        self
    }

    pub fn candidate_id(&self) -> &CandidateId {
        &self.candidate_id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn point_estimate(&self) -> Option<f64> {
        self.point_estimate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// A rank and the probability of landing on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankProb {
    pub rank: u32,
    pub probability: f64,
}

/// Summary statistics of one candidate's rank distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub candidate_id: CandidateId,
    pub expected_rank: f64,
    /// Shannon entropy in nats.
    pub entropy: f64,
    pub variance: f64,
    /// Ranks whose probability reaches the sparsification threshold.
    pub support: Vec<RankProb>,
}

/// Rank-probability matrix stored as sparse per-candidate `(rank, count)` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RankSetRepr")]
pub struct RankSet {
    candidate_ids: Vec<CandidateId>,
    /// Row `i` lists `(rank, count)` pairs with rank ascending and count > 0.
    rows: Vec<Vec<(u32, u32)>>,
    draws: u32,
    seed: u64,
}

#[derive(Deserialize)]
struct RankSetRepr {
    candidate_ids: Vec<CandidateId>,
    rows: Vec<Vec<(u32, u32)>>,
    draws: u32,
    seed: u64,
}

impl TryFrom<RankSetRepr> for RankSet {
    type Error = Error;

    fn try_from(r: RankSetRepr) -> Result<Self> {
        RankSet::from_sparse_counts(r.candidate_ids, r.rows, r.draws, r.seed)
    }
}

impl RankSet {
    /// Build from sparse count rows, checking that every row and every rank
    /// column sums to `draws`.
    pub fn from_sparse_counts(
        candidate_ids: Vec<CandidateId>,
        rows: Vec<Vec<(u32, u32)>>,
        draws: u32,
        seed: u64,
    ) -> Result<Self> {
        let n = candidate_ids.len();
        if n == 0 {
            return Err(Error::invalid("rank set needs at least one candidate"));
        }
        if draws == 0 {
            return Err(Error::invalid("draws must be positive"));
        }
        if rows.len() != n {
            return Err(Error::invalid(format!(
                "{} rows for {n} candidates",
                rows.len()
            )));
        }
        check_unique(&candidate_ids)?;
        let mut column = vec![0u64; n];
        for (id, row) in candidate_ids.iter().zip(&rows) {
            let mut total = 0u64;
            let mut prev = 0u32;
            for &(rank, count) in row {
                if rank == 0 || rank as usize > n || rank <= prev {
                    return Err(Error::invalid(format!(
                        "row for {id}: ranks must be ascending within 1..={n}"
                    )));
                }
                if count == 0 {
                    return Err(Error::invalid(format!("row for {id}: zero count stored")));
                }
                prev = rank;
                total += u64::from(count);
                column[rank as usize - 1] += u64::from(count);
            }
            if total != u64::from(draws) {
                return Err(Error::invalid(format!(
                    "row for {id} sums to {total}, expected {draws}"
                )));
            }
        }
        if let Some(j) = column.iter().position(|&c| c != u64::from(draws)) {
            return Err(Error::invalid(format!(
                "rank {} column sums to {}, expected {draws}",
                j + 1,
                column[j]
            )));
        }
        Ok(RankSet {
            candidate_ids,
            rows,
            draws,
            seed,
        })
    }

    /// Build from a dense `n x n` count matrix (`counts[i][j]` = number of
    /// draws in which candidate `i` took rank `j + 1`).
    pub fn from_counts(
        candidate_ids: Vec<CandidateId>,
        counts: &[Vec<u32>],
        draws: u32,
        seed: u64,
    ) -> Result<Self> {
        let n = candidate_ids.len();
        if counts.iter().any(|row| row.len() != n) {
            return Err(Error::invalid(format!("count matrix must be {n} x {n}")));
        }
        let rows = counts
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(j, &c)| (j as u32 + 1, c))
                    .collect()
            })
            .collect();
        Self::from_sparse_counts(candidate_ids, rows, draws, seed)
    }

    pub fn n(&self) -> usize {
        self.candidate_ids.len()
    }

    pub fn candidate_ids(&self) -> &[CandidateId] {
        &self.candidate_ids
    }

    pub fn draws(&self) -> u32 {
        self.draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.candidate_ids.iter().position(|c| c.as_str() == id)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "candidate index {i} out of range for {} candidates",
                self.n()
            )))
        }
    }

    /// Sparse `(rank, count)` pairs of row `i`.
    pub fn row_counts(&self, i: usize) -> Result<&[(u32, u32)]> {
        self.check_index(i)?;
        Ok(&self.rows[i])
    }

    /// Nonzero `(rank, probability)` entries of row `i`, ascending by rank.
    pub fn row(&self, i: usize) -> Result<Vec<RankProb>> {
        self.check_index(i)?;
        let d = f64::from(self.draws);
        Ok(self.rows[i]
            .iter()
            .map(|&(rank, count)| RankProb {
                rank,
                probability: f64::from(count) / d,
            })
            .collect())
    }

    /// Probability that candidate `i` takes rank `rank` (1-based).
    pub fn prob(&self, i: usize, rank: u32) -> Result<f64> {
        self.check_index(i)?;
        let count = self.rows[i]
            .binary_search_by_key(&rank, |&(r, _)| r)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0);
        Ok(f64::from(count) / f64::from(self.draws))
    }

    /// Materialize the full `n x n` probability matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let d = f64::from(self.draws);
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; n];
                for &(rank, count) in row {
                    out[rank as usize - 1] = f64::from(count) / d;
                }
                out
            })
            .collect()
    }

    /// Mean rank of candidate `i` over the full row.
    pub fn expected_rank(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let (s1, _) = moments(&self.rows[i]);
        Ok(s1 as f64 / f64::from(self.draws))
    }

    /// `-sum p ln p` over the full row, in nats.
    pub fn rank_entropy(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let d = f64::from(self.draws);
        Ok(entropy_of(self.rows[i].iter().map(|&(_, c)| f64::from(c) / d)))
    }

    /// Variance of the rank of candidate `i`.
    pub fn rank_variance(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let (s1, s2) = moments(&self.rows[i]);
        // (D * sum c j^2 - (sum c j)^2) / D^2, exact in integers so never negative
        let d = u128::from(self.draws);
        let num = d * u128::from(s2) - u128::from(s1) * u128::from(s1);
        Ok((num as f64 / (d * d) as f64).max(0.0))
    }

    /// Entries of every row with probability `>= threshold`, ascending by rank.
    /// Probabilities are not renormalized.
    pub fn sparsify(&self, threshold: f64) -> Result<Vec<Vec<RankProb>>> {
        check_threshold(threshold)?;
        (0..self.n())
            .map(|i| Ok(self.support(i, threshold)))
            .collect()
    }

    fn support(&self, i: usize, threshold: f64) -> Vec<RankProb> {
        let d = f64::from(self.draws);
        self.rows[i]
            .iter()
            .map(|&(rank, count)| RankProb {
                rank,
                probability: f64::from(count) / d,
            })
            .filter(|rp| rp.probability >= threshold)
            .collect()
    }

    pub fn stats(&self, i: usize, threshold: f64) -> Result<RankStats> {
        check_threshold(threshold)?;
        Ok(RankStats {
            candidate_id: self.candidate_ids[i].clone(),
            expected_rank: self.expected_rank(i)?,
            entropy: self.rank_entropy(i)?,
            variance: self.rank_variance(i)?,
            support: self.support(i, threshold),
        })
    }

    pub fn all_stats(&self, threshold: f64) -> Result<Vec<RankStats>> {
        (0..self.n()).map(|i| self.stats(i, threshold)).collect()
    }

    pub fn mean_entropy(&self) -> f64 {
        let total: f64 = (0..self.n())
            .map(|i| self.rank_entropy(i).expect("index in range"))
            .sum();
        total / self.n() as f64
    }

    /// Candidate indices ordered by expected rank, then variance, then id.
    pub fn humble_order_indices(&self) -> Vec<usize> {
        let keys: Vec<(f64, f64)> = (0..self.n())
            .map(|i| {
                (
                    self.expected_rank(i).expect("index in range"),
                    self.rank_variance(i).expect("index in range"),
                )
            })
            .collect();
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| {
            keys[a]
                .0
                .total_cmp(&keys[b].0)
                .then(keys[a].1.total_cmp(&keys[b].1))
                .then_with(|| self.candidate_ids[a].cmp(&self.candidate_ids[b]))
        });
        order
    }

    /// The uncertainty-aware ordering: ascending expected rank.
    pub fn humble_order(&self) -> Vec<CandidateId> {
        self.humble_order_indices()
            .into_iter()
            .map(|i| self.candidate_ids[i].clone())
            .collect()
    }

    /// The `m` candidates with the greatest rank entropy, descending; ties by id.
    pub fn high_entropy_candidates(&self, m: usize) -> Result<Vec<CandidateId>> {
        if m == 0 || m > self.n() {
            return Err(Error::invalid(format!(
                "m must be in 1..={}, got {m}",
                self.n()
            )));
        }
        Ok(self
            .entropy_order_indices()
            .into_iter()
            .take(m)
            .map(|i| self.candidate_ids[i].clone())
            .collect())
    }

    /// All candidate indices by entropy descending, ties by id.
    pub fn entropy_order_indices(&self) -> Vec<usize> {
        let h: Vec<f64> = (0..self.n())
            .map(|i| self.rank_entropy(i).expect("index in range"))
            .collect();
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| {
            h[b].total_cmp(&h[a])
                .then_with(|| self.candidate_ids[a].cmp(&self.candidate_ids[b]))
        });
        order
    }
}

fn moments(row: &[(u32, u32)]) -> (u64, u64) {
    row.iter().fold((0u64, 0u64), |(s1, s2), &(rank, count)| {
        let (j, c) = (u64::from(rank), u64::from(count));
        (s1 + c * j, s2 + c * j * j)
    })
}

/// Shannon entropy (nats) of a probability vector, with `0 ln 0 = 0`.
pub fn entropy_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    h.max(0.0)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "threshold must be in [0, 1), got {threshold}"
        )))
    }
}

fn check_unique(ids: &[CandidateId]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::invalid(format!("duplicate candidate id {id}")));
        }
    }
    Ok(())
}

/// Estimate the rank set of `dists` from `draws` Monte Carlo draws.
pub fn estimate_rank_set(
    dists: &[EmpiricalScoreDistribution],
    draws: u32,
    seed: u64,
) -> Result<RankSet> {
    if dists.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 candidates, got {}",
            dists.len()
        )));
    }
    if draws == 0 {
        return Err(Error::invalid("draws must be positive"));
    }
    if let Some(d) = dists.iter().find(|d| d.samples.is_empty()) {
        return Err(Error::invalid(format!(
            "candidate {} has an empty score distribution",
            d.candidate_id
        )));
    }
    let ids: Vec<CandidateId> = dists.iter().map(|d| d.candidate_id.clone()).collect();
    check_unique(&ids)?;
    let n = dists.len();

    // picks[c][d]: which sample candidate c uses in draw d
    let picks: Vec<Vec<u32>> = dists
        .par_iter()
        .map(|d| {
            let s = d.samples.len();
            if s == 1 {
                return vec![0; draws as usize];
            }
            let mut rng = rng::stream(seed, "sample", d.candidate_id.as_str().as_bytes());
            (0..draws).map(|_| rng.random_range(0..s as u32)).collect()
        })
        .collect();

    // ranks of all candidates, one block of draws at a time, laid out [draw][candidate]
    let blocks: Vec<Vec<u32>> = (0..draws.div_ceil(DRAW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * DRAW_BLOCK;
            let hi = (lo + DRAW_BLOCK).min(draws);
            let mut ranks = vec![0u32; (hi - lo) as usize * n];
            let mut order: Vec<u32> = Vec::with_capacity(n);
            let mut drawn = vec![0.0f64; n];
            for (k, draw) in (lo..hi).enumerate() {
                for c in 0..n {
                    drawn[c] = dists[c].samples[picks[c][draw as usize] as usize];
                }
                rank_one_draw(&ids, &drawn, draw, seed, &mut order);
                let out = &mut ranks[k * n..(k + 1) * n];
                for (pos, &c) in order.iter().enumerate() {
                    out[c as usize] = pos as u32 + 1;
                }
            }
            ranks
        })
        .collect();
    drop(picks);

    let rows: Vec<Vec<(u32, u32)>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut taken: Vec<u32> = blocks
                .iter()
                .flat_map(|block| block.chunks_exact(n).map(move |ranks| ranks[c]))
                .collect();
            taken.sort_unstable();
            let mut row: Vec<(u32, u32)> = Vec::new();
            for rank in taken {
                match row.last_mut() {
                    Some((r, count)) if *r == rank => *count += 1,
                    _ => row.push((rank, 1)),
                }
            }
            row
        })
        .collect();

    Ok(RankSet {
        candidate_ids: ids,
        rows,
        draws,
        seed,
    })
}

/// Fill `order` with candidate indices sorted best-first for one draw.
fn rank_one_draw(ids: &[CandidateId], drawn: &[f64], draw: u32, seed: u64, order: &mut Vec<u32>) {
    let n = drawn.len();
    order.clear();
    order.extend(0..n as u32);
    order.sort_unstable_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        drawn[b]
            .partial_cmp(&drawn[a])
            .expect("samples are finite")
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    let mut ties = None;
    let mut start = 0;
    while start < n {
        let value = drawn[order[start] as usize];
        let mut end = start + 1;
        while end < n && drawn[order[end] as usize] == value {
            end += 1;
        }
        if end - start > 1 {
            let rng = ties.get_or_insert_with(|| rng::stream(seed, "ties", &draw.to_le_bytes()));
            order[start..end].shuffle(rng);
        }
        start = end;
    }
}
