//! Ranking comparison: rank-biased overlap, top-k Jaccard similarity and the
//! deterministic-vs-expected-rank comparison report.

use std::collections::HashSet;
use std::hash::Hash;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::rankset::RankSet;

pub const DEFAULT_PERSISTENCE: f64 = 0.9;

fn check_distinct<T: Eq + Hash>(list: &[T]) -> Result<()> {
    let mut seen = HashSet::with_capacity(list.len());
    if list.iter().all(|x| seen.insert(x)) {
        Ok(())
    } else {
        Err(Error::invalid("ranked lists must not contain duplicates"))
    }
}

/// Truncated rank-biased overlap, normalized so that identical prefixes score
/// exactly 1:
///
/// `sum_{t=1..d} p^(t-1) * |A_t ∩ B_t| / t  /  sum_{t=1..d} p^(t-1)`
///
/// The effective depth is `min(depth, max(|a|, |b|))`; past the end of a list
/// its prefix is the whole list.
pub fn rbo<T: Eq + Hash>(a: &[T], b: &[T], persistence: f64, depth: usize) -> Result<f64> {
    if !(persistence > 0.0 && persistence < 1.0) {
        return Err(Error::invalid(format!(
            "persistence must be in (0, 1), got {persistence}"
        )));
    }
    if depth == 0 {
        return Err(Error::invalid("depth must be positive"));
    }
    check_distinct(a)?;
    check_distinct(b)?;
    let depth = depth.min(a.len().max(b.len()));
    if depth == 0 {
        // two empty lists
        return Ok(1.0);
    }

    let mut seen_a: HashSet<&T> = HashSet::with_capacity(depth);
    let mut seen_b: HashSet<&T> = HashSet::with_capacity(depth);
    let mut overlap = 0usize;
    let mut weight = 1.0;
    let (mut num, mut den) = (0.0, 0.0);
    for t in 1..=depth {
        let x = a.get(t - 1);
        let y = b.get(t - 1);
        match (x, y) {
            (Some(x), Some(y)) if x == y => overlap += 1,
            _ => {
                overlap += usize::from(x.is_some_and(|x| seen_b.contains(x)));
                overlap += usize::from(y.is_some_and(|y| seen_a.contains(y)));
            }
        }
        if let Some(x) = x {
            seen_a.insert(x);
        }
        if let Some(y) = y {
            seen_b.insert(y);
        }
        num += weight * (overlap as f64 / t as f64);
        den += weight;
        weight *= persistence;
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// `|top_k(a) ∩ top_k(b)| / |top_k(a) ∪ top_k(b)|`.
pub fn jaccard_topk<T: Eq + Hash>(a: &[T], b: &[T], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    check_distinct(a)?;
    check_distinct(b)?;
    let top_a: HashSet<&T> = a.iter().take(k).collect();
    let top_b: HashSet<&T> = b.iter().take(k).collect();
    let union = top_a.union(&top_b).count();
    if union == 0 {
        return Ok(1.0);
    }
    Ok(top_a.intersection(&top_b).count() as f64 / union as f64)
}

/// How far the point-estimate ranking and the expected-rank ranking agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub job_id: String,
    pub job_title: String,
    pub k: usize,
    pub jaccard: f64,
    pub rbo: f64,
    /// Mean rank entropy over the whole pool, in nats.
    pub mean_entropy: f64,
    pub deterministic_top: Vec<CandidateId>,
    pub humble_top: Vec<CandidateId>,
}

impl ComparisonReport {
    /// One row in the `title  similarity  rbo  entropy` layout, three decimals.
    pub fn row(&self) -> String {
        format!(
            "{}  {:.3}  {:.3}  {:.3}",
            self.job_title, self.jaccard, self.rbo, self.mean_entropy
        )
    }
}

/// Compare `deterministic_order` with the expected-rank order of `rs` at depth `k`.
pub fn compare(
    rs: &RankSet,
    deterministic_order: &[CandidateId],
    k: usize,
    persistence: f64,
    job_id: &str,
    job_title: &str,
) -> Result<ComparisonReport> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let pool: HashSet<&CandidateId> = rs.candidate_ids().iter().collect();
    let given: HashSet<&CandidateId> = deterministic_order.iter().collect();
    if deterministic_order.len() != rs.n() || given != pool {
        return Err(Error::invalid(
            "deterministic order does not cover the rank-set pool",
        ));
    }
    let humble = rs.humble_order();
    let depth = k.min(rs.n());
    Ok(ComparisonReport {
        job_id: job_id.to_owned(),
        job_title: job_title.to_owned(),
        k,
        jaccard: jaccard_topk(deterministic_order, &humble, depth)?,
        rbo: rbo(deterministic_order, &humble, persistence, depth)?,
        mean_entropy: rs.mean_entropy(),
        deterministic_top: deterministic_order[..depth].to_vec(),
        humble_top: humble[..depth].to_vec(),
    })
}

/// Aligned text table with a header, one row per report.
pub fn render_table(reports: &[ComparisonReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.job_title.chars().count())
        .chain(std::iter::once("Job Title".len()))
        .max()
        .unwrap_or(0);
    let mut out = format!(
        "{:<width$}  {:>10}  {:>5}  {:>12}\n",
        "Job Title", "Similarity", "RBO", "Mean Entropy"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:>10.3}  {:>5.3}  {:>12.3}\n",
            r.job_title, r.jaccard, r.rbo, r.mean_entropy
        ));
    }
    out
}

/// Delimited export: `job_title,similarity,rbo,mean_entropy`.
pub fn write_table<W: Write>(reports: &[ComparisonReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["job_title", "similarity", "rbo", "mean_entropy"])?;
    for r in reports {
        w.write_record([
            r.job_title.clone(),
            format!("{:.3}", r.jaccard),
            format!("{:.3}", r.rbo),
            format!("{:.3}", r.mean_entropy),
        ])?;
    }
    w.flush()?;
    Ok(())
}
