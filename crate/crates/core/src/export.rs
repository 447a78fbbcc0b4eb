//! Triplet export of a sparsified rank set: `candidate_id,rank,probability`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::id::CandidateId;
use crate::rankset::{RankSet, RankStats};
use crate::screening::ScreeningRun;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub candidate_id: CandidateId,
    pub rank: u32,
    pub probability: f64,
}

/// Retained `(candidate, rank, probability)` entries, candidates in rank-set
/// order and ranks ascending within a candidate.
pub fn triplets(rs: &RankSet, threshold: f64) -> Result<Vec<Triplet>> {
    let sparse = rs.sparsify(threshold)?;
    Ok(rs
        .candidate_ids()
        .iter()
        .zip(sparse)
        .flat_map(|(id, row)| {
            row.into_iter().map(move |rp| Triplet {
                candidate_id: id.clone(),
                rank: rp.rank,
                probability: rp.probability,
            })
        })
        .collect())
}

/// Rank-set data of a run at a given support threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSetExport {
    pub run_id: String,
    pub threshold: f64,
    pub draws: u32,
    pub triplets: Vec<Triplet>,
    /// Supports are cut at `threshold`; the statistics use the full rows.
    pub stats: Vec<RankStats>,
}

pub fn export_run(run: &ScreeningRun, threshold: f64) -> Result<RankSetExport> {
    let rs = &run.results()?.rank_set;
    Ok(RankSetExport {
        run_id: run.run_id.clone(),
        threshold,
        draws: rs.draws(),
        triplets: triplets(rs, threshold)?,
        stats: rs.all_stats(threshold)?,
    })
}

pub fn write_triplets<W: Write>(triplets: &[Triplet], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(["candidate_id", "rank", "probability"])?;
    for t in triplets {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_triplets<R: Read>(input: R) -> Result<Vec<Triplet>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let ids = vec![CandidateId::from("a"), CandidateId::from("b")];
        let rs = RankSet::from_counts(ids, &[vec![3, 1], vec![1, 3]], 4, 0).unwrap();
        let t = triplets(&rs, 0.3).unwrap();
        let mut buf = Vec::new();
        write_triplets(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "candidate_id,rank,probability\na,1,0.75\nb,2,0.75\n"
        );
        assert_eq!(read_triplets(buf.as_slice()).unwrap(), t);
    }
}
