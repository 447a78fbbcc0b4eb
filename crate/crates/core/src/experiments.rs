//! Synthetic noise sweep: how well do point-estimate rankings and
//! expected-rank rankings recover a known true ranking as scorer noise grows?

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::id::CandidateId;
use crate::metrics::{self, DEFAULT_PERSISTENCE};
use crate::rankset::{estimate_rank_set, EmpiricalScoreDistribution};
use crate::rng;
use crate::scoring::SyntheticOracle;

/// Ids `c1..cn`, zero-padded to the width of `n` so lexicographic order
/// matches numeric order.
pub fn truth_ids(n: usize) -> Vec<CandidateId> {
    let width = n.to_string().len();
    (1..=n)
        .map(|i| CandidateId::new(format!("c{i:0width$}")))
        .collect()
}

/// A pool whose true ranking is known.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub ids: Vec<CandidateId>,
    /// `scores[i]` belongs to `ids[i]`.
    pub scores: Vec<f64>,
    /// Ids by descending true score.
    pub ranking: Vec<CandidateId>,
}

/// `n` evenly spaced true scores on `[0, 1]`, best first.
pub fn generate_truth(n: usize) -> Result<Truth> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 candidates, got {n}")));
    }
    let ids = truth_ids(n);
    let step = (n - 1) as f64;
    let scores = (0..n).map(|i| (n - 1 - i) as f64 / step).collect();
    Ok(Truth {
        ranking: ids.clone(),
        ids,
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Deterministic,
    ExpectedRank,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Deterministic => "deterministic",
            Method::ExpectedRank => "expected-rank",
        })
    }
}

/// Per-trial knobs shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub samples: usize,
    pub draws: u32,
    pub depth: usize,
    pub persistence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rbo_deterministic: f64,
    pub rbo_expected: f64,
}

/// One paired trial. Every candidate gets `samples` noisy scores; the
/// deterministic ranking uses the first of them, the expected-rank ranking
/// uses all of them through a Monte Carlo rank set.
pub fn run_trial(truth: &Truth, sigma: f64, spec: &TrialSpec, seed: u64) -> Result<TrialOutcome> {
    if spec.samples == 0 {
        return Err(Error::invalid("samples per candidate must be positive"));
    }
    let mut oracle = SyntheticOracle::new(truth.ids.clone(), truth.scores.clone(), sigma, seed)?;
    let mut dists = Vec::with_capacity(truth.ids.len());
    let mut point = Vec::with_capacity(truth.ids.len());
    for (i, id) in truth.ids.iter().enumerate() {
        let samples = (0..spec.samples)
            .map(|_| oracle.evaluate(i))
            .collect::<Result<Vec<f64>>>()?;
        point.push(samples[0]);
        dists.push(EmpiricalScoreDistribution::new(id.clone(), samples)?);
    }

    let mut deterministic: Vec<usize> = (0..truth.ids.len()).collect();
    deterministic.sort_by(|&a, &b| {
        point[b]
            .total_cmp(&point[a])
            .then_with(|| truth.ids[a].cmp(&truth.ids[b]))
    });
    let deterministic: Vec<&CandidateId> = deterministic.iter().map(|&i| &truth.ids[i]).collect();

    let rs = estimate_rank_set(&dists, spec.draws, rng::derive_seed(seed, "rankset", &[]))?;
    let humble = rs.humble_order();
    let truth_refs: Vec<&CandidateId> = truth.ranking.iter().collect();
    let humble_refs: Vec<&CandidateId> = humble.iter().collect();
    Ok(TrialOutcome {
        rbo_deterministic: metrics::rbo(&truth_refs, &deterministic, spec.persistence, spec.depth)?,
        rbo_expected: metrics::rbo(&truth_refs, &humble_refs, spec.persistence, spec.depth)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSweepConfig {
    pub n_candidates: usize,
    /// Noise standard deviations in units of the true-score spread (which is 1).
    pub sigma_grid: Vec<f64>,
    pub trials: usize,
    pub samples_per_candidate: usize,
    pub draws: u32,
    /// RBO depth; `None` means the whole pool.
    pub depth: Option<usize>,
    pub persistence: f64,
    pub seed: u64,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        NoiseSweepConfig {
            n_candidates: 100,
            sigma_grid: vec![0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6],
            trials: 30,
            samples_per_candidate: 50,
            draws: 2000,
            depth: None,
            persistence: DEFAULT_PERSISTENCE,
            seed: 20240,
        }
    }
}

impl NoiseSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates < 2 {
            return Err(Error::invalid("n_candidates must be at least 2"));
        }
        if self.sigma_grid.is_empty() {
            return Err(Error::invalid("sigma_grid must not be empty"));
        }
        if self.sigma_grid.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("sigma_grid values must be finite and >= 0"));
        }
        if self.sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sigma_grid must be strictly ascending"));
        }
        if self.trials == 0 || self.samples_per_candidate == 0 || self.draws == 0 {
            return Err(Error::invalid(
                "trials, samples_per_candidate and draws must be positive",
            ));
        }
        if self.depth == Some(0) {
            return Err(Error::invalid("depth must be positive"));
        }
        if !(self.persistence > 0.0 && self.persistence < 1.0) {
            return Err(Error::invalid("persistence must be in (0, 1)"));
        }
        Ok(())
    }

    pub fn trial_spec(&self) -> TrialSpec {
        TrialSpec {
            samples: self.samples_per_candidate,
            draws: self.draws,
            depth: self.depth.unwrap_or(self.n_candidates),
            persistence: self.persistence,
        }
    }
}

/// Per-trial RBO values of one `(sigma, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub method: Method,
    pub rbo: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std: f64,
}

impl SweepCell {
    fn new(sigma: f64, method: Method, rbo: Vec<f64>) -> Self {
        let n = rbo.len() as f64;
        let mean = rbo.iter().sum::<f64>() / n;
        let std = if rbo.len() > 1 {
            (rbo.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        SweepCell {
            sigma,
            method,
            rbo,
            mean,
            std,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std / (self.rbo.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: NoiseSweepConfig,
    /// Sigma-major, deterministic before expected-rank.
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRow {
    pub sigma: f64,
    pub mean_deterministic: f64,
    pub mean_expected: f64,
    /// Fraction of paired trials where expected-rank strictly beats deterministic.
    pub paired_wins: f64,
}

impl DominanceRow {
    pub fn holds(&self) -> bool {
        self.mean_expected >= self.mean_deterministic
    }
}

impl SweepResult {
    pub fn cell(&self, sigma: f64, method: Method) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.sigma == sigma && c.method == method)
    }

    pub fn dominance(&self) -> Vec<DominanceRow> {
        self.config
            .sigma_grid
            .iter()
            .map(|&sigma| {
                let det = self.cell(sigma, Method::Deterministic).expect("complete grid");
                let exp = self.cell(sigma, Method::ExpectedRank).expect("complete grid");
                let wins = det
                    .rbo
                    .iter()
                    .zip(&exp.rbo)
                    .filter(|(d, e)| e > d)
                    .count();
                DominanceRow {
                    sigma,
                    mean_deterministic: det.mean,
                    mean_expected: exp.mean,
                    paired_wins: wins as f64 / det.rbo.len() as f64,
                }
            })
            .collect()
    }

    /// Expected-rank mean is at least the deterministic mean at every sigma > 0.
    pub fn dominates(&self) -> bool {
        self.dominance()
            .iter()
            .filter(|r| r.sigma > 0.0)
            .all(DominanceRow::holds)
    }

    /// Plot-ready `sigma,method,trial,rbo` rows.
    pub fn write_trials<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sigma", "method", "trial", "rbo"])?;
        for c in &self.cells {
            for (t, v) in c.rbo.iter().enumerate() {
                w.write_record([
                    c.sigma.to_string(),
                    c.method.to_string(),
                    t.to_string(),
                    v.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `sigma,method,mean,std` rows.
    pub fn write_summary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sigma", "method", "mean", "std"])?;
        for c in &self.cells {
            w.write_record([
                c.sigma.to_string(),
                c.method.to_string(),
                c.mean.to_string(),
                c.std.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run every `(sigma, trial)` pair. Trial seeds derive from the config seed,
/// the sigma index and the trial index, so cells can run in any order.
pub fn run_sweep(cfg: &NoiseSweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let truth = generate_truth(cfg.n_candidates)?;
    let spec = cfg.trial_spec();
    let jobs: Vec<(usize, usize)> = (0..cfg.sigma_grid.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(s, t)| {
            let mut key = [0u8; 16];
            key[..8].copy_from_slice(&(s as u64).to_le_bytes());
            key[8..].copy_from_slice(&(t as u64).to_le_bytes());
            let seed = rng::derive_seed(cfg.seed, "trial", &key);
            run_trial(&truth, cfg.sigma_grid[s], &spec, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(cfg.sigma_grid.len() * 2);
    for (s, chunk) in outcomes.chunks(cfg.trials).enumerate() {
        let sigma = cfg.sigma_grid[s];
        cells.push(SweepCell::new(
            sigma,
            Method::Deterministic,
            chunk.iter().map(|o| o.rbo_deterministic).collect(),
        ));
        cells.push(SweepCell::new(
            sigma,
            Method::ExpectedRank,
            chunk.iter().map(|o| o.rbo_expected).collect(),
        ));
    }
    Ok(SweepResult {
        config: cfg.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sigma_grid: Vec<f64>, trials: usize) -> NoiseSweepConfig {
        NoiseSweepConfig {
            n_candidates: 20,
            sigma_grid,
            trials,
            samples_per_candidate: 10,
            draws: 200,
            ..NoiseSweepConfig::default()
        }
    }

    #[test]
    fn truth_examples() {
        let t = generate_truth(3).unwrap();
        assert_eq!(t.scores, vec![1.0, 0.5, 0.0]);
        let ranking: Vec<&str> = t.ranking.iter().map(|c| c.as_str()).collect();
        assert_eq!(ranking, ["c1", "c2", "c3"]);
        assert_eq!(generate_truth(2).unwrap().scores, vec![1.0, 0.0]);
        assert!(generate_truth(1).is_err());

        let t = generate_truth(11).unwrap();
        for w in t.scores.windows(2) {
            assert!((w[0] - w[1] - 0.1).abs() < 1e-12);
        }
        assert_eq!(t.ids[0].as_str(), "c01");
    }

    #[test]
    fn zero_noise_recovers_truth() {
        let truth = generate_truth(30).unwrap();
        let spec = TrialSpec {
            samples: 5,
            draws: 100,
            depth: 30,
            persistence: 0.9,
        };
        let o = run_trial(&truth, 0.0, &spec, 4).unwrap();
        assert_eq!(o.rbo_deterministic, 1.0);
        assert_eq!(o.rbo_expected, 1.0);
    }

    #[test]
    fn huge_noise_randomizes() {
        let truth = generate_truth(200).unwrap();
        let spec = TrialSpec {
            samples: 3,
            draws: 50,
            depth: 200,
            persistence: 0.9,
        };
        let o = run_trial(&truth, 1e6, &spec, 4).unwrap();
        assert!(o.rbo_deterministic < 0.5);
        assert!(o.rbo_expected < 0.5);
    }

    #[test]
    fn sweep_zero_sigma_is_perfect() {
        let r = run_sweep(&small(vec![0.0], 3)).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert!(r.cells.iter().all(|c| c.rbo.iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn sweep_is_reproducible() {
        let cfg = small(vec![0.0, 0.3], 1);
        assert_eq!(run_sweep(&cfg).unwrap(), run_sweep(&cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(small(vec![], 1).validate().is_err());
        assert!(small(vec![0.2, 0.1], 1).validate().is_err());
        assert!(small(vec![-0.1], 1).validate().is_err());
        assert!(small(vec![0.0], 0).validate().is_err());
        let cfg: NoiseSweepConfig = serde_json::from_str(r#"{"trials": 5}"#).unwrap();
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.n_candidates, 100);
        assert!(serde_json::from_str::<NoiseSweepConfig>(r#"{"trails": 5}"#).is_err());
    }

    #[test]
    fn tables_have_expected_shape() {
        let r = run_sweep(&small(vec![0.0, 0.1], 2)).unwrap();
        let mut trials = Vec::new();
        r.write_trials(&mut trials).unwrap();
        assert_eq!(String::from_utf8(trials).unwrap().lines().count(), 1 + 2 * 2 * 2);
        let mut summary = Vec::new();
        r.write_summary(&mut summary).unwrap();
        let summary = String::from_utf8(summary).unwrap();
        assert_eq!(summary.lines().count(), 1 + 2 * 2);
        assert!(summary.starts_with("sigma,method,mean,std\n0,deterministic,1,0\n"));
    }
}
