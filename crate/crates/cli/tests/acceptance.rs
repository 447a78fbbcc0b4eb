//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit
//! if any criterion fails. Run with `cargo test -p humble-cli --test acceptance`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use humble_core::experiments::truth_ids;
use humble_core::ingest::ingest_pool;
use humble_core::metrics::render_table;
use humble_core::synth::sample_jobs;
use humble_core::{
    compose_shortlist, estimate_rank_set, jaccard_topk, rbo, run_sweep, screen, screen_pool,
    synthetic_oracle, CandidateProfile, EmpiricalScoreDistribution, Method, NoiseSweepConfig,
    RankSet, RunParams, ScreeningRun, Store,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_store(dir: &Path) -> Store {
    let store = Store::open(dir).unwrap();
    let pool = ingest_pool(&fixtures().join("pool.jsonl")).unwrap();
    let jobs = humble_core::ingest::ingest_jobs(&fixtures().join("jobs.jsonl")).unwrap();
    store.import_pool(&pool).unwrap();
    store.import_jobs(&jobs).unwrap();
    store
}

// --- oracle equivalence -------------------------------------------------

/// Exact rank probabilities by enumerating every combination of equiprobable
/// samples; members of a tie group share the group's positions uniformly.
fn enumerate(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = samples.len();
    let total: usize = samples.iter().map(Vec::len).product();
    let mut p = vec![vec![0.0; n]; n];
    for code in 0..total {
        let mut c = code;
        let scores: Vec<f64> = samples
            .iter()
            .map(|s| {
                let v = s[c % s.len()];
                c /= s.len();
                v
            })
            .collect();
        for i in 0..n {
            let above = scores.iter().filter(|&&z| z > scores[i]).count();
            let tied = scores.iter().filter(|&&z| z == scores[i]).count();
            for slot in &mut p[i][above..above + tied] {
                *slot += 1.0 / (total * tied) as f64;
            }
        }
    }
    p
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut instances: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![1.0, 3.0], vec![2.0], vec![0.0]],
        vec![vec![5.0], vec![5.0]],
        vec![vec![1.0]; 4],
        vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..120 {
        let n = rng.random_range(2..=4);
        instances.push(
            (0..n)
                .map(|_| {
                    let s = rng.random_range(1..=3);
                    (0..s).map(|_| f64::from(rng.random_range(0..5u8)) * 0.25).collect()
                })
                .collect(),
        );
    }
    let mut worst = 0.0f64;
    for (case, samples) in instances.iter().enumerate() {
        let dists: Vec<_> = samples
            .iter()
            .enumerate()
            .map(|(i, s)| EmpiricalScoreDistribution::new(format!("c{i}"), s.clone()).unwrap())
            .collect();
        let rs = estimate_rank_set(&dists, 100_000, case as u64).map_err(|e| e.to_string())?;
        let exact = enumerate(samples);
        for (i, row) in rs.dense().iter().enumerate() {
            let tv: f64 = row.iter().zip(&exact[i]).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            worst = worst.max(tv);
            ensure(tv < 0.02, || format!("instance {case} row {i}: tv {tv:.4} for {samples:?}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("{} instances, max tv {worst:.4}, {elapsed:.2?}", instances.len()))
}

// --- doubly stochastic + slot rule on the fixture run --------------------

fn fixture_run() -> Result<(tempfile::TempDir, ScreeningRun, Duration), String> {
    let dir = tempfile::tempdir().unwrap();
    let store = fixture_store(dir.path());
    let params = RunParams {
        draws: 10_000,
        samples: 100,
        ..RunParams::default()
    };
    let start = Instant::now();
    let run = screen(&store, "j14", &params).map_err(|e| e.to_string())?;
    Ok((dir, run, start.elapsed()))
}

fn doubly_stochastic(run: &ScreeningRun, elapsed: Duration) -> Check {
    let rs: &RankSet = &run.results().map_err(|e| e.to_string())?.rank_set;
    ensure(rs.n() == 1000, || format!("pool has {} candidates", rs.n()))?;
    let dense = rs.dense();
    let mut worst = 0.0f64;
    for (i, row) in dense.iter().enumerate() {
        let dev = (row.iter().sum::<f64>() - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("row {i} off by {dev:e}"))?;
    }
    for j in 0..rs.n() {
        let dev = (dense.iter().map(|r| r[j]).sum::<f64>() - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("column {j} off by {dev:e}"))?;
    }
    let total: f64 = (0..rs.n()).map(|i| rs.expected_rank(i).unwrap()).sum();
    ensure((total - 500_500.0).abs() <= 1e-3, || format!("sum of expected ranks {total}"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("max deviation {worst:e}, sum E[rank] {total}, {elapsed:.2?}"))
}

fn slot_rule(run: &ScreeningRun) -> Check {
    for (rho, explore, exploit) in [(0.0, 0, 50), (0.2, 10, 40), (1.0, 50, 0)] {
        let s = compose_shortlist(run, 50, true, rho).map_err(|e| e.to_string())?;
        ensure(s.explore.len() == explore && s.exploit.len() == exploit, || {
            format!("rho {rho}: explore {} exploit {}", s.explore.len(), s.exploit.len())
        })?;
        let a: HashSet<_> = s.exploit.iter().map(|e| &e.candidate_id).collect();
        ensure(s.explore.iter().all(|e| !a.contains(&e.candidate_id)), || {
            format!("rho {rho}: sections overlap")
        })?;
    }
    Ok("k=50: rho 0/0.2/1 -> explore 0/10/50, exploit 50/40/0, disjoint".into())
}

// --- synthetic dominance -----------------------------------------------

fn dominance() -> Check {
    let cfg = NoiseSweepConfig::default();
    let start = Instant::now();
    let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for method in [Method::Deterministic, Method::ExpectedRank] {
        let cell = result.cell(0.0, method).ok_or("missing sigma 0 cell")?;
        ensure(cell.rbo.iter().all(|&v| v == 1.0), || format!("{method} below 1.0 at sigma 0"))?;
    }
    let rows = result.dominance();
    for r in rows.iter().filter(|r| r.sigma > 0.0) {
        ensure(r.holds(), || {
            format!(
                "sigma {}: expected-rank {:.4} < deterministic {:.4}",
                r.sigma, r.mean_expected, r.mean_deterministic
            )
        })?;
    }
    let mid = &rows[rows.len() / 2];
    ensure(mid.paired_wins >= 0.7, || {
        format!("paired wins at sigma {} only {:.0}%", mid.sigma, 100.0 * mid.paired_wins)
    })?;
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!(
        "{} sigmas x {} trials, mid sigma {} wins {:.0}%, {elapsed:.2?}",
        cfg.sigma_grid.len(),
        cfg.trials,
        mid.sigma,
        100.0 * mid.paired_wins
    ))
}

// --- metric hand cases --------------------------------------------------

fn metric_hand_cases() -> Check {
    let a = ["a", "b", "c"];
    let same = rbo(&a, &a, 0.9, 3).map_err(|e| e.to_string())?;
    ensure(same == 1.0, || format!("rbo(identical) = {same}"))?;
    let disjoint = rbo(&a, &["x", "y", "z"], 0.9, 3).map_err(|e| e.to_string())?;
    ensure(disjoint == 0.0, || format!("rbo(disjoint) = {disjoint}"))?;

    // by hand: overlaps 1/1, 1/2, 3/3 weighted by 1, 0.9, 0.81
    let expected = (1.0 + 0.9 * 0.5 + 0.81 * 1.0) / (1.0 + 0.9 + 0.81);
    let swapped = rbo(&a, &["a", "c", "b"], 0.9, 3).map_err(|e| e.to_string())?;
    ensure((swapped - 0.8339).abs() <= 1e-4 && (swapped - expected).abs() < 1e-12, || {
        format!("rbo([a,b,c],[a,c,b]) = {swapped}")
    })?;

    let x: Vec<u32> = (1..=50).collect();
    let y: Vec<u32> = (26..=75).collect();
    let j = jaccard_topk(&x, &y, 50).map_err(|e| e.to_string())?;
    ensure(j == 1.0 / 3.0, || format!("jaccard = {j}"))?;
    Ok(format!("rbo 1, 0, {swapped:.4}; jaccard {j}"))
}

// --- entropy / variance analytics ----------------------------------------

fn entropy_variance(fixture: &ScreeningRun) -> Check {
    // Latin square over 4 draws: every candidate takes every rank once.
    let ids = (1..=4).map(|i| format!("u{i}").into()).collect();
    let uniform = RankSet::from_counts(ids, &vec![vec![1; 4]; 4], 4, 0).map_err(|e| e.to_string())?;
    let h = uniform.rank_entropy(0).unwrap();
    ensure((h - 4f64.ln()).abs() <= 1e-12, || format!("uniform entropy {h}"))?;

    let ids = (1..=3).map(|i| format!("d{i}").into()).collect();
    let counts = vec![vec![7, 0, 0], vec![0, 7, 0], vec![0, 0, 7]];
    let degenerate = RankSet::from_counts(ids, &counts, 7, 0).map_err(|e| e.to_string())?;
    for i in 0..3 {
        let (h, v) = (degenerate.rank_entropy(i).unwrap(), degenerate.rank_variance(i).unwrap());
        ensure(h == 0.0 && v == 0.0, || format!("degenerate row {i}: entropy {h}, variance {v}"))?;
    }

    let rs = &fixture.results().map_err(|e| e.to_string())?.rank_set;
    let bound = (rs.n() as f64).ln();
    let max = (0..rs.n()).map(|i| rs.rank_entropy(i).unwrap()).fold(0.0, f64::max);
    ensure(max <= bound, || format!("entropy {max} exceeds ln n = {bound}"))?;
    Ok(format!("uniform {h:.15} = ln 4; degenerate 0/0; fixture max {max:.3} <= {bound:.3}"))
}

// --- report format ---------------------------------------------------------

fn report_format() -> Check {
    let pool: Vec<CandidateProfile> = truth_ids(12)
        .into_iter()
        .map(|id| CandidateProfile::new(id, BTreeMap::from([("sql".to_string(), 0.5)])))
        .collect();
    let truth: Vec<f64> = (0..12).map(|i| 1.0 - f64::from(i) / 12.0).collect();
    let mut oracle = synthetic_oracle(truth, 0.0, 3).map_err(|e| e.to_string())?;
    let job = sample_jobs().into_iter().find(|j| j.id == "j14").unwrap();
    let params = RunParams {
        k: 10,
        draws: 1000,
        samples: 20,
        ..RunParams::default()
    };
    let results = screen_pool(&job, &pool, &params, &mut oracle).map_err(|e| e.to_string())?;
    let row = results.report.row();
    ensure(row == "Data Engineer  1.000  1.000  0.000", || format!("row {row:?}"))?;

    let table = render_table(std::slice::from_ref(&results.report));
    let lines: Vec<&str> = table.lines().collect();
    ensure(lines.len() == 2, || format!("table {table:?}"))?;
    let cols: Vec<&str> = lines[1].split_whitespace().collect();
    ensure(cols[cols.len() - 3..] == ["1.000", "1.000", "0.000"], || format!("table {table:?}"))?;
    Ok(format!("{row:?}"))
}

// --- CLI determinism -------------------------------------------------------

fn cli_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_humble");
    let run = |store: &Path, args: &[&str]| {
        let o = Command::new(bin)
            .arg("--store")
            .arg(store)
            .args(args)
            .env_remove("HUMBLE_STORE")
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.success() {
            Ok(o.stdout)
        } else {
            Err(String::from_utf8_lossy(&o.stderr).into_owned())
        }
    };
    let pool = fixtures().join("pool.jsonl");
    let jobs = fixtures().join("jobs.jsonl");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let store = dir.path().join(name);
        run(&store, &["ingest", pool.to_str().unwrap(), jobs.to_str().unwrap()])?;
        // a fresh store per run, then a repeat on the same store
        outputs.push(run(&store, &["--seed", "42", "screen", "j01"])?);
        outputs.push(run(&store, &["--seed", "42", "screen", "j01"])?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "screen output differs between runs".into())?;
    let text = String::from_utf8_lossy(&outputs[0]);
    ensure(text.contains("exploit (40)") && text.contains("explore (10)"), || format!("unexpected output:\n{text}"))?;
    Ok(format!("4 runs, {} identical bytes", outputs[0].len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Check)> = Vec::new();
    results.push(("oracle equivalence", oracle_equivalence()));
    match fixture_run() {
        Ok((_dir, run, elapsed)) => {
            results.push(("doubly stochastic (1000 candidates)", doubly_stochastic(&run, elapsed)));
            results.push(("entropy/variance analytics", entropy_variance(&run)));
            results.push(("shortlist slot rule", slot_rule(&run)));
        }
        Err(e) => {
            for name in ["doubly stochastic (1000 candidates)", "entropy/variance analytics", "shortlist slot rule"] {
                results.push((name, Err(format!("fixture run failed: {e}"))));
            }
        }
    }
    results.push(("synthetic dominance", dominance()));
    results.push(("metric hand cases", metric_hand_cases()));
    results.push(("report format", report_format()));
    results.push(("cli screen determinism", cli_determinism()));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
