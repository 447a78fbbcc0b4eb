use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

use humble_core::experiments::DominanceRow;
use humble_core::export::{export_run, write_triplets};
use humble_core::ingest::{detect_kind, ingest_jobs, ingest_pool, write_jsonl, FileKind};
use humble_core::metrics::{render_table, write_table};
use humble_core::synth::{sample_jobs, synthetic_pool};
use humble_core::{
    compose_shortlist, run_sweep, screen, ComparisonReport, Error, NoiseSweepConfig, RunParams,
    RunStatus, ShortlistEntry, Store,
};
use humble_service::ServiceConfig;

use crate::{Cli, Command, ExperimentArgs, Format, ScreenArgs, ServeArgs};

const DEFAULT_FIXTURE_SEED: u64 = 7;

pub fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Ingest { paths } => ingest(&cli, paths, &mut out)?,
        Command::Screen(args) => screen_cmd(&cli, args, &mut out)?,
        Command::Experiment(args) => experiment(&cli, args, &mut out)?,
        Command::ExportRankset {
            run_id,
            threshold,
            out: path,
        } => export_rankset(&cli, run_id, *threshold, path.as_deref(), &mut out)?,
        Command::Report { run_ids } => report(&cli, run_ids, &mut out)?,
        Command::Serve(args) => {
            drop(out);
            return serve(&cli, args);
        }
        Command::GenerateFixtures { candidates } => generate_fixtures(&cli, *candidates, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn open_store(cli: &Cli) -> Result<Store> {
    Store::open(&cli.store).with_context(|| format!("opening store {}", cli.store.display()))
}

fn ingest(cli: &Cli, paths: &[PathBuf], out: &mut impl Write) -> Result<ExitCode> {
    let mut pools = Vec::new();
    let mut jobs = Vec::new();
    let mut failed = false;
    for path in paths {
        let parsed = detect_kind(path).and_then(|kind| match kind {
            FileKind::Pool => ingest_pool(path).map(|p| {
                let n = p.len();
                pools.push(p);
                ("candidates", n)
            }),
            FileKind::Jobs => ingest_jobs(path).map(|j| {
                let n = j.len();
                jobs.extend(j);
                ("jobs", n)
            }),
        });
        match parsed {
            Ok((what, n)) => writeln!(out, "{}: {n} {what}", path.display())?,
            Err(Error::Ingest(e)) => {
                failed = true;
                eprintln!("{e}");
            }
            Err(e) => {
                failed = true;
                eprintln!("{}: {e}", path.display());
            }
        }
    }
    if failed {
        eprintln!("nothing imported");
        return Ok(ExitCode::FAILURE);
    }
    if pools.len() > 1 {
        bail!("more than one candidate pool given; a store holds one pool");
    }
    let store = open_store(cli)?;
    if let Some(pool) = pools.pop() {
        store.import_pool(&pool)?;
    }
    if !jobs.is_empty() {
        store.import_jobs(&jobs)?;
    }
    writeln!(out, "imported into {}", cli.store.display())?;
    Ok(ExitCode::SUCCESS)
}

fn screen_cmd(cli: &Cli, args: &ScreenArgs, out: &mut impl Write) -> Result<ExitCode> {
    let params = RunParams {
        samples: args.samples,
        mask_prob: args.mask_prob,
        draws: args.draws,
        threshold: args.threshold,
        k: args.k,
        entropy_proportion: args.rho,
        seed: cli.seed.unwrap_or(0),
        ..RunParams::default()
    };
    let store = open_store(cli)?;
    let run = screen(&store, &args.job_id, &params)?;
    if run.status == RunStatus::Failed {
        bail!(
            "run {} failed: {}",
            run.run_id,
            run.error.as_deref().unwrap_or("unknown error")
        );
    }
    let shortlist = compose_shortlist(&run, args.k, args.humble, args.rho)?;
    let report = &run.results()?.report;
    match cli.format {
        Format::Table => {
            writeln!(out, "run {}", run.run_id)?;
            writeln!(out, "job {}  {}", run.job_id, report.job_title)?;
            writeln!(out)?;
            let title = if args.humble { "exploit" } else { "top-k" };
            write_entries(out, title, &shortlist.exploit, args.humble)?;
            if args.humble {
                writeln!(out)?;
                write_entries(out, "explore", &shortlist.explore, true)?;
            }
            writeln!(out)?;
            write!(out, "{}", render_table(std::slice::from_ref(report)))?;
        }
        Format::Delimited => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "section",
                "position",
                "candidate_id",
                "label",
                "score",
                "deterministic_rank",
                "humble_rank",
                "expected_rank",
                "entropy",
                "variance",
            ])?;
            let sections = [("exploit", &shortlist.exploit), ("explore", &shortlist.explore)];
            for (section, entries) in sections {
                for (i, e) in entries.iter().enumerate() {
                    let u = e.uncertainty.as_ref();
                    let opt = |f: fn(&humble_core::shortlist::EntryUncertainty) -> String| {
                        u.map(f).unwrap_or_default()
                    };
                    w.write_record([
                        section.to_string(),
                        (i + 1).to_string(),
                        e.candidate_id.to_string(),
                        e.label.clone(),
                        e.score.to_string(),
                        e.deterministic_rank.to_string(),
                        opt(|u| u.humble_rank.to_string()),
                        opt(|u| u.expected_rank.to_string()),
                        opt(|u| u.entropy.to_string()),
                        opt(|u| u.variance.to_string()),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_entries(out: &mut impl Write, title: &str, entries: &[ShortlistEntry], humble: bool) -> Result<()> {
    writeln!(out, "{title} ({})", entries.len())?;
    if entries.is_empty() {
        return Ok(());
    }
    let id_w = entries
        .iter()
        .map(|e| e.candidate_id.as_str().len())
        .chain([9])
        .max()
        .unwrap_or(9);
    let label_w = entries
        .iter()
        .map(|e| e.label.chars().count())
        .chain([5])
        .max()
        .unwrap_or(5);
    let mut header = format!("{:>4}  {:<id_w$}  {:<label_w$}  {:>7}  {:>8}", "#", "candidate", "label", "score", "det_rank");
    if humble {
        header.push_str(&format!("  {:>8}  {:>7}  {:>10}", "exp_rank", "entropy", "variance"));
    }
    writeln!(out, "{header}")?;
    for (i, e) in entries.iter().enumerate() {
        let mut line = format!(
            "{:>4}  {:<id_w$}  {:<label_w$}  {:>7.4}  {:>8}",
            i + 1,
            e.candidate_id.as_str(),
            e.label,
            e.score,
            e.deterministic_rank
        );
        if let Some(u) = &e.uncertainty {
            write!(line, "  {:>8.2}  {:>7.3}  {:>10.2}", u.expected_rank, u.entropy, u.variance)?;
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn experiment(cli: &Cli, args: &ExperimentArgs, out: &mut impl Write) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<NoiseSweepConfig>(&text)
                .with_context(|| format!("invalid config {}", path.display()))?
        }
        None => NoiseSweepConfig::default(),
    };
    if let Some(v) = args.candidates {
        cfg.n_candidates = v;
    }
    if let Some(v) = &args.sigma_grid {
        cfg.sigma_grid = v.clone();
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.samples {
        cfg.samples_per_candidate = v;
    }
    if let Some(v) = args.draws {
        cfg.draws = v;
    }
    if args.depth.is_some() {
        cfg.depth = args.depth;
    }
    if let Some(v) = args.persistence {
        cfg.persistence = v;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let result = run_sweep(&cfg)?;
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("sweep"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let trials_path = dir.join("trials.csv");
    let summary_path = dir.join("summary.csv");
    result.write_trials(BufWriter::new(File::create(&trials_path)?))?;
    result.write_summary(BufWriter::new(File::create(&summary_path)?))?;

    let rows = result.dominance();
    match cli.format {
        Format::Table => {
            writeln!(
                out,
                "{:>6}  {:>15}  {:>15}  {:>11}  holds",
                "sigma", "deterministic", "expected-rank", "paired wins"
            )?;
            for r in &rows {
                let det = result
                    .cell(r.sigma, humble_core::Method::Deterministic)
                    .map(|c| c.std)
                    .unwrap_or_default();
                let exp = result
                    .cell(r.sigma, humble_core::Method::ExpectedRank)
                    .map(|c| c.std)
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{:>6}  {:>7.4} ± {:<5.3}  {:>7.4} ± {:<5.3}  {:>10.1}%  {}",
                    r.sigma,
                    r.mean_deterministic,
                    det,
                    r.mean_expected,
                    exp,
                    100.0 * r.paired_wins,
                    if r.holds() { "yes" } else { "no" }
                )?;
            }
        }
        Format::Delimited => result.write_summary(&mut *out)?,
    }
    writeln!(out, "{}", verdict(&rows))?;
    writeln!(out, "wrote {} and {}", trials_path.display(), summary_path.display())?;
    Ok(ExitCode::SUCCESS)
}

fn verdict(rows: &[DominanceRow]) -> String {
    let failing: Vec<String> = rows
        .iter()
        .filter(|r| r.sigma > 0.0 && !r.holds())
        .map(|r| r.sigma.to_string())
        .collect();
    if failing.is_empty() {
        "dominance: holds (expected-rank mean >= deterministic mean at every sigma > 0)".to_string()
    } else {
        format!("dominance: violated at sigma {}", failing.join(", "))
    }
}

fn export_rankset(
    cli: &Cli,
    run_id: &str,
    threshold: Option<f64>,
    path: Option<&Path>,
    out: &mut impl Write,
) -> Result<ExitCode> {
    let store = open_store(cli)?;
    let run = store.load_run(run_id)?;
    let export = export_run(&run, threshold.unwrap_or(run.params.threshold))?;
    match path {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_triplets(&export.triplets, &mut w)?;
            w.flush()?;
            writeln!(out, "{}: {} rows", path.display(), export.triplets.len())?;
        }
        None => write_triplets(&export.triplets, out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn report(cli: &Cli, run_ids: &[String], out: &mut impl Write) -> Result<ExitCode> {
    let store = open_store(cli)?;
    let ids: Vec<String> = if run_ids.is_empty() {
        let jobs = store.list_jobs(&Default::default())?;
        jobs.into_iter().filter_map(|j| j.latest_run).collect()
    } else {
        run_ids.to_vec()
    };
    let mut reports: Vec<ComparisonReport> = Vec::with_capacity(ids.len());
    for id in &ids {
        reports.push(store.load_run(id)?.results()?.report.clone());
    }
    match cli.format {
        Format::Table => write!(out, "{}", render_table(&reports))?,
        Format::Delimited => write_table(&reports, out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<ExitCode> {
    let defaults = RunParams {
        samples: args.samples,
        draws: args.draws,
        mask_prob: args.mask_prob,
        seed: cli.seed.unwrap_or(0),
        ..RunParams::default()
    };
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("invalid listen address {}:{}", args.host, args.port))?;
    let config = ServiceConfig {
        store_dir: cli.store.clone(),
        defaults,
        static_dir: args.static_dir.clone(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("serving {} on http://{addr}", cli.store.display());
    runtime.block_on(humble_service::serve(addr, config))?;
    Ok(ExitCode::SUCCESS)
}

fn generate_fixtures(cli: &Cli, candidates: usize, out: &mut impl Write) -> Result<ExitCode> {
    if candidates < 2 {
        bail!("a pool needs at least 2 candidates");
    }
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let pool = synthetic_pool(candidates, cli.seed.unwrap_or(DEFAULT_FIXTURE_SEED));
    let jobs = sample_jobs();
    let pool_path = dir.join("pool.jsonl");
    let jobs_path = dir.join("jobs.jsonl");
    write_jsonl(&pool, BufWriter::new(File::create(&pool_path)?))?;
    write_jsonl(&jobs, BufWriter::new(File::create(&jobs_path)?))?;
    writeln!(out, "{}: {} candidates", pool_path.display(), pool.len())?;
    writeln!(out, "{}: {} jobs", jobs_path.display(), jobs.len())?;
    Ok(ExitCode::SUCCESS)
}
