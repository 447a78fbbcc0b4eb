//! Directory-backed store.
//!
//! ```text
//! <root>/pool.jsonl        candidate pool
//! <root>/jobs.jsonl        job requisitions
//! <root>/runs.jsonl        run index (one summary line per run)
//! <root>/runs/<id>.json    full screening runs
//! <root>/.lock             writer lock
//! ```
//!
//! Writers hold an exclusive lock on `.lock`. Every file is written to a
//! temporary sibling and renamed into place, so readers never observe a
//! partially written entity.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, not_found};
use crate::scoring::{CandidateProfile, JobSpec, JobStatus};
use crate::screening::{now_timestamp, RunStatus, ScreeningRun};

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Index line for one persisted run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub job_id: String,
    pub created_at: String,
    pub status: RunStatus,
    pub candidates: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct JobFilter {
    pub status: Option<JobStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSummary {
    pub id: String,
    pub title: String,
    pub status: JobStatus,
    pub created_at: Option<String>,
    /// Number of persisted runs for this job.
    pub runs: usize,
    /// Candidates ranked by the most recent complete run, if any.
    pub matches: Option<usize>,
    pub latest_run: Option<String>,
}

struct WriteLock {
    _file: File,
}

fn valid_run_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store> {
        let root = root.into();
        fs::create_dir_all(root.join("runs"))?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> Result<WriteLock> {
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.root.join(".lock"))?;
        file.lock()?;
        Ok(WriteLock { _file: file })
    }

    fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            write(&mut w)?;
            w.flush()?;
            w.get_ref().sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn read_optional(path: &Path) -> Result<Option<String>> {
        match fs::read_to_string(path) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Replace the stored pool.
    pub fn import_pool(&self, pool: &[CandidateProfile]) -> Result<()> {
        let _lock = self.lock()?;
        Self::write_atomic(&self.root.join("pool.jsonl"), |w| ingest::write_jsonl(pool, w))
    }

    /// Add or replace jobs by id. Jobs without a creation time get one now.
    pub fn import_jobs(&self, jobs: &[JobSpec]) -> Result<()> {
        let _lock = self.lock()?;
        let mut all = self.jobs()?;
        let now = now_timestamp();
        for job in jobs {
            let mut job = job.clone();
            job.created_at.get_or_insert_with(|| now.clone());
            match all.iter_mut().find(|j| j.id == job.id) {
                Some(slot) => *slot = job,
                None => all.push(job),
            }
        }
        Self::write_atomic(&self.root.join("jobs.jsonl"), |w| ingest::write_jsonl(&all, w))
    }

    /// The stored pool, empty if none was imported.
    pub fn pool(&self) -> Result<Vec<CandidateProfile>> {
        let path = self.root.join("pool.jsonl");
        match Self::read_optional(&path)? {
            Some(text) => Ok(ingest::parse_pool(&text, &path)?),
            None => Ok(Vec::new()),
        }
    }

    pub fn jobs(&self) -> Result<Vec<JobSpec>> {
        let path = self.root.join("jobs.jsonl");
        match Self::read_optional(&path)? {
            Some(text) if !text.trim().is_empty() => Ok(ingest::parse_jobs(&text, &path)?),
            _ => Ok(Vec::new()),
        }
    }

    pub fn job(&self, id: &str) -> Result<JobSpec> {
        self.jobs()?
            .into_iter()
            .find(|j| j.id == id)
            .ok_or_else(|| not_found("job", id))
    }

    fn run_path(&self, run_id: &str) -> PathBuf {
        self.root.join("runs").join(format!("{run_id}.json"))
    }

    /// Persist a finished run. Runs are immutable: saving an existing id fails.
    pub fn save_run(&self, run: &ScreeningRun) -> Result<()> {
        if !valid_run_id(&run.run_id) {
            return Err(Error::invalid(format!("invalid run id '{}'", run.run_id)));
        }
        match run.status {
            RunStatus::Pending => {
                return Err(Error::invalid("only complete or failed runs can be saved"))
            }
            RunStatus::Complete if run.results.is_none() => {
                return Err(Error::invalid("complete run without results"))
            }
            _ => {}
        }
        let _lock = self.lock()?;
        let path = self.run_path(&run.run_id);
        if path.exists() {
            return Err(Error::Conflict(format!("run '{}' already exists", run.run_id)));
        }
        Self::write_atomic(&path, |w| Ok(serde_json::to_writer(w, run)?))?;

        let mut index = self.run_index()?;
        index.push(RunSummary {
            run_id: run.run_id.clone(),
            job_id: run.job_id.clone(),
            created_at: run.created_at.clone(),
            status: run.status,
            candidates: run.results.as_ref().map_or(0, |r| r.candidates.len()),
        });
        Self::write_atomic(&self.root.join("runs.jsonl"), |w| ingest::write_jsonl(&index, w))
    }

    pub fn find_run(&self, run_id: &str) -> Result<Option<ScreeningRun>> {
        if !valid_run_id(run_id) {
            return Ok(None);
        }
        match Self::read_optional(&self.run_path(run_id))? {
            Some(text) => Ok(Some(serde_json::from_str(&text)?)),
            None => Ok(None),
        }
    }

    pub fn load_run(&self, run_id: &str) -> Result<ScreeningRun> {
        self.find_run(run_id)?
            .ok_or_else(|| not_found("run", run_id))
    }

    /// Summaries of all runs in the order they were saved.
    pub fn run_index(&self) -> Result<Vec<RunSummary>> {
        let text = Self::read_optional(&self.root.join("runs.jsonl"))?.unwrap_or_default();
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }

    /// Jobs matching `filter`, oldest first.
    pub fn list_jobs(&self, filter: &JobFilter) -> Result<Vec<JobSummary>> {
        let index = self.run_index()?;
        let mut per_job: HashMap<&str, Vec<&RunSummary>> = HashMap::new();
        for r in &index {
            per_job.entry(r.job_id.as_str()).or_default().push(r);
        }
        let mut jobs: Vec<JobSummary> = self
            .jobs()?
            .into_iter()
            .filter(|j| filter.status.is_none_or(|s| s == j.status))
            .map(|j| {
                let runs = per_job.get(j.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
                let latest = runs
                    .iter()
                    .filter(|r| r.status == RunStatus::Complete)
                    .max_by(|a, b| a.created_at.cmp(&b.created_at));
                JobSummary {
                    runs: runs.len(),
                    matches: latest.map(|r| r.candidates),
                    latest_run: latest.map(|r| r.run_id.clone()),
                    id: j.id,
                    title: j.title,
                    status: j.status,
                    created_at: j.created_at,
                }
            })
            .collect();
        jobs.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)));
        Ok(jobs)
    }
}
