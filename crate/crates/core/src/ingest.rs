//! Line-delimited JSON pool and job files.
//!
//! Pool record: `{"id": "c0001", "label": "...", "features": {"sql": 0.8, ...}}`
//! Job record: `{"id": "j01", "title": "...", "description": "...",
//! "requirements": {"sql": 2.0, ...}, "status": "open", "created_at": "..."}`
//!
//! Blank lines are ignored. Validation collects every offending line before
//! failing.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, IngestError, LineIssue, Result};
use crate::scoring::{CandidateProfile, JobSpec, JobStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Pool,
    Jobs,
}

fn parse_lines<T: DeserializeOwned>(text: &str, issues: &mut Vec<LineIssue>) -> Vec<(usize, T)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(line) {
            Ok(rec) => out.push((i + 1, rec)),
            Err(e) => issues.push(LineIssue {
                line: i + 1,
                message: format!("parse error: {e}"),
            }),
        }
    }
    out
}

fn check_unique_id(
    seen: &mut HashMap<String, usize>,
    id: &str,
    line: usize,
    what: &str,
    issues: &mut Vec<LineIssue>,
) {
    if id.trim().is_empty() {
        issues.push(LineIssue {
            line,
            message: format!("{what} id is empty"),
        });
    } else if let Some(first) = seen.get(id) {
        issues.push(LineIssue {
            line,
            message: format!("duplicate {what} id '{id}' (first seen on line {first})"),
        });
    } else {
        seen.insert(id.to_owned(), line);
    }
}

/// Parse and validate a candidate pool.
pub fn parse_pool(text: &str, path: &Path) -> Result<Vec<CandidateProfile>, IngestError> {
    let mut issues = Vec::new();
    let records: Vec<(usize, CandidateProfile)> = parse_lines(text, &mut issues);
    if records.is_empty() && issues.is_empty() {
        issues.push(LineIssue {
            line: 0,
            message: "empty pool".into(),
        });
    }
    let mut seen = HashMap::new();
    for (line, c) in &records {
        check_unique_id(&mut seen, c.id.as_str(), *line, "candidate", &mut issues);
        if c.features.is_empty() {
            issues.push(LineIssue {
                line: *line,
                message: format!("candidate '{}' has no features", c.id),
            });
        }
        for (name, v) in &c.features {
            if !(v.is_finite() && (0.0..=1.0).contains(v)) {
                issues.push(LineIssue {
                    line: *line,
                    message: format!("feature '{name}' = {v} outside [0, 1]"),
                });
            }
        }
    }
    finish(records, issues, path)
}

/// Parse and validate a job file.
pub fn parse_jobs(text: &str, path: &Path) -> Result<Vec<JobSpec>, IngestError> {
    let mut issues = Vec::new();
    let records: Vec<(usize, JobSpec)> = parse_lines(text, &mut issues);
    if records.is_empty() && issues.is_empty() {
        issues.push(LineIssue {
            line: 0,
            message: "no jobs".into(),
        });
    }
    let mut seen = HashMap::new();
    for (line, j) in &records {
        check_unique_id(&mut seen, &j.id, *line, "job", &mut issues);
        for (name, w) in &j.requirements {
            if !(w.is_finite() && *w >= 0.0) {
                issues.push(LineIssue {
                    line: *line,
                    message: format!("requirement '{name}' has invalid weight {w}"),
                });
            }
        }
        if j.status == JobStatus::Open && !j.requirements.values().any(|w| *w > 0.0) {
            issues.push(LineIssue {
                line: *line,
                message: format!("open job '{}' has no positive requirement weight", j.id),
            });
        }
        if let Some(ts) = &j.created_at {
            if chrono::DateTime::parse_from_rfc3339(ts).is_err() {
                issues.push(LineIssue {
                    line: *line,
                    message: format!("created_at '{ts}' is not an ISO-8601 timestamp"),
                });
            }
        }
    }
    finish(records, issues, path)
}

fn finish<T>(
    records: Vec<(usize, T)>,
    mut issues: Vec<LineIssue>,
    path: &Path,
) -> Result<Vec<T>, IngestError> {
    if issues.is_empty() {
        Ok(records.into_iter().map(|(_, r)| r).collect())
    } else {
        issues.sort_by_key(|i| i.line);
        Err(IngestError {
            path: path.to_owned(),
            issues,
        })
    }
}

pub fn ingest_pool(path: &Path) -> Result<Vec<CandidateProfile>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_pool(&text, path)?)
}

pub fn ingest_jobs(path: &Path) -> Result<Vec<JobSpec>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_jobs(&text, path)?)
}

/// Guess a file's kind from its first record: job records carry `requirements`.
pub fn detect_kind(path: &Path) -> Result<FileKind> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    match first.map(serde_json::from_str::<serde_json::Value>) {
        Some(Ok(v)) if v.get("requirements").is_some() => Ok(FileKind::Jobs),
        Some(Ok(v)) if v.get("features").is_some() => Ok(FileKind::Pool),
        // unrecognisable or empty files are reported through pool validation
        _ => Ok(FileKind::Pool),
    }
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn not_found(what: &str, id: &str) -> Error {
    Error::NotFound(format!("{what} '{id}'"))
}
