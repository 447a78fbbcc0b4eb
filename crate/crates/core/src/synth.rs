//! Synthetic candidate pools and job requisitions for fixtures and benchmarks.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::rng;
use crate::scoring::{CandidateProfile, JobSpec, JobStatus};

const SECTORS: &[(&str, &[&str])] = &[
    ("web", &["react", "javascript", "typescript", "css", "graphql", "nodejs"]),
    ("mobile", &["ios", "swift", "objective_c", "android", "kotlin", "mobile_ci"]),
    ("data", &["sql", "python", "spark", "airflow", "data_modeling", "cloud_warehouse"]),
    ("logistics", &["warehouse_ops", "forklift", "inventory", "gmp", "cold_chain", "shipping"]),
    ("finance", &["payroll", "hr_systems", "accounting", "compliance", "excel", "implementation"]),
    ("automotive", &["vehicle_diagnostics", "service_scheduling", "customer_service", "parts", "warranty"]),
    ("sales", &["sales", "negotiation", "crm", "partnerships", "sponsorship", "lead_generation"]),
    ("language", &["translation", "galician", "basque", "catalan", "subtitling", "teaching"]),
    ("health", &["clinical_content", "medical_terminology", "ehr", "pharmacology", "documentation"]),
    ("admin", &["office_admin", "scheduling", "bookkeeping", "policy", "stakeholder_mgmt"]),
];

const GENERAL: &[&str] = &["communication", "english", "teamwork", "problem_solving", "project_management"];

/// A pool of `n` candidates, each rooted in one sector with a few skills
/// borrowed from another and some general skills.
pub fn synthetic_pool(n: usize, seed: u64) -> Vec<CandidateProfile> {
    let width = n.to_string().len().max(4);
    let mut rng = rng::stream(seed, "pool", &[]);
    (1..=n)
        .map(|i| {
            let mut features = BTreeMap::new();
            let (_, home) = SECTORS[rng.random_range(0..SECTORS.len())];
            let (_, other) = SECTORS[rng.random_range(0..SECTORS.len())];
            let picks = rng.random_range(2..=home.len());
            let chosen: Vec<&str> = home.choose_multiple(&mut rng, picks).copied().collect();
            for skill in chosen {
                features.insert(skill.to_string(), round2(rng.random_range(0.2..=1.0)));
            }
            let picks = rng.random_range(0..=2);
            let chosen: Vec<&str> = other.choose_multiple(&mut rng, picks).copied().collect();
            for skill in chosen {
                features
                    .entry(skill.to_string())
                    .or_insert_with(|| round2(rng.random_range(0.1..=0.7)));
            }
            let picks = rng.random_range(1..=4);
            let chosen: Vec<&str> = GENERAL.choose_multiple(&mut rng, picks).copied().collect();
            for skill in chosen {
                features.insert(skill.to_string(), round2(rng.random_range(0.1..=1.0)));
            }
            let id = format!("c{i:0width$}");
            CandidateProfile {
                label: format!("Candidate {i:0width$}"),
                id: id.into(),
                features,
                perturbation: None,
            }
        })
        .collect()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn reqs(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|(k, w)| (k.to_string(), *w)).collect()
}

/// Sample requisitions across sectors.
pub fn sample_jobs() -> Vec<JobSpec> {
    let spec = |id: &str, title: &str, description: &str, status, day: u32, r: &[(&str, f64)]| JobSpec {
        id: id.into(),
        title: title.into(),
        description: description.into(),
        requirements: reqs(r),
        status,
        created_at: Some(format!("2024-03-{day:02}T09:00:00Z")),
    };
    use JobStatus::*;
    vec![
        spec("j01", "ReactJS Developer", "Build customer-facing web applications.", Open, 1,
            &[("react", 3.0), ("javascript", 2.0), ("typescript", 1.5), ("css", 1.0), ("communication", 0.5)]),
        spec("j02", "Pharmaceutical Warehouse Associate", "Handle regulated goods in a GMP warehouse.", Open, 2,
            &[("warehouse_ops", 3.0), ("gmp", 2.5), ("inventory", 1.5), ("forklift", 1.0), ("teamwork", 0.5)]),
        spec("j03", "Payroll Implementation Specialist", "Roll out payroll systems for new clients.", Open, 3,
            &[("payroll", 3.0), ("implementation", 2.0), ("hr_systems", 1.5), ("excel", 1.0), ("project_management", 0.5)]),
        spec("j04", "Automotive Service Advisor", "Front desk of a busy service centre.", Open, 4,
            &[("customer_service", 2.5), ("service_scheduling", 2.0), ("vehicle_diagnostics", 1.5), ("warranty", 1.0), ("communication", 1.0)]),
        spec("j05", "Senior Mobile Engineer (iOS)", "Own the iOS application end to end.", Open, 5,
            &[("ios", 3.0), ("swift", 3.0), ("objective_c", 1.0), ("mobile_ci", 1.0), ("problem_solving", 0.5)]),
        spec("j06", "Associate, Senior Associate, Policy Advisor, Manager", "Policy analysis and advice.", Closed, 6,
            &[("policy", 3.0), ("stakeholder_mgmt", 2.0), ("communication", 1.5), ("english", 1.0)]),
        spec("j07", "SALES EXECUTIVE", "Grow regional accounts.", Open, 7,
            &[("sales", 3.0), ("negotiation", 2.0), ("crm", 1.5), ("lead_generation", 1.0), ("communication", 1.0)]),
        spec("j08", "Business Development & Sponsorships Manager", "Secure sponsorship partners.", Draft, 8,
            &[("partnerships", 3.0), ("sponsorship", 3.0), ("sales", 1.0), ("negotiation", 1.0)]),
        spec("j09", "Expert SubtitlingTranslator: English to Galician, Basque, Catalan", "Subtitle streaming content.", Open, 9,
            &[("subtitling", 2.5), ("translation", 2.5), ("galician", 1.5), ("basque", 1.5), ("catalan", 1.5), ("english", 1.0)]),
        spec("j10", "General Engineering", "Cross-functional engineering support.", Open, 10,
            &[("problem_solving", 2.0), ("python", 1.0), ("project_management", 1.0), ("teamwork", 1.0)]),
        spec("j11", "Office Administrator", "Keep the office running.", Open, 11,
            &[("office_admin", 3.0), ("scheduling", 2.0), ("bookkeeping", 1.0), ("communication", 1.0)]),
        spec("j12", "Face to Face Language Trainer (m/f/d)", "Teach language classes on site.", Closed, 12,
            &[("teaching", 3.0), ("english", 2.0), ("communication", 1.5)]),
        spec("j13", "Clinical Content Builder", "Author clinical decision content.", Open, 13,
            &[("clinical_content", 3.0), ("medical_terminology", 2.0), ("ehr", 1.5), ("documentation", 1.0)]),
        spec("j14", "Data Engineer", "Build batch and streaming pipelines.", Open, 14,
            &[("sql", 3.0), ("python", 2.5), ("spark", 2.0), ("airflow", 1.5), ("cloud_warehouse", 1.0)]),
    ]
}
