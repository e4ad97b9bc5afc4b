//! The `anonymize`, `attack`, `graph` and `dp` subcommands. Each writes its
//! files and returns the text to print plus an exit code.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anonybench_core::attacks::{
    homogeneity_risk, linkage_attack, membership_risk, reconstruction_attack, AttackReport, ReconstructionConfig,
};
use anonybench_core::dp::DpEngine;
use anonybench_core::graph::{anonymize_graph, check_k_degree, degree_attack, KDegreeCheck};
use anonybench_core::{Error, PrivacyConstraint};
use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use crate::config::{DpQuery, RunConfig};
use crate::engine::{build_report, to_json, Run, Session};
use crate::io::{edge_list_csv, ledger_jsonl, load_auxiliary, load_dataset, parse_edge_list, parse_grouping, parse_schema, read_text, write_text};

/// Exit code of a run whose constraints no node satisfies, or whose graph
/// could not be realized.
pub const EXIT_UNSATISFIED: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub code: u8,
    pub stdout: String,
}

fn done(stdout: String) -> CommandOutput {
    CommandOutput { code: 0, stdout }
}

pub fn anonymize(config: &RunConfig) -> Result<CommandOutput> {
    let session = Session::load(config.clone())?;
    let run = session.search()?;
    let report = build_report(&session, &run, None);
    write_text(&config.resolve(&config.output.report), &to_json(&report))?;
    let mut out = String::new();
    let (evaluated, pruned) = run.counts();
    match run.optimum() {
        Some(c) => {
            write_text(&config.resolve(&config.output.release), &session.release_csv(c)?)?;
            writeln!(
                out,
                "optimal node {} utility {:.6}: {} records released, {} suppressed ({} nodes evaluated, {} pruned)",
                c.id(),
                c.utility.utility,
                report.released_records,
                report.suppressed_count,
                evaluated,
                pruned
            )?;
            Ok(done(out))
        }
        None => {
            writeln!(out, "{}", report.diagnostic.as_deref().unwrap_or("unsatisfiable"))?;
            Ok(CommandOutput {
                code: EXIT_UNSATISFIED,
                stdout: out,
            })
        }
    }
}

/// Attack reports against the optimal release.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackSet {
    pub seed: u64,
    pub node: String,
    pub reports: Vec<AttackReport>,
}

pub fn run_attacks(session: &Session, run: &Run) -> Result<AttackSet> {
    let config = &session.config;
    let attacks = config
        .attacks
        .as_ref()
        .ok_or_else(|| anyhow!("the config requests no attacks"))?;
    let candidate = run
        .optimum()
        .ok_or_else(|| anyhow!("no release to attack: the constraints are unsatisfiable"))?;
    let release = session.release(candidate)?;
    let schema = parse_schema(&read_text(&config.resolve(&config.schema))?)?;
    let mut reports = Vec::new();
    if let Some(l) = &attacks.linkage {
        let external = load_auxiliary(&read_text(&config.resolve(&l.external))?, &schema)
            .context("linkage external table")?;
        reports.push(linkage_attack(&release, &external, &session.hierarchies, &candidate.levels)?);
    }
    if let Some(h) = &attacks.homogeneity {
        let grouping = match &h.grouping {
            Some(p) => Some(parse_grouping(&read_text(&config.resolve(p))?)?),
            None => None,
        };
        reports.push(homogeneity_risk(&release, &h.sensitive, h.threshold, grouping.as_ref())?);
    }
    if let Some(m) = &attacks.membership {
        let population = load_auxiliary(&read_text(&config.resolve(&m.population))?, &schema)
            .context("membership population table")?;
        reports.push(membership_risk(&release, &population, &session.hierarchies, &candidate.levels)?);
    }
    if let Some(r) = &attacks.reconstruction {
        let rc = ReconstructionConfig {
            known_fraction: r.known_fraction,
            seed: config.seed,
            features: r.features.clone(),
        };
        reports.push(reconstruction_attack(&session.data, &r.target, &rc)?);
    }
    Ok(AttackSet {
        seed: config.seed,
        node: candidate.id(),
        reports,
    })
}

/// One line per attack with its aggregate metrics, then any warnings.
pub fn summary_table(set: &AttackSet, constraints: &[PrivacyConstraint]) -> String {
    let mut out = format!("attacks on node {} (seed {})\n", set.node, set.seed);
    for r in &set.reports {
        let metrics: Vec<String> = r.metrics.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        let _ = writeln!(out, "{:<15} {}", r.attack, metrics.join(" "));
        if r.attack == "linkage" {
            let k = constraints
                .iter()
                .filter_map(|c| match c {
                    PrivacyConstraint::KAnonymity { k } => Some(*k),
                    _ => None,
                })
                .max();
            if let (Some(k), Some(max)) = (k, r.metric("max_risk")) {
                let verdict = if max <= 1.0 / k as f64 { "within" } else { "ABOVE" };
                let _ = writeln!(out, "{:<15} max risk {max:.4} {verdict} the 1/k = {:.4} bound", "", 1.0 / k as f64);
            }
        }
        for w in &r.warnings {
            let _ = writeln!(out, "{:<15} {w}", "");
        }
    }
    out
}

pub fn attack(config: &RunConfig) -> Result<CommandOutput> {
    let session = Session::load(config.clone())?;
    let run = session.search()?;
    let set = run_attacks(&session, &run)?;
    let mut report = build_report(&session, &run, None);
    report.attacks = set.reports.clone();
    write_text(&config.resolve(&config.output.attacks), &to_json(&set))?;
    write_text(&config.resolve(&config.output.report), &to_json(&report))?;
    Ok(done(summary_table(&set, &config.constraints)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    pub seed: u64,
    pub k: usize,
    pub nodes: usize,
    pub original_edges: usize,
    pub original: KDegreeCheck,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anonymized_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anonymized: Option<KDegreeCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<usize>>,
    pub escalations: usize,
    pub parity_repairs: usize,
    pub escalated: bool,
    /// Fewest candidates a degree-knowing adversary is left with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_attack_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn graph(config: &RunConfig) -> Result<CommandOutput> {
    let gc = config.graph.as_ref().ok_or_else(|| anyhow!("the config has no graph section"))?;
    config.validate()?;
    let g = parse_edge_list(&read_text(&config.resolve(&gc.edges))?, gc.nodes)?;
    let mut report = GraphReport {
        seed: config.seed,
        k: gc.k,
        nodes: g.node_count(),
        original_edges: g.edge_count(),
        original: check_k_degree(&g, gc.k),
        status: "realized",
        anonymized_edges: None,
        anonymized: None,
        target: None,
        escalations: 0,
        parity_repairs: 0,
        escalated: false,
        min_attack_candidates: None,
        error: None,
    };
    let result = match anonymize_graph(&g, gc.k) {
        Ok(r) => {
            write_text(&config.resolve(&config.output.graph), &edge_list_csv(&r.graph))?;
            report.anonymized_edges = Some(r.graph.edge_count());
            report.anonymized = Some(check_k_degree(&r.graph, gc.k));
            report.escalations = r.escalations;
            report.parity_repairs = r.parity_repairs;
            report.escalated = r.escalated();
            report.min_attack_candidates = r.target.iter().map(|&d| degree_attack(&r.graph, d)).min();
            report.target = Some(r.target);
            let stdout = format!(
                "k-degree anonymous graph: {} nodes, {} -> {} edges{}\n",
                report.nodes,
                report.original_edges,
                r.graph.edge_count(),
                if report.escalated { " (target escalated)" } else { "" }
            );
            Ok(done(stdout))
        }
        Err(e @ Error::Unrealizable { .. }) => {
            report.status = "unrealizable";
            report.error = Some(e.to_string());
            Ok(CommandOutput {
                code: EXIT_UNSATISFIED,
                stdout: format!("{e}\n"),
            })
        }
        Err(e) => Err(e.into()),
    };
    write_text(&config.resolve(&config.output.graph_report), &to_json(&report))?;
    result
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpAnswer {
    pub query: String,
    pub epsilon: f64,
    /// `answered` or `refused`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpReport {
    pub seed: u64,
    pub total_epsilon: f64,
    pub spent: f64,
    pub remaining: f64,
    pub answers: Vec<DpAnswer>,
}

fn describe(query: &DpQuery) -> String {
    match query {
        DpQuery::Count { filter, .. } if filter.is_empty() => "count(*)".into(),
        DpQuery::Count { filter, .. } => {
            let parts: Vec<String> = filter.iter().map(|(a, v)| format!("{a}={v}")).collect();
            format!("count({})", parts.join(" AND "))
        }
        DpQuery::Histogram { attribute, .. } => format!("histogram({attribute})"),
    }
}

pub fn dp(config: &RunConfig) -> Result<CommandOutput> {
    let dc = config.dp.as_ref().ok_or_else(|| anyhow!("the config has no dp section"))?;
    config.validate()?;
    let schema = parse_schema(&read_text(&config.resolve(&config.schema))?)?;
    let (data, _) = load_dataset(&read_text(&config.resolve(&config.dataset))?, &schema)?;
    let mut engine = DpEngine::new(dc.total_epsilon, config.seed)?;
    let mut answers = Vec::new();
    let mut out = String::new();
    for q in &dc.queries {
        let mut a = DpAnswer {
            query: describe(q),
            epsilon: 0.0,
            status: "answered",
            value: None,
            values: None,
            scale: None,
            error: None,
        };
        let result = match q {
            DpQuery::Count { filter, epsilon } => {
                a.epsilon = *epsilon;
                let predicate: Vec<(String, String)> = filter.clone().into_iter().collect();
                engine.count(&data, &predicate, *epsilon).map(|r| {
                    a.value = Some(r.value);
                    a.scale = Some(r.scale);
                })
            }
            DpQuery::Histogram { attribute, epsilon } => {
                a.epsilon = *epsilon;
                engine.histogram(&data, attribute, *epsilon).map(|r| {
                    a.scale = r.values().next().map(|x| x.scale);
                    a.values = Some(r.into_iter().map(|(k, v)| (k, v.value)).collect());
                })
            }
        };
        match result {
            Ok(()) => {
                let _ = writeln!(out, "{:<40} answered (epsilon {})", a.query, a.epsilon);
            }
            Err(e @ Error::BudgetExhausted { .. }) => {
                a.status = "refused";
                a.error = Some(e.to_string());
                let _ = writeln!(out, "{:<40} refused: {e}", a.query);
            }
            Err(e) => return Err(e.into()),
        }
        answers.push(a);
    }
    let acc = engine.accountant();
    let report = DpReport {
        seed: config.seed,
        total_epsilon: acc.total_epsilon(),
        spent: acc.spent(),
        remaining: acc.remaining(),
        answers,
    };
    let _ = writeln!(out, "spent {} of {} epsilon", report.spent, report.total_epsilon);
    write_text(&config.resolve(&config.output.dp_answers), &to_json(&report))?;
    write_text(&config.resolve(&config.output.dp_ledger), &ledger_jsonl(acc.ledger()))?;
    Ok(done(out))
}
