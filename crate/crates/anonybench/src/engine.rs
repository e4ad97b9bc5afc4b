//! Loaded run state shared by the CLI and the HTTP API, and the run report.

use std::time::Instant;

use anonybench_core::anonymizer::{Anonymizer, ConstraintOutcome, SearchOptions};
use anonybench_core::attacks::AttackReport;
use anonybench_core::lattice::DEFAULT_LATTICE_CAP;
use anonybench_core::{
    Candidate, Dataset, Hierarchy, HierarchySet, IngestLog, LatticeNode, SearchOutcome, UtilityReport,
};
use anyhow::{bail, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::io::{dataset_csv, load_dataset, load_hierarchy, parse_schema, read_text};

/// Input table, hierarchies and constraints of one run.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: RunConfig,
    pub data: Dataset,
    pub ingest: IngestLog,
    pub hierarchies: HierarchySet,
}

impl Session {
    pub fn load(config: RunConfig) -> Result<Session> {
        config.validate()?;
        let schema = parse_schema(&read_text(&config.resolve(&config.schema))?)?;
        let (data, ingest) = load_dataset(&read_text(&config.resolve(&config.dataset))?, &schema)?;
        let mut hierarchies = HierarchySet::new();
        for q in data.qid_indices() {
            let attr = &data.schema()[q];
            let file = config.hierarchies.as_ref().map(|d| config.resolve(d).join(format!("{}.csv", attr.name)));
            let h = match (file, config.bins.get(&attr.name)) {
                (Some(f), _) if f.is_file() => load_hierarchy(&read_text(&f)?, &attr.name, &data)?,
                (_, Some(&bins)) => {
                    let (lo, hi) = attr.bounds().unwrap_or((0.0, 0.0));
                    if !attr.is_numeric() {
                        bail!("bins given for categorical attribute {}", attr.name);
                    }
                    Hierarchy::bin_numeric_over(&attr.name, &data.numeric_column(q), bins, lo, hi)?
                }
                _ => bail!("quasi-identifier {} has neither a hierarchy file nor bins", attr.name),
            };
            hierarchies.insert(h);
        }
        // surfaces constraint errors before any search
        Anonymizer::new(&data, &hierarchies, &config.constraints)?;
        Ok(Session {
            config,
            data,
            ingest,
            hierarchies,
        })
    }

    fn anonymizer(&self) -> Result<Anonymizer<'_>> {
        Ok(Anonymizer::new(&self.data, &self.hierarchies, &self.config.constraints)?)
    }

    pub fn heights(&self) -> Result<Vec<usize>> {
        Ok(self.anonymizer()?.heights().to_vec())
    }

    pub fn search(&self) -> Result<Run> {
        let start = Instant::now();
        let outcome = self.anonymizer()?.search(SearchOptions {
            suppression_limit: self.config.suppression_limit,
            prune: self.config.prune,
            lattice_cap: DEFAULT_LATTICE_CAP,
        })?;
        Ok(Run {
            outcome,
            search_ms: start.elapsed().as_millis() as u64,
        })
    }

    pub fn evaluate(&self, levels: &[usize]) -> Result<Candidate> {
        Ok(self.anonymizer()?.evaluate(levels, self.config.suppression_limit)?)
    }

    /// The release at a node: generalized QIDs, suppressed rows omitted.
    pub fn release(&self, candidate: &Candidate) -> Result<Dataset> {
        Ok(self.anonymizer()?.materialize(candidate)?)
    }

    pub fn release_csv(&self, candidate: &Candidate) -> Result<String> {
        dataset_csv(&self.release(candidate)?)
    }
}

/// A finished lattice search.
#[derive(Debug, Clone)]
pub struct Run {
    pub outcome: SearchOutcome,
    pub search_ms: u64,
}

impl Run {
    pub fn optimum(&self) -> Option<&Candidate> {
        match &self.outcome {
            SearchOutcome::Found(r) => Some(&r.candidate),
            SearchOutcome::Unsatisfiable(_) => None,
        }
    }

    pub fn optimum_id(&self) -> Option<String> {
        self.optimum().map(Candidate::id)
    }

    pub fn counts(&self) -> (usize, usize) {
        match &self.outcome {
            SearchOutcome::Found(r) => (r.evaluated_count, r.pruned_count),
            SearchOutcome::Unsatisfiable(u) => (u.evaluated_count, u.pruned_count),
        }
    }

    pub fn entries(&self) -> Vec<LatticeEntry> {
        let best = self.optimum_id();
        self.outcome
            .lattice()
            .iter()
            .map(|n| LatticeEntry {
                optimal: Some(&n.id) == best.as_ref(),
                node: n.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeEntry {
    #[serde(flatten)]
    pub node: LatticeNode,
    /// The engine's choice; exactly one node when the run is satisfiable.
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub anonybench: &'static str,
    pub anonybench_core: &'static str,
}

pub const VERSIONS: Versions = Versions {
    anonybench: env!("CARGO_PKG_VERSION"),
    anonybench_core: anonybench_core::VERSION,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub search_ms: u64,
}

/// Everything needed to audit and rerun an anonymization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub versions: Versions,
    pub seed: u64,
    pub config: RunConfig,
    pub ingest: IngestLog,
    /// `optimal`, `selected` (a node other than the optimum) or
    /// `unsatisfiable`.
    pub status: &'static str,
    pub optimum: Option<String>,
    pub chosen_node: Option<String>,
    pub utility: Option<UtilityReport>,
    pub released_records: usize,
    pub suppressed_count: usize,
    pub suppressed_indices: Vec<usize>,
    /// Constraint outcomes at the chosen node, or at the top node when no
    /// node satisfies them.
    pub constraints: Vec<ConstraintOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub evaluated_count: usize,
    pub pruned_count: usize,
    pub lattice: Vec<LatticeEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub attacks: Vec<AttackReport>,
    pub timing: Timing,
}

/// The report for `selected` (the optimum when `None`).
pub fn build_report(session: &Session, run: &Run, selected: Option<&Candidate>) -> RunReport {
    let (evaluated_count, pruned_count) = run.counts();
    let optimum = run.optimum_id();
    let chosen = selected.or(run.optimum());
    let mut report = RunReport {
        versions: VERSIONS,
        seed: session.config.seed,
        config: session.config.clone(),
        ingest: session.ingest.clone(),
        status: "unsatisfiable",
        optimum: optimum.clone(),
        chosen_node: None,
        utility: None,
        released_records: 0,
        suppressed_count: 0,
        suppressed_indices: Vec::new(),
        constraints: Vec::new(),
        diagnostic: None,
        evaluated_count,
        pruned_count,
        lattice: run.entries(),
        attacks: Vec::new(),
        timing: Timing {
            search_ms: run.search_ms,
        },
    };
    match (chosen, &run.outcome) {
        (Some(c), _) => {
            report.status = if Some(c.id()) == optimum { "optimal" } else { "selected" };
            report.chosen_node = Some(c.id());
            report.utility = Some(c.utility.clone());
            report.released_records = session.data.len() - c.suppressed_indices.len();
            report.suppressed_count = c.suppressed_indices.len();
            report.suppressed_indices = c.suppressed_indices.clone();
            report.constraints = c.constraints.clone();
        }
        (None, SearchOutcome::Unsatisfiable(u)) => {
            report.constraints = u.top.constraints.clone();
            report.diagnostic = Some(match &u.top.reason {
                Some(r) => format!("no lattice node satisfies the constraints; top node {}: {r}", u.top.id()),
                None => format!("no lattice node satisfies the constraints; top node {} fails", u.top.id()),
            });
        }
        (None, SearchOutcome::Found(_)) => unreachable!("a found run has an optimum"),
    }
    report
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order and maps are sorted, so equal reports give equal bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
