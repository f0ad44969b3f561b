//! The `.tc` fixture corpus and its manifest of expected outcomes.
//!
//! `manifest.toml` holds one `[[entry]]` per file:
//!
//! ```toml
//! [[entry]]
//! file = "02_add_group.tc"
//! anchor = "integers form an additive group"
//!
//! [[entry.expect]]
//! kind = "synth"
//! goal = "add_group int"
//! verdict = "Found"
//! term = "int.add_group"
//!
//! [[entry.expect]]
//! kind = "lint"
//! linter = "dangerous_instance"
//! count = 0
//! ```
//!
//! A synth expectation is matched against the file's `#synth` queries by
//! goal (the `occurrence`-th one, counting from 1) and runs in that query's
//! context. Optional keys: `term`, `solved` (the goal with holes filled),
//! `applied`, `max_applied`, `tabled`, `fuel`, `max_depth`.
//!
//! A lint expectation counts the findings of one linter, optionally
//! restricted to a `subject`, a diamond `field`, or a fails_quickly `cycle`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::hierarchy::{BuildError, Environment, Query};
use crate::lint::{run_linters, LintFinding};
use crate::syntax::{parse_file, parse_term, render_term, ParseError, SourceFile};
use crate::synth::{synthesize, LocalInstances, SynthConfig};
use crate::term::Term;

pub const MANIFEST: &str = "manifest.toml";

/// Files every corpus must provide.
pub const REQUIRED_FILES: [&str; 11] = [
    "02_add_group.tc",
    "02_pointwise.tc",
    "03_comm_monoid.tc",
    "04_module.tc",
    "05_hom_classes.tc",
    "06_nsmul_diamond.tc",
    "06_unique_loop.tc",
    "07_mixins.tc",
    "08_fact_zmod.tc",
    "09_unbundled.tc",
    "09_has_bot_loop.tc",
];

/// The corpus shipped with this crate.
pub fn default_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "entry", default)]
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    /// What the file encodes, in words.
    pub anchor: String,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expectation {
    Synth(SynthExpectation),
    Lint(LintExpectation),
}

fn first() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthExpectation {
    pub goal: String,
    #[serde(default = "first")]
    pub occurrence: usize,
    /// `Found` or a failure verdict.
    pub verdict: String,
    pub term: Option<String>,
    pub solved: Option<String>,
    pub applied: Option<u64>,
    pub max_applied: Option<u64>,
    #[serde(default)]
    pub tabled: bool,
    pub fuel: Option<u64>,
    pub max_depth: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LintExpectation {
    pub linter: String,
    pub count: usize,
    pub subject: Option<String>,
    pub field: Option<String>,
    pub cycle: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub manifest: ManifestEntry,
    pub path: PathBuf,
    pub source: SourceFile,
    pub env: Environment,
    pub queries: Vec<Query>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CorpusProblem {
    #[error("{file}: missing")]
    MissingFile { file: String },
    #[error("{file}: {error}")]
    Unreadable { file: String, error: String },
    #[error("{file}:{error}")]
    Parse { file: String, error: ParseError },
    #[error("{file}: {error}")]
    Build { file: String, error: BuildError },
    #[error("{MANIFEST}: {0}")]
    Manifest(String),
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub root: PathBuf,
    pub entries: Vec<CorpusEntry>,
    pub problems: Vec<CorpusProblem>,
}

/// Read the manifest under `root` and parse and build every file it lists.
/// Problems are collected per file; loading never stops early.
pub fn load_corpus(root: &Path) -> Corpus {
    let mut corpus = Corpus { root: root.to_path_buf(), entries: Vec::new(), problems: Vec::new() };
    let manifest = match fs::read_to_string(root.join(MANIFEST)) {
        Ok(text) => match toml::from_str::<Manifest>(&text) {
            Ok(m) => m,
            Err(e) => {
                corpus.problems.push(CorpusProblem::Manifest(e.to_string()));
                Manifest { entries: Vec::new() }
            }
        },
        Err(_) => {
            corpus.problems.push(CorpusProblem::MissingFile { file: MANIFEST.into() });
            Manifest { entries: Vec::new() }
        }
    };
    for required in REQUIRED_FILES {
        if !manifest.entries.iter().any(|e| e.file == required) {
            corpus.problems.push(CorpusProblem::MissingFile { file: required.into() });
        }
    }
    for entry in manifest.entries {
        let path = root.join(&entry.file);
        let file = entry.file.clone();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                corpus.problems.push(CorpusProblem::MissingFile { file });
                continue;
            }
            Err(e) => {
                corpus.problems.push(CorpusProblem::Unreadable { file, error: e.to_string() });
                continue;
            }
        };
        let source = match parse_file(&text) {
            Ok(s) => s,
            Err(error) => {
                corpus.problems.push(CorpusProblem::Parse { file, error });
                continue;
            }
        };
        match Environment::from_source(&source) {
            Ok((env, queries)) => corpus.entries.push(CorpusEntry { manifest: entry, path, source, env, queries }),
            Err(error) => corpus.problems.push(CorpusProblem::Build { file, error }),
        }
    }
    corpus
}

/// Result of checking one expectation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub file: String,
    pub description: String,
    pub passed: bool,
    /// What was observed.
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok" } else { "FAILED" };
        write!(f, "{}: {}: {status} ({})", self.file, self.description, self.detail)
    }
}

/// The `occurrence`-th query (from 1) whose goal equals `goal` up to
/// renaming of holes.
pub fn find_query<'q>(queries: &'q [Query], goal: &Term, occurrence: usize) -> Option<&'q Query> {
    let key = goal.normalize_metas();
    queries.iter().filter(|q| q.goal.normalize_metas() == key).nth(occurrence.checked_sub(1)?)
}

impl CorpusEntry {
    pub fn check(&self) -> Vec<Outcome> {
        self.manifest
            .expect
            .iter()
            .map(|e| match e {
                Expectation::Synth(s) => self.check_synth(s),
                Expectation::Lint(l) => self.check_lint(l),
            })
            .collect()
    }

    fn outcome(&self, description: String, passed: bool, detail: String) -> Outcome {
        Outcome { file: self.manifest.file.clone(), description, passed, detail }
    }

    fn check_synth(&self, x: &SynthExpectation) -> Outcome {
        let mode = if x.tabled { " (tabled)" } else { "" };
        let description = format!("#synth {}{mode} is {}", x.goal, x.verdict);
        let goal = match parse_term(&x.goal) {
            Ok(g) => g,
            Err(e) => return self.outcome(description, false, format!("bad goal: {e}")),
        };
        let Some(q) = find_query(&self.queries, &goal, x.occurrence) else {
            return self.outcome(description, false, "no such #synth in file".into());
        };
        let defaults = SynthConfig::default();
        let cfg = SynthConfig {
            fuel: x.fuel.unwrap_or(defaults.fuel),
            max_depth: x.max_depth.unwrap_or(defaults.max_depth),
            tabled: x.tabled,
        };
        let env = self.env.truncated(q.visible);
        let r = synthesize(&q.goal, &env, &q.locals, &cfg);
        let (verdict, stats) = match &r {
            Ok(res) => ("Found", Some(res.stats)),
            Err(f) => (f.verdict(), f.stats().copied()),
        };
        let applied = stats.map_or(0, |s| s.applied);
        let mut problems = Vec::new();
        if verdict != x.verdict {
            problems.push(format!("verdict {verdict}"));
        }
        if let Ok(res) = &r {
            let term = render_term(&res.term);
            if x.term.as_ref().is_some_and(|t| *t != term) {
                problems.push(format!("term {term}"));
            }
            let solved = render_term(&res.goal);
            if x.solved.as_ref().is_some_and(|t| *t != solved) {
                problems.push(format!("solved {solved}"));
            }
        }
        if x.applied.is_some_and(|n| n != applied) {
            problems.push(format!("applied={applied}"));
        }
        if x.max_applied.is_some_and(|n| applied > n) {
            problems.push(format!("applied={applied} over bound"));
        }
        let detail = match &r {
            Ok(res) => format!("found {}, applied={applied}", render_term(&res.term)),
            Err(_) => format!("{verdict}, applied={applied}"),
        };
        let detail = if problems.is_empty() { detail } else { format!("{detail}; mismatch: {}", problems.join(", ")) };
        self.outcome(description, problems.is_empty(), detail)
    }

    fn check_lint(&self, x: &LintExpectation) -> Outcome {
        let mut description = format!("{} reports {}", x.linter, x.count);
        if let Some(s) = &x.subject {
            description.push_str(&format!(" on {s}"));
        }
        if let Some(f) = &x.field {
            description.push_str(&format!(" for field {f}"));
        }
        if let Some(c) = &x.cycle {
            description.push_str(&format!(" with cycle {}", c.join(" → ")));
        }
        let findings = run_linters(&self.env, &self.queries, &[x.linter.as_str()], &SynthConfig::default());
        let matching: Vec<&LintFinding> = findings
            .iter()
            .filter(|f| x.subject.as_ref().is_none_or(|s| *s == f.subject))
            .filter(|f| x.field.as_ref().is_none_or(|fl| f.data.get("field").and_then(|v| v.as_str()) == Some(fl)))
            .filter(|f| {
                x.cycle.as_ref().is_none_or(|c| {
                    f.data.get("cycle").and_then(|v| serde_json::from_value::<Vec<String>>(v.clone()).ok()).as_ref()
                        == Some(c)
                })
            })
            .collect();
        let subjects: Vec<&str> = matching.iter().map(|f| f.subject.as_str()).collect();
        let detail = format!("{} finding(s){}", matching.len(), if subjects.is_empty() { String::new() } else { format!(": {}", subjects.join(", ")) });
        self.outcome(description, matching.len() == x.count, detail)
    }
}

impl Corpus {
    /// Every expectation of every loaded entry, plus a failed outcome per
    /// loading problem.
    pub fn check(&self) -> Vec<Outcome> {
        let mut out: Vec<Outcome> = self
            .problems
            .iter()
            .map(|p| Outcome { file: String::new(), description: "load".into(), passed: false, detail: p.to_string() })
            .collect();
        for e in &self.entries {
            out.extend(e.check());
        }
        out
    }

    pub fn entry(&self, file: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.manifest.file == file)
    }
}

/// Run a goal given as text against a built environment with no locals.
pub fn synth_text(env: &Environment, goal: &str, cfg: &SynthConfig) -> Result<crate::synth::SynthResult, String> {
    let goal = parse_term(goal).map_err(|e| e.to_string())?;
    synthesize(&goal, env, &LocalInstances::new(), cfg).map_err(|f| f.verdict().to_string())
}
