//! Term-size growth of `comm_monoid` instances on nested products, bundled
//! versus unbundled.

use std::fmt::Write;
use std::time::Instant;

use serde::Serialize;

use crate::hierarchy::Environment;
use crate::syntax::parse_file;
use crate::synth::{synthesize, LocalInstances, SynthConfig};
use crate::term::Term;

pub const BUNDLED_SOURCE: &str = include_str!("../corpus/09_bundled.tc");
pub const UNBUNDLED_SOURCE: &str = include_str!("../corpus/09_unbundled.tc");

pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_FUEL: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Bundled,
    Unbundled,
}

impl Style {
    pub fn name(self) -> &'static str {
        match self {
            Style::Bundled => "bundled",
            Style::Unbundled => "unbundled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub mode: Style,
    pub depth: usize,
    /// `None` when synthesis failed.
    pub term_size: Option<u64>,
    pub applied: u64,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

/// `prod (... (prod nat nat) ...) nat` with `depth` products.
pub fn product_type(depth: usize) -> Term {
    (0..depth).fold(Term::constant("nat"), |t, _| Term::app("prod", vec![t, Term::constant("nat")]))
}

pub fn blowup_goal(depth: usize) -> Term {
    Term::app("comm_monoid", vec![product_type(depth)])
}

/// The embedded hierarchy for one style.
pub fn hierarchy(style: Style) -> Environment {
    let text = match style {
        Style::Bundled => BUNDLED_SOURCE,
        Style::Unbundled => UNBUNDLED_SOURCE,
    };
    let file = parse_file(text).expect("embedded corpus parses");
    Environment::from_source(&file).expect("embedded corpus builds").0
}

pub fn bench_config(fuel: u64) -> SynthConfig {
    SynthConfig { fuel, ..SynthConfig::default() }
}

fn measure(style: Style, env: &Environment, depth: usize, cfg: &SynthConfig) -> BenchRow {
    let start = Instant::now();
    let r = synthesize(&blowup_goal(depth), env, &LocalInstances::new(), cfg);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    match r {
        Ok(res) => BenchRow {
            mode: style,
            depth,
            term_size: Some(res.stats.size),
            applied: res.stats.applied,
            elapsed_ms,
            error: None,
        },
        Err(f) => BenchRow {
            mode: style,
            depth,
            term_size: None,
            applied: f.stats().map_or(0, |s| s.applied),
            elapsed_ms,
            error: Some(f.verdict().to_string()),
        },
    }
}

/// One row per style and depth `0..=max_depth`, sorted by style then depth.
pub fn run_blowup(max_depth: usize, bundled: &Environment, unbundled: &Environment, cfg: &SynthConfig) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for (style, env) in [(Style::Bundled, bundled), (Style::Unbundled, unbundled)] {
        for depth in 0..=max_depth {
            rows.push(measure(style, env, depth, cfg));
        }
    }
    rows
}

fn sorted(rows: &[BenchRow]) -> Vec<&BenchRow> {
    let mut v: Vec<&BenchRow> = rows.iter().collect();
    v.sort_by_key(|r| (r.mode, r.depth));
    v
}

fn size_cell(r: &BenchRow) -> String {
    r.term_size.map_or_else(|| "-".to_string(), |s| s.to_string())
}

pub fn emit_report(rows: &[BenchRow], format: ReportFormat) -> String {
    let rows = sorted(rows);
    let mut out = String::new();
    match format {
        ReportFormat::Table => {
            writeln!(out, "{:<10} {:>5} {:>10} {:>10} {:>11}", "mode", "depth", "term_size", "applied", "elapsed_ms").unwrap();
            for r in rows {
                write!(
                    out,
                    "{:<10} {:>5} {:>10} {:>10} {:>11.3}",
                    r.mode.name(),
                    r.depth,
                    size_cell(r),
                    r.applied,
                    r.elapsed_ms
                )
                .unwrap();
                if let Some(e) = &r.error {
                    write!(out, "  {e}").unwrap();
                }
                out.push('\n');
            }
        }
        ReportFormat::Csv => {
            out.push_str("mode,depth,term_size,applied,elapsed_ms,error\n");
            for r in rows {
                let size = r.term_size.map_or(String::new(), |s| s.to_string());
                let error = r.error.as_deref().unwrap_or("");
                writeln!(out, "{},{},{size},{},{:.3},{error}", r.mode.name(), r.depth, r.applied, r.elapsed_ms).unwrap();
            }
        }
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                rows: Vec<&'a BenchRow>,
            }
            out = serde_json::to_string_pretty(&Report { rows }).expect("rows serialize");
            out.push('\n');
        }
    }
    out
}
