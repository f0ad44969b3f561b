//! Command-line driver: `check`, `synth`, `lint` and `bench`.
//!
//! Input files are built into one environment in argument order. Exit
//! codes: 0 on success, 1 when a file fails to build or a goal or linter
//! fails, 2 on usage or I/O errors.

use std::fmt::Write;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, ReportFormat};
use crate::hierarchy::{EnvBuilder, Environment, Query};
use crate::lint::{findings_to_json, run_linters, Severity, ALL_LINTERS};
use crate::syntax::{parse_file, render_term};
use crate::synth::{synthesize, SynthConfig, SynthStats};

#[derive(Parser, Debug)]
#[command(name = "tcsynth", version, about = "Typeclass instance resolution for .tc files")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and build each file.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Answer every `#synth` goal.
    Synth {
        #[command(flatten)]
        search: SearchArgs,
        /// Machine-readable rows on stdout.
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run linters over the built environment.
    Lint {
        /// Linter to run; repeat to select several (default: all).
        #[arg(long = "linter", value_parser = ALL_LINTERS)]
        linters: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Term size of `comm_monoid` on nested products, bundled vs unbundled.
    Bench {
        /// Deepest product nesting.
        #[arg(long, default_value_t = bench::DEFAULT_DEPTH)]
        max_depth: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
        #[arg(long, env = "TCSYNTH_FUEL", default_value_t = bench::DEFAULT_FUEL)]
        fuel: u64,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Candidate applications allowed per goal.
    #[arg(long, env = "TCSYNTH_FUEL", default_value_t = SynthConfig::default().fuel)]
    fuel: u64,
    #[arg(long, default_value_t = SynthConfig::default().max_depth)]
    max_depth: usize,
    /// Memoize subgoals.
    #[arg(long)]
    tabled: bool,
}

impl SearchArgs {
    fn config(&self) -> SynthConfig {
        SynthConfig { fuel: self.fuel, max_depth: self.max_depth, tabled: self.tabled }
    }
}

/// Everything an invocation prints, and its exit code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CliOutput {
    fn raise(&mut self, code: i32) {
        self.code = self.code.max(code);
    }
}

/// Files built into one environment, in argument order.
struct Loaded {
    /// Successfully built files; `Query::file` indexes this.
    paths: Vec<PathBuf>,
    env: Environment,
    queries: Vec<Query>,
}

/// Read, parse and build `files` in order. A file that fails is reported on
/// `out.stderr` and left out; later files still see the earlier ones. With
/// `status`, a line per built file goes to `out.stdout`.
fn load(files: &[PathBuf], out: &mut CliOutput, status: bool) -> Loaded {
    let mut builder = EnvBuilder::new();
    let mut paths = Vec::new();
    for path in files {
        let shown = path.display();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                writeln!(out.stderr, "{shown}: {e}").unwrap();
                out.raise(2);
                continue;
            }
        };
        let file = match parse_file(&text) {
            Ok(f) => f,
            Err(e) => {
                writeln!(out.stderr, "{shown}:{e}").unwrap();
                out.raise(1);
                continue;
            }
        };
        let before = (builder.env().records().count(), builder.env().instances().len(), builder.queries().len());
        let mut next = builder.clone();
        if let Err(e) = next.add_file(&file) {
            writeln!(out.stderr, "{shown}:{}: {}", e.line, e.kind).unwrap();
            out.raise(1);
            continue;
        }
        builder = next;
        paths.push(path.clone());
        if status {
            writeln!(
                out.stdout,
                "{shown}: ok ({} classes, {} instances, {} goals)",
                builder.env().records().count() - before.0,
                builder.env().instances().len() - before.1,
                builder.queries().len() - before.2
            )
            .unwrap();
        }
    }
    let (env, queries) = builder.finish();
    Loaded { paths, env, queries }
}

/// Run with `args` (including the program name) and capture the output.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput { stdout: String::new(), stderr: text, code: 2 }
            } else {
                CliOutput { stdout: text, stderr: String::new(), code: 0 }
            };
        }
    };
    let mut out = CliOutput::default();
    match cli.command {
        Cmd::Check { files } => check(&files, &mut out),
        Cmd::Synth { search, json, files } => synth(&files, &search.config(), json, &mut out),
        Cmd::Lint { linters, search, json, files } => lint(&files, &linters, &search.config(), json, &mut out),
        Cmd::Bench { max_depth, format, fuel } => {
            let rows = bench::run_blowup(
                max_depth,
                &bench::hierarchy(bench::Style::Bundled),
                &bench::hierarchy(bench::Style::Unbundled),
                &bench::bench_config(fuel),
            );
            out.stdout = bench::emit_report(&rows, format);
        }
    }
    out
}

fn check(files: &[PathBuf], out: &mut CliOutput) {
    load(files, out, true);
}

#[derive(Serialize)]
struct SynthRow {
    file: String,
    line: usize,
    goal: String,
    verdict: &'static str,
    term: Option<String>,
    solved: Option<String>,
    stats: Option<SynthStats>,
}

fn synth(files: &[PathBuf], cfg: &SynthConfig, json: bool, out: &mut CliOutput) {
    let l = load(files, out, false);
    if l.queries.is_empty() && !l.paths.is_empty() {
        writeln!(out.stderr, "no #synth goals").unwrap();
        out.raise(1);
    }
    let mut rows = Vec::new();
    for q in &l.queries {
        let env = l.env.truncated(q.visible);
        let r = synthesize(&q.goal, &env, &q.locals, cfg);
        let mut row = SynthRow {
            file: l.paths[q.file].display().to_string(),
            line: q.line,
            goal: render_term(&q.goal),
            verdict: "Found",
            term: None,
            solved: None,
            stats: None,
        };
        match r {
            Ok(res) => {
                row.term = Some(render_term(&res.term));
                row.solved = Some(render_term(&res.goal));
                row.stats = Some(res.stats);
            }
            Err(f) => {
                row.verdict = f.verdict();
                row.stats = f.stats().copied();
                out.raise(1);
            }
        }
        rows.push(row);
    }
    if json {
        out.stdout = serde_json::to_string_pretty(&rows).expect("rows serialize");
        out.stdout.push('\n');
        return;
    }
    let many = l.paths.len() > 1;
    let mut current = String::new();
    for row in &rows {
        if many && row.file != current {
            writeln!(out.stdout, "-- {}", row.file).unwrap();
            current.clone_from(&row.file);
        }
        let applied = row.stats.map_or(0, |s| s.applied);
        match (&row.term, &row.solved) {
            (Some(term), Some(solved)) if *solved != row.goal => {
                writeln!(out.stdout, "#synth {}: found {term} for {solved} (applied={applied})", row.goal).unwrap()
            }
            (Some(term), _) => writeln!(out.stdout, "#synth {}: found {term} (applied={applied})", row.goal).unwrap(),
            (None, _) => writeln!(out.stdout, "#synth {}: {} (applied={applied})", row.goal, row.verdict).unwrap(),
        }
    }
}

fn severity_name(s: Severity) -> &'static str {
    match s {
        Severity::Error => "error",
        Severity::Warning => "warning",
    }
}

fn lint(files: &[PathBuf], linters: &[String], cfg: &SynthConfig, json: bool, out: &mut CliOutput) {
    let selected: Vec<&str> =
        if linters.is_empty() { ALL_LINTERS.to_vec() } else { linters.iter().map(String::as_str).collect() };
    let l = load(files, out, false);
    let findings = run_linters(&l.env, &l.queries, &selected, cfg);
    if findings.iter().any(|f| f.severity == Severity::Error) {
        out.raise(1);
    }
    if json {
        out.stdout = findings_to_json(&findings);
        out.stdout.push('\n');
        return;
    }
    if findings.is_empty() && !l.paths.is_empty() {
        out.stdout.push_str("no findings\n");
    }
    for f in &findings {
        writeln!(out.stdout, "{} [{}] {}: {}", severity_name(f.severity), f.linter, f.subject, f.message).unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    #[test]
    fn synth_line_format() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(dir.path(), "g.tc", "class add_group (A : Type)\ninstance int.add_group : add_group int\n#synth add_group int\n");
        let o = run(["tcsynth", "synth", &f]);
        assert_eq!(o.stdout, "#synth add_group int: found int.add_group (applied=1)\n");
        assert_eq!(o.code, 0);
    }

    #[test]
    fn conflicting_field_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(
            dir.path(),
            "c.tc",
            "set_option old_structure_cmd true\nclass ha (M : Type) := (op : fn2 M, data)\n\
             class hb (M : Type) := (op : fn1 M, data)\nclass both (M : Type) extends ha M, hb M\n",
        );
        let o = run(["tcsynth", "check", &f]);
        assert_eq!(o.code, 1);
        assert!(o.stderr.contains(&format!("{f}:4:")), "{}", o.stderr);
        assert!(o.stderr.contains("conflicting"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let o = run(["tcsynth", "check", "/nonexistent/x.tc"]);
        assert_eq!(o.code, 2);
        assert!(o.stderr.starts_with("/nonexistent/x.tc:"));
    }

    #[test]
    fn bad_flag_is_usage_error() {
        let o = run(["tcsynth", "lint", "--linter", "nope", "x.tc"]);
        assert_eq!(o.code, 2);
        assert!(o.stdout.is_empty());
    }

    #[test]
    fn lint_exit_follows_error_findings() {
        let dir = tempfile::tempdir().unwrap();
        let f = write(
            dir.path(),
            "m.tc",
            "class semiring (R : Type)\nclass add_comm_monoid (M : Type)\nclass module (R M : Type)\n\
             instance module.to_add_comm_monoid {R M : Type} [module R M] : add_comm_monoid M\n",
        );
        let o = run(["tcsynth", "lint", "--linter", "dangerous_instance", "--json", &f]);
        assert_eq!(o.code, 1);
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v[0]["subject"], "module.to_add_comm_monoid");
        let o = run(["tcsynth", "lint", "--linter", "diamond", &f]);
        assert_eq!(o.code, 0);
    }
}
