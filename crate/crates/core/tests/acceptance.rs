//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcsynth::bench::{bench_config, hierarchy, run_blowup, Style, DEFAULT_FUEL};
use tcsynth::cli::run;
use tcsynth::corpus::{default_root, load_corpus, synth_text, Corpus};
use tcsynth::hierarchy::{Environment, Provenance};
use tcsynth::lint::{lint_dangerous, lint_diamond, lint_fails_quickly, run_linters, ALL_LINTERS, DIAMOND};
use tcsynth::syntax::{parse_file, parse_term};
use tcsynth::synth::{check_result, synthesize, LocalInstances, SynthConfig, SynthFailure};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn env_of<'c>(corpus: &'c Corpus, file: &str) -> Result<&'c Environment, String> {
    corpus.entry(file).map(|e| &e.env).ok_or_else(|| format!("{file} not loaded"))
}

fn corpus_conformance() -> Verdict {
    let start = Instant::now();
    let corpus = load_corpus(&default_root());
    ensure(corpus.problems.is_empty(), format!("{:?}", corpus.problems))?;
    let outcomes = corpus.check();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.to_string()).collect();
    ensure(failed.is_empty(), failed.join("; "))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("{} expectations over {} files in {took:.2?}", outcomes.len(), corpus.entries.len()))
}

fn defeq_matching(corpus: &Corpus) -> Verdict {
    let env = env_of(corpus, "02_char_p.tc")?;
    let r = synth_text(env, "char_p (zmod 4) (2 + 2)", &SynthConfig::default())?;
    ensure(r.term.to_string() == "zmod.char_p", format!("found {}", r.term))?;
    Ok(format!("found {}", r.term))
}

fn blowup() -> Verdict {
    let start = Instant::now();
    let rows = run_blowup(6, &hierarchy(Style::Bundled), &hierarchy(Style::Unbundled), &bench_config(DEFAULT_FUEL));
    let took = start.elapsed();
    let size = |style: Style| -> Result<Vec<f64>, String> {
        rows.iter()
            .filter(|r| r.mode == style)
            .map(|r| r.term_size.map(|s| s as f64).ok_or_else(|| format!("{style:?} depth {} failed", r.depth)))
            .collect()
    };
    let (b, u) = (size(Style::Bundled)?, size(Style::Unbundled)?);
    let slope = b[2] - b[1];
    let fit = |d: usize| b[1] + slope * (d as f64 - 1.0);
    let mut problems = Vec::new();
    for (d, &s) in b.iter().enumerate() {
        if s > fit(d) {
            problems.push(format!("bundled depth {d} size {s} above affine fit {}", fit(d)));
        }
    }
    let growth: Vec<String> = (2..u.len()).map(|d| format!("{:.2}", u[d] / u[d - 1])).collect();
    for d in 2..u.len() {
        if u[d] < 2.0 * u[d - 1] {
            problems.push(format!("unbundled depth {d} grew by {:.2}, below 2", u[d] / u[d - 1]));
        }
    }
    if took >= Duration::from_secs(60) {
        problems.push(format!("took {took:?}"));
    }
    let summary = format!("bundled {b:?}, unbundled {u:?}, growth {}", growth.join(" "));
    if problems.is_empty() { Ok(summary) } else { Err(format!("{}; {summary}", problems.join("; "))) }
}

fn loops(corpus: &Corpus) -> Verdict {
    let env = env_of(corpus, "06_unique_loop.tc")?;
    let goal = parse_term("unique nat").map_err(|e| e.to_string())?;
    let none = LocalInstances::new();
    let plain = synthesize(&goal, env, &none, &SynthConfig::default());
    ensure(matches!(plain, Err(SynthFailure::FuelExhausted { .. })), format!("untabled: {plain:?}"))?;
    let tabled = synthesize(&goal, env, &none, &SynthConfig { tabled: true, ..SynthConfig::default() });
    let applied = match &tabled {
        Err(f @ SynthFailure::NotFound { .. }) => f.stats().map_or(0, |s| s.applied),
        other => return Err(format!("tabled: {other:?}")),
    };
    ensure(applied < 50, format!("tabled applied {applied}"))?;
    let env = env_of(corpus, "09_has_bot_loop.tc")?;
    let findings = lint_fails_quickly(env, &SynthConfig::default());
    let cycle = findings
        .iter()
        .find(|f| f.subject == "nonempty")
        .map(|f| f.data["cycle"].clone())
        .ok_or("no fails_quickly finding for nonempty")?;
    ensure(cycle == serde_json::json!(["nonempty", "has_bot", "nonempty"]), format!("cycle {cycle}"))?;
    Ok(format!("FuelExhausted untabled, NotFound tabled after {applied}, cycle {cycle}"))
}

fn dangerous(corpus: &Corpus) -> Verdict {
    let flagged = |file: &str| -> Result<bool, String> {
        let env = env_of(corpus, file)?;
        let inst = env.instance("module.to_add_comm_monoid").ok_or("no projection")?;
        Ok(!lint_dangerous(inst, env).is_empty())
    };
    ensure(flagged("04_module_bundled.tc")?, "bundled module projection not flagged")?;
    ensure(!flagged("04_module_outparam.tc")?, "out_param module projection flagged")?;
    let mut projections = 0;
    for e in &corpus.entries {
        for inst in e.env.instances().iter().filter(|i| i.provenance == Provenance::Projection) {
            projections += 1;
            let f = lint_dangerous(inst, &e.env);
            ensure(f.is_empty(), format!("{}: {} flagged", e.manifest.file, inst.name))?;
        }
    }
    for file in ["03_comm_monoid.tc", "03_comm_monoid_new.tc"] {
        let e = corpus.entry(file).ok_or(format!("{file} not loaded"))?;
        let f = run_linters(&e.env, &e.queries, &ALL_LINTERS, &SynthConfig::default());
        ensure(f.is_empty(), format!("{file}: {} findings", f.len()))?;
    }
    Ok(format!("{projections} generated projections clean"))
}

fn diamonds(corpus: &Corpus) -> Verdict {
    let cfg = SynthConfig::default();
    let count = |file: &str| -> Result<Vec<tcsynth::lint::LintFinding>, String> {
        let e = corpus.entry(file).ok_or(format!("{file} not loaded"))?;
        Ok(run_linters(&e.env, &e.queries, &[DIAMOND], &cfg))
    };
    let clean = count("06_nsmul_diamond.tc")?;
    ensure(clean.is_empty(), format!("nsmul_diamond: {} findings", clean.len()))?;
    let rec = count("06_nsmul_rec.tc")?;
    ensure(rec.len() == 1 && rec[0].data["field"] == "smul", format!("nsmul_rec: {rec:?}"))?;
    let env = env_of(corpus, "03_comm_monoid_new.tc")?;
    let goal = parse_term("comm_monoid nat").map_err(|e| e.to_string())?;
    let f = lint_diamond(env, &goal, &cfg);
    ensure(f.is_empty(), format!("comm_monoid_new: {f:?}"))?;
    Ok("one smul diamond, no false positives".into())
}

fn random_agreement() -> Verdict {
    let locals = LocalInstances::new();
    let cfg = SynthConfig::default();
    let mut goals = 0;
    for seed in 0..500 {
        let spec = common::random_env(&mut ChaCha8Rng::seed_from_u64(seed), 6, 10);
        let text = spec.render();
        let file = parse_file(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        let env = Environment::from_source(&file).map_err(|e| format!("seed {seed}: {e}"))?.0;
        for (c, args) in spec.goals() {
            let goal = spec.goal_term(c, &args);
            let expected = spec.derivable(c, &args, 4);
            match synthesize(&goal, &env, &locals, &cfg) {
                Ok(r) => {
                    ensure(expected, format!("seed {seed}: {goal} found but not derivable"))?;
                    ensure(check_result(&goal, &r, &env), format!("seed {seed}: {} does not check", r.term))?;
                }
                Err(f) => ensure(!expected && f.verdict() == "NotFound", format!("seed {seed}: {goal} {}", f.verdict()))?,
            }
            goals += 1;
        }
    }
    Ok(format!("500 environments, {goals} goals"))
}

fn determinism() -> Verdict {
    let mut files: Vec<String> = std::fs::read_dir(default_root())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tc"))
        .map(|p| p.display().to_string())
        .collect();
    files.sort();
    for f in &files {
        for cmd in ["check", "synth", "lint"] {
            let args = ["tcsynth", cmd, "--json", f.as_str()];
            let args: Vec<&str> = if cmd == "check" { vec!["tcsynth", cmd, f] } else { args.to_vec() };
            ensure(run(args.clone()) == run(args.clone()), format!("{cmd} {f} differs between runs"))?;
        }
    }
    Ok(format!("{} files, check/synth/lint", files.len()))
}

fn main() -> ExitCode {
    let corpus = load_corpus(&default_root());
    let criteria: [(&str, &dyn Fn() -> Verdict); 8] = [
        ("corpus conformance", &corpus_conformance),
        ("definitional matching of goal arguments", &|| defeq_matching(&corpus)),
        ("term-size blowup, bundled vs unbundled", &blowup),
        ("looping searches are contained", &|| loops(&corpus)),
        ("dangerous instances", &|| dangerous(&corpus)),
        ("non-commuting diamonds", &|| diamonds(&corpus)),
        ("random environments agree with brute force", &random_agreement),
        ("deterministic output", &determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
