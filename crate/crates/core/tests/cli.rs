use std::path::PathBuf;
use std::process::Command;

use tcsynth::cli::run;
use tcsynth::corpus::default_root;

fn corpus_file(name: &str) -> String {
    default_root().join(name).display().to_string()
}

fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(default_root())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tc"))
        .collect();
    v.sort();
    v
}

#[test]
fn check_accepts_each_corpus_file() {
    for p in corpus_files() {
        let p = p.display().to_string();
        let o = run(["tcsynth", "check", &p]);
        assert_eq!(o.code, 0, "{p}: {}", o.stderr);
        assert!(o.stdout.starts_with(&format!("{p}: ok (")), "{}", o.stdout);
    }
}

#[test]
fn redeclared_class_across_files_fails_the_later_file() {
    let a = corpus_file("03_comm_monoid.tc");
    let b = corpus_file("03_comm_monoid_new.tc");
    let o = run(["tcsynth", "check", &a, &b]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains(&format!("{a}: ok")));
    assert!(o.stderr.starts_with(&format!("{b}:")), "{}", o.stderr);
}

#[test]
fn conflicting_field_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.tc");
    std::fs::write(
        &p,
        "set_option old_structure_cmd true\n\nclass ha (M : Type) := (op : fn2 M, data)\nclass hb (M : Type) := (op : fn1 M, data)\nclass both (M : Type) extends ha M, hb M\n",
    )
    .unwrap();
    let p = p.display().to_string();
    let o = run(["tcsynth", "check", &p]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.starts_with(&format!("{p}:5:")), "{}", o.stderr);
}

#[test]
fn parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.tc");
    std::fs::write(&p, "class a (M : Type)\ninstance : a nat := {\n").unwrap();
    let p = p.display().to_string();
    let o = run(["tcsynth", "synth", &p]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.starts_with(&format!("{p}:2:")), "{}", o.stderr);
}

#[test]
fn nonexistent_path_is_exit_two() {
    for cmd in ["check", "synth", "lint"] {
        let o = run(["tcsynth", cmd, "/definitely/not/here.tc"]);
        assert_eq!(o.code, 2, "{cmd}");
    }
}

#[test]
fn unique_loop_runs_out_of_fuel_unless_tabled() {
    let f = corpus_file("06_unique_loop.tc");
    let o = run(["tcsynth", "synth", &f]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("#synth unique nat: FuelExhausted"), "{}", o.stdout);
    let o = run(["tcsynth", "synth", "--tabled", &f]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("#synth unique nat: NotFound"), "{}", o.stdout);
}

#[test]
fn char_p_goal_is_found() {
    let o = run(["tcsynth", "synth", "--json", &corpus_file("02_char_p.tc")]);
    let rows: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(rows[0]["goal"], "char_p (zmod 4) (2 + 2)");
    assert_eq!(rows[0]["verdict"], "Found");
    assert_eq!(rows[0]["term"], "zmod.char_p");
    assert_eq!(rows[2]["verdict"], "NotFound");
    assert_eq!(o.code, 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let files: Vec<String> = corpus_files().iter().map(|p| p.display().to_string()).collect();
    for f in &files {
        for args in [vec!["check"], vec!["synth"], vec!["synth", "--json"], vec!["lint"], vec!["lint", "--json"]] {
            let mut argv = vec!["tcsynth"];
            argv.extend(args.iter().copied());
            argv.push(f);
            assert_eq!(run(argv.clone()), run(argv.clone()), "{argv:?}");
        }
    }
}

#[test]
fn lint_json_parses_and_exit_tracks_errors() {
    let o = run(["tcsynth", "lint", "--json", &corpus_file("06_nsmul_rec.tc")]);
    assert_eq!(o.code, 1);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    let diamonds: Vec<_> = v.as_array().unwrap().iter().filter(|f| f["linter"] == "diamond").collect();
    assert_eq!(diamonds.len(), 1);
    assert_eq!(diamonds[0]["data"]["field"], "smul");

    let o = run(["tcsynth", "lint", &corpus_file("06_nsmul_diamond.tc")]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert_eq!(o.stdout, "no findings\n");
}

#[test]
fn bench_formats_parse() {
    let o = run(["tcsynth", "bench", "--max-depth", "2", "--format", "json"]);
    assert_eq!(o.code, 0);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    let o = run(["tcsynth", "bench", "--max-depth", "2", "--format", "csv"]);
    assert_eq!(o.stdout.lines().count(), 7);
}

#[test]
fn fuel_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_tcsynth");
    let f = corpus_file("06_unique_loop.tc");
    let out = Command::new(bin).args(["synth", "--json", &f]).env("TCSYNTH_FUEL", "1000").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["verdict"], "FuelExhausted");
    assert_eq!(v[0]["stats"]["applied"], 1000);

    let out = Command::new(bin).args(["synth", "--fuel", "77", "--json", &f]).env("TCSYNTH_FUEL", "1000").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["stats"]["applied"], 77);
}

#[test]
fn binary_matches_library_output() {
    let bin = env!("CARGO_BIN_EXE_tcsynth");
    let f = corpus_file("02_add_group.tc");
    let out = Command::new(bin).args(["synth", &f]).env_remove("TCSYNTH_FUEL").output().unwrap();
    let lib = run(["tcsynth", "synth", &f]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.stdout);
    assert_eq!(out.status.code(), Some(lib.code));
}
