mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tcsynth::hierarchy::Environment;
use tcsynth::lint::lint_fails_quickly;
use tcsynth::syntax::parse_file;
use tcsynth::synth::{check_result, synthesize, LocalInstances, SynthConfig};

use common::{random_env, EnvSpec};

fn build(spec: &EnvSpec) -> Environment {
    let text = spec.render();
    let file = parse_file(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    Environment::from_source(&file).unwrap_or_else(|e| panic!("{e}\n{text}")).0
}

fn specs(n: u64) -> impl Iterator<Item = EnvSpec> {
    (0..n).map(|seed| random_env(&mut ChaCha8Rng::seed_from_u64(seed), 6, 10))
}

#[test]
fn verdicts_match_brute_force() {
    let locals = LocalInstances::new();
    let cfg = SynthConfig::default();
    let mut found = 0;
    let mut goals = 0;
    for spec in specs(500) {
        let env = build(&spec);
        for (c, args) in spec.goals() {
            let goal = spec.goal_term(c, &args);
            let expected = spec.derivable(c, &args, 4);
            let r = synthesize(&goal, &env, &locals, &cfg);
            match &r {
                Ok(res) => {
                    assert!(expected, "engine found {} for {goal} but the oracle did not\n{}", res.term, spec.render());
                    assert!(check_result(&goal, res, &env), "{} does not inhabit {goal}", res.term);
                    found += 1;
                }
                Err(f) => assert!(
                    !expected && f.verdict() == "NotFound",
                    "{goal}: {} but oracle says {expected}\n{}",
                    f.verdict(),
                    spec.render()
                ),
            }
            goals += 1;
        }
    }
    assert!(found > goals / 20, "too few successes to be meaningful: {found}/{goals}");
}

#[test]
fn tabled_agrees_and_search_is_deterministic() {
    let locals = LocalInstances::new();
    let plain = SynthConfig::default();
    let tabled = SynthConfig { tabled: true, ..plain };
    for spec in specs(200) {
        let env = build(&spec);
        for (c, args) in spec.goals() {
            let goal = spec.goal_term(c, &args);
            let a = synthesize(&goal, &env, &locals, &plain);
            assert_eq!(a, synthesize(&goal, &env, &locals, &plain));
            let b = synthesize(&goal, &env, &locals, &tabled);
            assert_eq!(a.is_ok(), b.is_ok(), "{goal}\n{}", spec.render());
        }
    }
}

#[test]
fn acyclic_environments_fail_quickly() {
    for spec in specs(200) {
        let env = build(&spec);
        let findings = lint_fails_quickly(&env, &SynthConfig::default());
        assert!(findings.is_empty(), "{findings:?}\n{}", spec.render());
    }
}
