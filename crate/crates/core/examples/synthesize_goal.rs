//! Answer goals against a small environment and show the search statistics.

use tcsynth::hierarchy::Environment;
use tcsynth::syntax::{parse_file, parse_term};
use tcsynth::synth::{synthesize, LocalInstances, SynthConfig};

const SOURCE: &str = "
class monoid (A : Type) := (mul : fn2 A, data) (one : A, data)
class has_coe_to_fun (F : Type) (α : out_param Type)
instance nat.monoid : monoid nat
instance pointwise_monoid {A : Type} [monoid A] : monoid (set A)
instance list.has_coe_to_fun {A : Type} : has_coe_to_fun (list A) (fn nat A)
";

fn main() {
    let (env, _) = Environment::from_source(&parse_file(SOURCE).unwrap()).unwrap();
    for goal in ["monoid (set (set nat))", "has_coe_to_fun (list int) _", "monoid int"] {
        let g = parse_term(goal).unwrap();
        match synthesize(&g, &env, &LocalInstances::new(), &SynthConfig::default()) {
            Ok(r) => println!("{goal}\n  {} : {}\n  {:?}", r.term, r.goal, r.stats),
            Err(f) => println!("{goal}\n  {} {:?}", f.verdict(), f.stats()),
        }
    }
}
