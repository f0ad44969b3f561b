//! The unique/subsingleton loop with and without tabling.

use tcsynth::corpus::{default_root, load_corpus};
use tcsynth::synth::{synthesize, SynthConfig};

fn main() {
    let corpus = load_corpus(&default_root());
    let entry = corpus.entry("06_unique_loop.tc").expect("corpus entry");
    let q = &entry.queries[0];
    for tabled in [false, true] {
        let cfg = SynthConfig { fuel: 1000, tabled, ..SynthConfig::default() };
        let r = synthesize(&q.goal, &entry.env, &q.locals, &cfg);
        let f = r.expect_err("no instance exists");
        let applied = f.stats().map_or(0, |s| s.applied);
        println!("tabled={tabled}: {} after {applied} applications", f.verdict());
        if let Some(t) = f.chain().get(..6) {
            let path: Vec<String> = t.iter().map(ToString::to_string).collect();
            println!("  {} …", path.join(" → "));
        }
    }
}
