//! Run every linter over the module and nsmul corpus files.

use tcsynth::corpus::{default_root, load_corpus};
use tcsynth::lint::{findings_to_json, run_linters, ALL_LINTERS};
use tcsynth::synth::SynthConfig;

fn main() {
    let corpus = load_corpus(&default_root());
    for file in ["04_module_bundled.tc", "04_module_outparam.tc", "06_nsmul_rec.tc", "09_has_bot_loop.tc"] {
        let e = corpus.entry(file).expect("corpus entry");
        let findings = run_linters(&e.env, &e.queries, &ALL_LINTERS, &SynthConfig::default());
        println!("== {file}\n{}", findings_to_json(&findings));
    }
}
