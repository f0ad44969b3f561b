//! Load the bundled corpus and check every manifest expectation.

use tcsynth::corpus::{default_root, load_corpus};

fn main() {
    let corpus = load_corpus(&default_root());
    let outcomes = corpus.check();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        println!("{o}");
    }
    println!("{} entries, {} expectations, {failed} failed", corpus.entries.len(), outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
