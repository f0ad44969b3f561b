//! Record layouts of `comm_monoid` with old-style and new-style structures.

use tcsynth::bench::{hierarchy, Style};
use tcsynth::corpus::{default_root, load_corpus};

fn main() {
    let corpus = load_corpus(&default_root());
    for file in ["03_comm_monoid.tc", "03_comm_monoid_new.tc"] {
        let env = &corpus.entry(file).expect("corpus entry").env;
        let c = env.class("comm_monoid").unwrap();
        let fields: Vec<&str> = c.fields.iter().map(|f| f.name.as_str()).collect();
        println!("{file} ({:?}): {}", c.mode, fields.join(", "));
    }
    let unbundled = hierarchy(Style::Unbundled);
    let c = unbundled.class("comm_monoid").unwrap();
    println!("unbundled comm_monoid takes {} instance parameters", c.constraints.len());
}
