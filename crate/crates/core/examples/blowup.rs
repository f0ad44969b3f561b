//! Term size of `comm_monoid` on nested products, bundled vs unbundled.

use tcsynth::bench::{bench_config, emit_report, hierarchy, run_blowup, ReportFormat, Style, DEFAULT_FUEL};

fn main() {
    let depth = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let rows = run_blowup(depth, &hierarchy(Style::Bundled), &hierarchy(Style::Unbundled), &bench_config(DEFAULT_FUEL));
    print!("{}", emit_report(&rows, ReportFormat::Table));
}
