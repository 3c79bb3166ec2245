//! A small parameter sweep written as a summary CSV on stdout.
//!
//! cargo run --release --example sweep > summary.csv

use ecsim::analysis::sweep;
use ecsim::io::write_summary_csv;
use ecsim::{ExperimentConfig, SplitVariant, Strategy};

fn main() {
    let cfg = ExperimentConfig {
        m: vec![3.0, 5.0],
        beta: vec![0.15, 0.2, 0.25, 0.3],
        strategy: vec![Strategy::NSplit(SplitVariant::TieBreak), Strategy::NSplit(SplitVariant::NoTieBreak)],
        epochs: 1000,
        trials: 40,
        seed: 1,
        ..Default::default()
    };
    let rows = sweep(&cfg).unwrap();
    write_summary_csv(&rows, std::io::stdout().lock()).unwrap();
}
