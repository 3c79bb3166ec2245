//! The split attack against the plain protocol and both mitigations.
//!
//! cargo run --release --example mitigations

use ecsim::analysis::sweep;
use ecsim::{ExperimentConfig, Mitigation, SplitVariant, Strategy};

fn main() {
    let cfg = ExperimentConfig {
        beta: vec![0.25, 0.3],
        strategy: vec![Strategy::NSplit(SplitVariant::TieBreak)],
        mitigation: vec![Mitigation::None, Mitigation::ConsistentBroadcast, Mitigation::LongestChain],
        epochs: 1500,
        trials: 100,
        seed: 2024,
        ..Default::default()
    };
    println!("{:>5} {:>22} {:>8} {:>18}", "beta", "mitigation", "success", "95% CI");
    for row in sweep(&cfg).unwrap() {
        println!(
            "{:>5} {:>22} {:>8.3}   [{:.3}, {:.3}]",
            row.beta, row.mitigation, row.success_rate, row.ci_low, row.ci_high
        );
    }
}
