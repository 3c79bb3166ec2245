//! The private attack under tipset and longest-chain rules.
//!
//! cargo run --release --example private_attack

use ecsim::analysis::sweep;
use ecsim::{ExperimentConfig, Mitigation, Strategy};

fn main() {
    let cfg = ExperimentConfig {
        m: vec![1.0, 5.0],
        beta: vec![0.2, 0.3, 0.4],
        strategy: vec![Strategy::Private],
        mitigation: vec![Mitigation::None, Mitigation::LongestChain],
        epochs: 500,
        trials: 100,
        seed: 3,
        ..Default::default()
    };
    println!("{:>4} {:>5} {:>15} {:>8} {:>18}", "m", "beta", "rule", "success", "95% CI");
    for row in sweep(&cfg).unwrap() {
        let rule = match row.mitigation {
            Mitigation::LongestChain => "longest-chain",
            _ => "tipset",
        };
        println!(
            "{:>4} {:>5} {:>15} {:>8.3}   [{:.3}, {:.3}]",
            row.m, row.beta, rule, row.success_rate, row.ci_low, row.ci_high
        );
    }
}
