//! Security thresholds of the split attack across expected leader counts.
//!
//! cargo run --example threshold

use ecsim::analysis::{solve_threshold, split_growth_rate};
use ecsim::SplitVariant;

fn main() {
    println!("{:>4} {:>10} {:>12}", "m", "tiebreak", "notiebreak");
    for m in [1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0] {
        let tb = solve_threshold(m, SplitVariant::TieBreak).unwrap();
        let ntb = solve_threshold(m, SplitVariant::NoTieBreak).unwrap();
        println!("{m:>4} {tb:>10.4} {ntb:>12.4}");
    }

    // Below beta* the honest side of a split outgrows the attacker.
    let m = 5.0;
    println!("\nm = {m}, tiebreak: honest split growth vs attacker rate");
    for beta in [0.10, 0.15, 0.20, 0.25, 0.30] {
        let g = split_growth_rate(m, beta, SplitVariant::TieBreak);
        println!("beta {beta:.2}: honest {g:.3}, attacker {:.3}", beta * m);
    }
}
