//! Nakamoto epochs: detection over leader draws and the check that their blocks stick.
//!
//! cargo run --release --example nakamoto

use ecsim::analysis::{check_lemma1, derive_series, detect_nakamoto, series_from_draws};
use ecsim::{simulate, ExperimentConfig, SplitVariant, Strategy};

fn main() {
    println!("Nakamoto epochs per 10^5 epochs, m = 5:");
    for beta in [0.0, 0.05, 0.1, 0.15] {
        let s = series_from_draws(9, 5.0, beta, 100_000).unwrap();
        let r = detect_nakamoto(&s, 100_000).unwrap();
        println!("  beta {beta:.2}: {:>5} (isolated successful {})", r.epochs.len(), s.isolated_successful().len());
    }

    // At m = 1 they are common enough to watch under attack.
    let cfg = ExperimentConfig {
        m: vec![1.0],
        beta: vec![0.1],
        strategy: vec![Strategy::NSplit(SplitVariant::TieBreak)],
        ..Default::default()
    };
    let (trace, net, _) = simulate(cfg.world_config(&cfg.cells()[0], 5), 3000).unwrap();
    let series = derive_series(&trace);
    let report = detect_nakamoto(&series, 3000).unwrap();
    let broken = check_lemma1(&trace, net.dag(), &report);
    println!("\nsplit attack at m = 1, beta = 0.1: {} Nakamoto epochs, {} later orphaned", report.epochs.len(), broken.len());
    for e in report.epochs.iter().take(5) {
        println!("  epoch {:>5}, margin {:?}", e.epoch, e.witness);
    }
}
