//! Follows one split attack epoch by epoch until it releases or runs out.
//!
//! cargo run --release --example nsplit [beta]

use ecsim::analysis::solve_threshold;
use ecsim::{ExperimentConfig, SplitVariant, Strategy, World};

fn main() {
    let beta: f64 = std::env::args().nth(1).map_or(0.3, |s| s.parse().expect("beta"));
    let cfg = ExperimentConfig {
        beta: vec![beta],
        strategy: vec![Strategy::NSplit(SplitVariant::TieBreak)],
        ..Default::default()
    };
    let mut world = World::new(cfg.world_config(&cfg.cells()[0], 11)).unwrap();
    println!("m = 5, beta = {beta}, threshold {:.3}", solve_threshold(5.0, SplitVariant::TieBreak).unwrap());
    println!("{:>6} {:>9} {:>6} {:>6} {:>5}", "epoch", "phase", "lead", "W_max", "tips");
    let mut last_phase = None;
    for _ in 0..2000 {
        let rec = world.run_epoch().unwrap().clone();
        let phase = world.adversary().phase();
        if last_phase != Some(phase) || rec.epoch.is_multiple_of(100) || rec.released {
            println!("{:>6} {:>9} {:>6} {:>6} {:>5}", rec.epoch, format!("{phase:?}"), rec.lead, rec.w_max, rec.distinct_tips);
        }
        last_phase = Some(phase);
        if rec.released {
            println!("released at epoch {}: every view moved to the private chain", rec.epoch);
            return;
        }
    }
    println!("no release within 2000 epochs");
}
