//! Persistence and liveness checks on an honest run and on a successful attack.
//!
//! cargo run --release --example ledger

use ecsim::analysis::{check_ledger, ViolationKind};
use ecsim::{simulate, ExperimentConfig, SplitVariant, Strategy};

fn main() {
    for (strategy, beta) in [(Strategy::Null, 0.2), (Strategy::NSplit(SplitVariant::TieBreak), 0.3)] {
        let cfg = ExperimentConfig {
            beta: vec![beta],
            strategy: vec![strategy],
            ..Default::default()
        };
        let (trace, net, adv) = simulate(cfg.world_config(&cfg.cells()[0], 4), 1500).unwrap();
        let chk = check_ledger(&trace, net.dag(), cfg.tau, cfg.liveness_u);
        println!(
            "{strategy} beta {beta}: {} persistence, {} liveness violations; released at {:?}",
            chk.count(ViolationKind::Persistence),
            chk.count(ViolationKind::Liveness),
            adv.released_at()
        );
        if let Some(v) = chk.first(ViolationKind::Persistence) {
            println!("  first: epoch {} node {} lost the anchor confirmed at epoch {}", v.epoch, v.node, v.at);
        }
    }
}
