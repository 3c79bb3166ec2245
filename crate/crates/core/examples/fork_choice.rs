//! Tipset weights and how each tie-break policy resolves an equal-weight fork.
//!
//! cargo run --example fork_choice

use ecsim::chain::{chain_of, fork_choice, fork_choice_hinted, weight};
use ecsim::election::{mock_vrf_prove, ElectionRules, ADVERSARY_ID_BASE};
use ecsim::{Block, BlockDag, TieBreakPolicy, TipsetKey};

const SEED: u64 = 7;

fn mine(dag: &mut BlockDag, epoch: u64, miner: u32, parents: &TipsetKey, adversarial: bool) -> Block {
    let b = Block::new(epoch, miner, parents.clone(), mock_vrf_prove(miner, epoch, SEED), adversarial, 0);
    dag.insert(b.clone()).unwrap();
    b
}

fn main() {
    let mut dag = BlockDag::new(ElectionRules { seed: SEED, target: None });
    let g = dag.genesis_key();

    // Honest side: two leaders at epoch 1 share a tipset of weight 3.
    let a = mine(&mut dag, 1, 0, &g, false);
    let b = mine(&mut dag, 1, 1, &g, false);
    let honest = TipsetKey::from_ids(vec![a.id(), b.id()]);

    // Adversarial side: one block per epoch, also weight 3 after two epochs.
    let c = mine(&mut dag, 1, ADVERSARY_ID_BASE, &g, true);
    let c_key = TipsetKey::from_ids(vec![c.id()]);
    let d = mine(&mut dag, 2, ADVERSARY_ID_BASE | 1, &c_key, true);
    let adv = TipsetKey::from_ids(vec![d.id()]);

    for (name, t) in [("honest", &honest), ("adversarial", &adv)] {
        let chain = chain_of(t, &dag).unwrap();
        println!("{name:>12}: weight {} sizes {:?}", weight(t, &dag).unwrap(), chain.sizes());
    }

    let views = [honest.clone(), adv.clone()];
    for policy in [TieBreakPolicy::AdversaryFavoring, TieBreakPolicy::MinProof] {
        let pick = fork_choice(&dag, &views, policy).unwrap();
        println!("{policy:?} picks the {} tip", if pick == honest { "honest" } else { "adversarial" });
    }
    // A hint names a tip among the tied; a hint outside the tie is ignored.
    let hinted = fork_choice_hinted(&dag, &views, TieBreakPolicy::AdversaryFavoring, Some(&honest)).unwrap();
    println!("hinted at honest: picks {}", if hinted == honest { "honest" } else { "adversarial" });

    // One more honest block breaks the tie outright.
    let e = mine(&mut dag, 2, 2, &honest, false);
    let heavier = TipsetKey::from_ids(vec![e.id()]);
    let pick = fork_choice_hinted(&dag, &[heavier.clone(), adv], TieBreakPolicy::AdversaryFavoring, None).unwrap();
    assert_eq!(pick, heavier);
    println!("after epoch 2 the honest chain weighs {}", weight(&heavier, &dag).unwrap());
}
