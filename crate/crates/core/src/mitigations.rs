//! Protocol variants that blunt equivocation: consistent broadcast with two
//! cutoffs, and single-parent longest-chain blocks.

use std::fmt;
use std::str::FromStr;

use crate::chain::{Block, BlockId, TipsetKey};
use crate::election::{ElectionProof, MinerId};
use crate::netsim::{simulate, NetError, Trace, WorldConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mitigation {
    None,
    ConsistentBroadcast,
    LongestChain,
}

impl Mitigation {
    pub fn name(&self) -> &'static str {
        match self {
            Mitigation::None => "none",
            Mitigation::ConsistentBroadcast => "consistent-broadcast",
            Mitigation::LongestChain => "longest-chain",
        }
    }
}

impl fmt::Display for Mitigation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Mitigation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Mitigation::None),
            "consistent-broadcast" => Ok(Mitigation::ConsistentBroadcast),
            "longest-chain" => Ok(Mitigation::LongestChain),
            other => Err(format!("unknown mitigation `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbPhase {
    BeforeFirstCutoff,
    BetweenCutoffs,
    AfterSecondCutoff,
}

/// One node's arrivals for the current epoch.
#[derive(Clone, Debug, Default)]
pub struct CbNodeState {
    pub pending: Vec<(BlockId, [u8; 32])>,
    pub rejected: Vec<(BlockId, [u8; 32])>,
    pub accepted: Vec<BlockId>,
}

/// Sorts arrivals into pending and rejected, then drops from pending every
/// block whose proof shows up under two or more ids. What remains is what
/// the node may build tipsets from.
pub fn cb_epoch_step(node: &mut CbNodeState, arrivals: &[(&Block, CbPhase)]) -> Vec<BlockId> {
    for (b, phase) in arrivals {
        let entry = (b.id(), b.proof().p);
        match phase {
            CbPhase::BeforeFirstCutoff => node.pending.push(entry),
            CbPhase::BetweenCutoffs => node.rejected.push(entry),
            // Too late to matter this epoch; re-broadcast brings it back next epoch.
            CbPhase::AfterSecondCutoff => {}
        }
    }
    let mut seen: Vec<(BlockId, [u8; 32])> = node.pending.iter().chain(&node.rejected).copied().collect();
    seen.sort_unstable_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    seen.dedup();
    let multiplicity = |p: &[u8; 32]| seen.iter().filter(|(_, q)| q == p).count();
    let mut accepted: Vec<BlockId> = node
        .pending
        .iter()
        .filter(|(_, p)| multiplicity(p) == 1)
        .map(|(id, _)| *id)
        .collect();
    accepted.sort_unstable();
    accepted.dedup();
    node.accepted = accepted.clone();
    accepted
}

/// A longest-chain block: exactly one parent block.
#[derive(Clone, Debug, PartialEq)]
pub struct LcBlock(Block);

impl LcBlock {
    pub fn new(epoch: u64, miner: MinerId, parent: BlockId, proof: ElectionProof, adversarial: bool) -> Self {
        LcBlock(Block::new(epoch, miner, TipsetKey::from_ids(vec![parent]), proof, adversarial, 0))
    }

    pub fn parent(&self) -> BlockId {
        self.0.parents().ids()[0]
    }

    pub fn block(&self) -> &Block {
        &self.0
    }

    pub fn into_block(self) -> Block {
        self.0
    }
}

/// Runs one trial with the mitigation swapped in.
pub fn run_with_mitigation(mut cfg: WorldConfig, mitigation: Mitigation, epochs: u64) -> Result<Trace, NetError> {
    cfg.mitigation = mitigation;
    simulate(cfg, epochs).map(|(t, _, _)| t)
}
