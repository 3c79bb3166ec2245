//! Adversary strategies: null, private attack, and the n-split attack.
//!
//! The private chain is seeded by the *bootstrap* rule: each epoch the
//! adversary either extends its private tip or re-forks onto the heaviest
//! public tip, whichever leaves the larger lead. Once the lead reaches
//! `lead_bootstrap`, the n-split strategies start equivocating to keep honest
//! nodes on disjoint chains while every adversarial proof keeps extending the
//! private chain. A release publishes the private chain as soon as it is at
//! least as heavy as anything honest and it would knock out a block some node
//! holds as confirmed.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::ledger::confirmed_anchor;
use crate::chain::{weight, Block, BlockId, TieBreakPolicy, TipsetKey};
use crate::election::ElectionProof;
use crate::mitigations::Mitigation;
use crate::netsim::{ChainMode, DeliveryPhase, Net, Observation, Recipients, StrategyDecision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplitVariant {
    /// Copies join honest tipsets; each split chain grows by two per successful epoch.
    NoTieBreak,
    /// Copies sit alone and win ties; each split chain grows by one per successful epoch.
    TieBreak,
}

impl FromStr for SplitVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tiebreak" => Ok(SplitVariant::TieBreak),
            "notiebreak" => Ok(SplitVariant::NoTieBreak),
            other => Err(format!("unknown variant `{other}` (expected tiebreak or notiebreak)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Null,
    Private,
    NSplit(SplitVariant),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Null => "null",
            Strategy::Private => "private",
            Strategy::NSplit(SplitVariant::NoTieBreak) => "nsplit-notiebreak",
            Strategy::NSplit(SplitVariant::TieBreak) => "nsplit-tiebreak",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "null" => Ok(Strategy::Null),
            "private" => Ok(Strategy::Private),
            "nsplit-notiebreak" => Ok(Strategy::NSplit(SplitVariant::NoTieBreak)),
            "nsplit-tiebreak" => Ok(Strategy::NSplit(SplitVariant::TieBreak)),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("no adversarial leader in epoch {0} while honest blocks were mined; split degrades")]
    InsufficientLeaders(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryConfig {
    pub strategy: Strategy,
    /// Confirmation depth the attack targets.
    pub tau: u64,
    /// Lead required before splitting starts.
    pub lead_bootstrap: i64,
    /// Keep the split from the first epoch regardless of lead, and never release.
    pub hold_split: bool,
}

impl AdversaryConfig {
    pub fn new(strategy: Strategy) -> Self {
        AdversaryConfig {
            strategy,
            tau: 20,
            lead_bootstrap: 4,
            hold_split: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Bootstrap,
    Split,
    /// The private chain was released; the adversary now mines honestly.
    Done,
}

#[derive(Clone, Debug)]
pub struct Adversary {
    cfg: AdversaryConfig,
    nodes: usize,
    phase: Phase,
    private_tip: Option<TipsetKey>,
    private_weight: u64,
    unreleased: Vec<BlockId>,
    lead: i64,
    lead_history: Vec<i64>,
    attack_start: Option<u64>,
    released_at: Option<u64>,
    equivocations: u64,
    /// Distinct election proofs used per epoch, for budget checks.
    proofs_used: Vec<u32>,
    pub(crate) pending_notes: Vec<String>,
}

impl Adversary {
    pub fn new(cfg: AdversaryConfig, nodes: usize) -> Self {
        let phase = if cfg.hold_split && matches!(cfg.strategy, Strategy::NSplit(_)) {
            Phase::Split
        } else {
            Phase::Bootstrap
        };
        Adversary {
            cfg,
            nodes,
            phase,
            private_tip: None,
            private_weight: 0,
            unreleased: Vec::new(),
            lead: 0,
            lead_history: Vec::new(),
            attack_start: None,
            released_at: None,
            equivocations: 0,
            proofs_used: Vec::new(),
            pending_notes: Vec::new(),
        }
    }

    pub fn config(&self) -> &AdversaryConfig {
        &self.cfg
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn private_tip(&self) -> Option<&TipsetKey> {
        self.private_tip.as_ref()
    }
    pub fn private_weight(&self) -> u64 {
        self.private_weight
    }
    pub fn unreleased(&self) -> &[BlockId] {
        &self.unreleased
    }
    pub fn lead(&self) -> i64 {
        self.lead
    }
    pub fn lead_history(&self) -> &[i64] {
        &self.lead_history
    }
    pub fn attack_start(&self) -> Option<u64> {
        self.attack_start
    }
    pub fn released_at(&self) -> Option<u64> {
        self.released_at
    }
    pub fn equivocations(&self) -> u64 {
        self.equivocations
    }
    pub fn proofs_used(&self) -> &[u32] {
        &self.proofs_used
    }

    /// Recomputes `L = private weight - W_max` after end-of-epoch fork choice
    /// and advances the attack phase.
    pub fn update_lead(&mut self, net: &Net) -> i64 {
        let (_, w_max) = net.bounds();
        self.lead = match (self.cfg.strategy, self.phase) {
            (Strategy::Null, _) | (_, Phase::Done) => 0,
            _ => self.private_weight as i64 - w_max as i64,
        };
        self.lead_history.push(self.lead);
        if let Strategy::NSplit(_) = self.cfg.strategy {
            match self.phase {
                Phase::Bootstrap if self.lead >= self.cfg.lead_bootstrap => {
                    self.phase = Phase::Split;
                    self.attack_start = Some(self.lead_history.len() as u64 + 1);
                }
                Phase::Split if self.lead <= 0 && !self.cfg.hold_split => self.phase = Phase::Bootstrap,
                _ => {}
            }
        }
        self.lead
    }

    pub fn decide(&mut self, net: &Net, obs: &Observation) -> StrategyDecision {
        let mut d = StrategyDecision {
            hints: vec![None; self.nodes],
            ..Default::default()
        };
        let strategy = if self.phase == Phase::Done { Strategy::Null } else { self.cfg.strategy };
        match strategy {
            Strategy::Null => step_null(net, obs, &mut d),
            Strategy::Private => self.step_private(net, obs, &mut d),
            Strategy::NSplit(v) => self.step_nsplit(net, obs, v, &mut d),
        }
        self.equivocations += d.equivocations() as u64;
        let mut proofs: Vec<[u8; 32]> = d.blocks.iter().map(|b| b.proof().p).collect();
        proofs.sort_unstable();
        proofs.dedup();
        self.proofs_used.push(proofs.len() as u32);
        d
    }

    fn private_tip_or_genesis(&self, net: &Net) -> TipsetKey {
        self.private_tip.clone().unwrap_or_else(|| net.dag().genesis_key())
    }

    /// Weight gained by putting this epoch's proofs on one private tipset.
    fn gain(net: &Net, z: usize) -> u64 {
        match net.mode() {
            ChainMode::Tipset => z as u64,
            ChainMode::LongestChain => z.min(1) as u64,
        }
    }

    /// Bootstrap rule: extend the private tip, or re-fork onto the heaviest
    /// public tip when that leaves a strictly larger lead.
    fn maybe_refork(&mut self, net: &Net) {
        let mut best: Option<(u64, &TipsetKey)> = None;
        for j in 0..net.node_count() {
            let (w, t) = (net.tip_weight(j), net.tip(j));
            if best.is_none_or(|(bw, bt)| w > bw || (w == bw && t < bt)) {
                best = Some((w, t));
            }
        }
        let (pw, p) = best.expect("at least one node");
        if self.private_tip.is_none() || pw > self.private_weight {
            self.private_tip = Some(p.clone());
            self.private_weight = pw;
            self.unreleased.clear();
        }
    }

    /// Puts all of this epoch's proofs on one tipset over the private tip.
    fn extend_private(&mut self, net: &Net, obs: &Observation, d: &mut StrategyDecision) {
        if obs.proofs.is_empty() {
            return;
        }
        let parent = self.private_tip_or_genesis(net);
        let used = match net.mode() {
            ChainMode::Tipset => obs.proofs.len(),
            ChainMode::LongestChain => 1,
        };
        let blocks: Vec<Block> = obs.proofs[..used]
            .iter()
            .map(|p| Block::new(obs.epoch, p.miner, parent.clone(), *p, true, 0))
            .collect();
        let key = TipsetKey::from_ids(blocks.iter().map(|b| b.id()).collect());
        self.unreleased.extend(blocks.iter().map(|b| b.id()));
        self.private_weight = weight(&parent, net.dag()).unwrap_or(self.private_weight) + Self::gain(net, used);
        self.private_tip = Some(key);
        d.blocks.extend(blocks);
    }

    /// Publishes the private chain if it now wins fork choice everywhere and
    /// displaces a block some node already holds as confirmed.
    fn try_release(&mut self, net: &Net, obs: &Observation, d: &mut StrategyDecision) -> bool {
        if self.cfg.hold_split || self.unreleased.is_empty() {
            return false;
        }
        let Some(tip) = self.private_tip.clone() else {
            return false;
        };
        let m = net.base_max_weight();
        let heavy_enough = self.private_weight > m
            || (self.private_weight == m && net.policy() == TieBreakPolicy::AdversaryFavoring);
        if !heavy_enough {
            return false;
        }
        // The private blocks of this epoch are not stored yet; ancestry is
        // decided by the stored part of the private chain.
        let stored_tip = if d.blocks.is_empty() {
            tip.clone()
        } else {
            d.blocks[0].parents().clone()
        };
        let k = obs.epoch - 1;
        let displaces = (0..net.node_count()).any(|j| {
            confirmed_anchor(net.dag(), net.tip(j), k, self.cfg.tau)
                .is_some_and(|a| !net.dag().is_ancestor(&a, &stored_tip))
        });
        if !displaces {
            return false;
        }
        d.release = true;
        d.publish = std::mem::take(&mut self.unreleased);
        d.hints = vec![Some(tip); self.nodes];
        self.phase = Phase::Done;
        self.released_at = Some(obs.epoch);
        true
    }

    fn step_private(&mut self, net: &Net, obs: &Observation, d: &mut StrategyDecision) {
        self.maybe_refork(net);
        self.extend_private(net, obs, d);
        self.try_release(net, obs, d);
    }

    fn step_nsplit(&mut self, net: &Net, obs: &Observation, v: SplitVariant, d: &mut StrategyDecision) {
        if self.phase == Phase::Bootstrap {
            self.maybe_refork(net);
        }
        self.extend_private(net, obs, d);
        if self.try_release(net, obs, d) || self.phase != Phase::Split {
            return;
        }
        // Hold every node on its current tip unless something better is arranged below.
        for j in 0..self.nodes {
            d.hints[j] = Some(net.tip(j).clone());
        }
        if obs.honest.is_empty() {
            return;
        }
        let Some(proof) = obs.proofs.first().copied() else {
            let e = AdversaryError::InsufficientLeaders(obs.epoch);
            d.notes.push(e.to_string());
            let groups = honest_groups(net, obs);
            for j in 0..self.nodes {
                d.hints[j] = Some(groups[j % groups.len()].clone());
            }
            return;
        };
        if obs.mitigation == Mitigation::ConsistentBroadcast {
            split_without_equivocation(net, obs, proof, d);
            return;
        }
        match (v, net.mode()) {
            (SplitVariant::NoTieBreak, ChainMode::Tipset) => self.copies_join_honest(net, obs, proof, d),
            _ => self.copies_stand_alone(net, obs, proof, d),
        }
    }

    fn copy(&self, obs: &Observation, proof: ElectionProof, parents: TipsetKey, j: usize) -> Block {
        Block::new(obs.epoch, proof.miner, parents, proof, true, j as u32 + 1)
    }

    /// One copy per node, each joining a heaviest honest tipset so node `j`
    /// alone sees that tipset one block heavier.
    fn copies_join_honest(&self, net: &Net, obs: &Observation, proof: ElectionProof, d: &mut StrategyDecision) {
        let groups = honest_groups(net, obs);
        let wmax = groups.iter().map(|g| weight(g, net.dag()).unwrap()).max().unwrap();
        let top: Vec<&TipsetKey> = groups.iter().filter(|g| weight(g, net.dag()).unwrap() == wmax).collect();
        for j in 0..self.nodes {
            let g = top[j % top.len()];
            let parents = net.dag().parent_of(g).unwrap().clone();
            let c = self.copy(obs, proof, parents, j);
            let mut ids = g.ids().to_vec();
            ids.push(c.id());
            d.hints[j] = Some(TipsetKey::from_ids(ids));
            d.plan.push(c.id(), Recipients::Nodes(vec![j]), DeliveryPhase::BeforeCutoff);
            d.blocks.push(c);
        }
    }

    /// One copy per node on a public tipset that no honest block extended
    /// this epoch, so each copy ties the heaviest honest tipsets and wins.
    fn copies_stand_alone(&self, net: &Net, obs: &Observation, proof: ElectionProof, d: &mut StrategyDecision) {
        let (parents, join) = match free_parent(net, obs) {
            Some(p) => (p, None),
            None => {
                // Every candidate parent already has an honest child: join the
                // heaviest honest tipset instead (tipsets) or sit beside it.
                let groups = honest_groups(net, obs);
                let g = groups
                    .iter()
                    .max_by(|a, b| {
                        weight(a, net.dag()).unwrap().cmp(&weight(b, net.dag()).unwrap()).then(b.cmp(a))
                    })
                    .unwrap()
                    .clone();
                let p = net.dag().parent_of(&g).unwrap().clone();
                let join = (net.mode() == ChainMode::Tipset).then_some(g);
                (p, join)
            }
        };
        for j in 0..self.nodes {
            let c = self.copy(obs, proof, parents.clone(), j);
            let mut ids = join.as_ref().map(|g| g.ids().to_vec()).unwrap_or_default();
            ids.push(c.id());
            d.hints[j] = Some(TipsetKey::from_ids(ids));
            d.plan.push(c.id(), Recipients::Nodes(vec![j]), DeliveryPhase::BeforeCutoff);
            d.blocks.push(c);
        }
    }
}

/// Honest blocks of this epoch grouped into tipsets by parent, in key order.
fn honest_groups(net: &Net, obs: &Observation) -> Vec<TipsetKey> {
    let mut by_parent: Vec<(TipsetKey, Vec<BlockId>)> = Vec::new();
    for (_, id) in obs.honest {
        let p = net.dag().get(id).unwrap().parents().clone();
        match by_parent.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.push(*id),
            None => by_parent.push((p, vec![*id])),
        }
    }
    let mut out: Vec<TipsetKey> = match net.mode() {
        ChainMode::Tipset => by_parent.into_iter().map(|(_, v)| TipsetKey::from_ids(v)).collect(),
        ChainMode::LongestChain => obs.honest.iter().map(|(_, id)| TipsetKey::from_ids(vec![*id])).collect(),
    };
    out.sort();
    out
}

/// Lowest-key node tip that weighs one less than the heaviest base tipset and
/// has no honest child this epoch.
fn free_parent(net: &Net, obs: &Observation) -> Option<TipsetKey> {
    let m = net.base_max_weight();
    let extended: Vec<&TipsetKey> = obs.honest.iter().map(|(_, id)| net.dag().get(id).unwrap().parents()).collect();
    (0..net.node_count())
        .filter(|&j| net.tip_weight(j) + 1 == m && !extended.contains(&net.tip(j)))
        .map(|j| net.tip(j))
        .min()
        .cloned()
}

/// Consistent-broadcast best response: one block delivered before the cutoff
/// to even-indexed nodes only. Odd nodes see it late and reject it, so views
/// diverge for an epoch without any equivocation.
fn split_without_equivocation(net: &Net, obs: &Observation, proof: ElectionProof, d: &mut StrategyDecision) {
    let parents = free_parent(net, obs).unwrap_or_else(|| {
        let g = honest_groups(net, obs).into_iter().next().unwrap();
        net.dag().parent_of(&g).unwrap().clone()
    });
    let b = Block::new(obs.epoch, proof.miner, parents, proof, true, 1);
    let evens: Vec<usize> = (0..net.node_count()).step_by(2).collect();
    for &j in &evens {
        d.hints[j] = Some(TipsetKey::from_ids(vec![b.id()]));
    }
    d.plan.push(b.id(), Recipients::Nodes(evens), DeliveryPhase::BeforeCutoff);
    d.blocks.push(b);
}

/// Null adversary: mine on node 0's tip and broadcast.
fn step_null(net: &Net, obs: &Observation, d: &mut StrategyDecision) {
    let parent = net.tip(0).clone();
    let proofs = match net.mode() {
        ChainMode::Tipset => obs.proofs,
        ChainMode::LongestChain => &obs.proofs[..obs.proofs.len().min(1)],
    };
    for p in proofs {
        let b = Block::new(obs.epoch, p.miner, parent.clone(), *p, true, 0);
        d.plan.push(b.id(), Recipients::All, DeliveryPhase::BeforeCutoff);
        d.blocks.push(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BlockDag;
    use crate::election::{mock_vrf_prove, ElectionRules, ADVERSARY_ID_BASE};

    const ALL: [Strategy; 4] = [
        Strategy::Null,
        Strategy::Private,
        Strategy::NSplit(SplitVariant::NoTieBreak),
        Strategy::NSplit(SplitVariant::TieBreak),
    ];

    fn net(mode: ChainMode) -> Net {
        Net::new(BlockDag::new(ElectionRules { seed: 3, target: None }), 4, mode, TieBreakPolicy::AdversaryFavoring)
    }

    #[test]
    fn names_round_trip() {
        for s in ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("selfish".parse::<Strategy>().is_err());
        assert_eq!("notiebreak".parse::<SplitVariant>().unwrap(), SplitVariant::NoTieBreak);
    }

    #[test]
    fn hold_split_only_applies_to_split_strategies() {
        for s in ALL {
            let mut cfg = AdversaryConfig::new(s);
            cfg.hold_split = true;
            let want = if matches!(s, Strategy::NSplit(_)) { Phase::Split } else { Phase::Bootstrap };
            assert_eq!(Adversary::new(cfg, 4).phase(), want);
        }
    }

    #[test]
    fn longest_chain_private_block_adds_one() {
        let proofs: Vec<_> = (0..3).map(|k| mock_vrf_prove(ADVERSARY_ID_BASE | k, 1, 3)).collect();
        let obs = Observation {
            epoch: 1,
            proofs: &proofs,
            honest: &[],
            mitigation: Mitigation::LongestChain,
        };
        let mut adv = Adversary::new(AdversaryConfig::new(Strategy::Private), 4);
        let d = adv.decide(&net(ChainMode::LongestChain), &obs);
        assert_eq!(d.blocks.len(), 1);
        assert_eq!(adv.private_weight(), 2);
        assert_eq!(adv.proofs_used(), &[1]);
    }

    #[test]
    fn lead_starts_at_zero_against_genesis() {
        let mut adv = Adversary::new(AdversaryConfig::new(Strategy::Private), 4);
        let n = net(ChainMode::Tipset);
        let proofs = [];
        adv.decide(&n, &Observation { epoch: 1, proofs: &proofs, honest: &[], mitigation: Mitigation::None });
        assert_eq!(adv.update_lead(&n), 0);
    }
}
