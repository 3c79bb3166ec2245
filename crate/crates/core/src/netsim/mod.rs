//! Lock-step synchronous world.
//!
//! Per epoch: beacon and leader draw, honest mining on the tips each node
//! held at the end of the previous epoch, completion of last epoch's
//! re-broadcast, the (rushing) adversary's move, delivery, and end-of-epoch
//! fork choice at every node.

mod delivery;
mod views;

pub use delivery::{Delivery, DeliveryPhase, DeliveryPlan, Recipients, StrategyDecision};
pub use views::{ChainMode, Net, NodeView};

use thiserror::Error;

use crate::adversary::{Adversary, AdversaryConfig, Strategy};
use crate::chain::{Block, BlockDag, BlockId, ChainError, TieBreakPolicy, TipsetKey};
use crate::election::{
    draw_leaders, mock_vrf_prove, ElectionError, ElectionProof, ElectionRules, MinerId, RngStream,
    ADVERSARY_ID_BASE,
};
use crate::mitigations::{cb_epoch_step, CbNodeState, CbPhase, Mitigation};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("delivery plan withholds honest block {0:?} past the epoch end")]
    PlanViolatesSynchrony(BlockId),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("bad world configuration: {0}")]
    BadConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElectionMode {
    /// Leader counts drawn from Poisson laws; `nodes` honest views receive the honest leaders.
    Statistical { nodes: usize },
    /// `participants` unit identities, each elected when its VRF output is below `m / n`.
    /// The adversary controls `round(beta * n)` of them; every honest identity is a node.
    Identity { participants: u32 },
}

#[derive(Clone, Debug)]
pub struct WorldConfig {
    pub m: f64,
    pub beta: f64,
    pub election: ElectionMode,
    pub seed: u64,
    pub mitigation: Mitigation,
    pub adversary: AdversaryConfig,
}

impl WorldConfig {
    pub fn tie_policy(&self) -> TieBreakPolicy {
        match (self.mitigation, self.adversary.strategy) {
            (Mitigation::LongestChain, _) => TieBreakPolicy::AdversaryFavoring,
            (_, Strategy::NSplit(crate::adversary::SplitVariant::NoTieBreak)) => TieBreakPolicy::MinProof,
            _ => TieBreakPolicy::AdversaryFavoring,
        }
    }
}

/// One row of the per-epoch trace.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub h: u32,
    pub z: u32,
    pub x: u32,
    pub y: u32,
    pub w_min: u64,
    pub w_max: u64,
    pub distinct_tips: usize,
    pub lead: i64,
    pub released: bool,
    pub equivocations: u32,
    /// End-of-epoch heaviest tip of every honest node.
    pub tips: Vec<TipsetKey>,
    pub honest_blocks: Vec<BlockId>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub nodes: usize,
    pub records: Vec<EpochRecord>,
}

/// What the adversary learns about the current epoch besides the network state.
pub struct Observation<'a> {
    pub epoch: u64,
    /// The adversary's own election proofs for this epoch.
    pub proofs: &'a [ElectionProof],
    /// Honest blocks mined this epoch with the node that mined each.
    pub honest: &'a [(usize, BlockId)],
    pub mitigation: Mitigation,
}

pub struct World {
    cfg: WorldConfig,
    net: Net,
    adversary: Adversary,
    epoch: u64,
    honest_participants: u32,
    trace: Trace,
}

impl World {
    pub fn new(cfg: WorldConfig) -> Result<Self, NetError> {
        // Parameter validation is shared with the election layer.
        draw_leaders(&mut RngStream::new(0, "check", 0), cfg.m, cfg.beta)?;
        let (nodes, target, honest_participants) = match cfg.election {
            ElectionMode::Statistical { nodes } => {
                if nodes == 0 {
                    return Err(NetError::BadConfig("need at least one honest node".into()));
                }
                (nodes, None, 0)
            }
            ElectionMode::Identity { participants } => {
                if (participants as f64) < cfg.m.ceil() {
                    return Err(NetError::BadConfig("identity mode needs n >= ceil(m)".into()));
                }
                let adv = (cfg.beta * participants as f64).round() as u32;
                let honest = participants - adv;
                if honest == 0 {
                    return Err(NetError::BadConfig("identity mode needs an honest participant".into()));
                }
                (honest as usize, Some(cfg.m / participants as f64), honest)
            }
        };
        let mode = match cfg.mitigation {
            Mitigation::LongestChain => ChainMode::LongestChain,
            _ => ChainMode::Tipset,
        };
        let dag = BlockDag::new(ElectionRules { seed: cfg.seed, target });
        let net = Net::new(dag, nodes, mode, cfg.tie_policy());
        let adversary = Adversary::new(cfg.adversary.clone(), nodes);
        Ok(World {
            cfg,
            net,
            adversary,
            epoch: 0,
            honest_participants,
            trace: Trace {
                nodes,
                records: Vec::new(),
            },
        })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }
    pub fn dag(&self) -> &BlockDag {
        self.net.dag()
    }
    pub fn adversary(&self) -> &Adversary {
        &self.adversary
    }
    pub fn trace(&self) -> &Trace {
        &self.trace
    }
    pub fn epoch(&self) -> u64 {
        self.epoch
    }
    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn into_parts(self) -> (Trace, Net, Adversary) {
        (self.trace, self.net, self.adversary)
    }

    /// `(W_min, W_max)` over honest views.
    pub fn snapshot_bounds(&self) -> (u64, u64) {
        self.net.bounds()
    }

    /// Honest leaders as `(node, miner id, proof)` and adversarial proofs for epoch `r`.
    fn elect(&self, r: u64) -> Result<(Vec<(usize, MinerId)>, Vec<ElectionProof>), NetError> {
        let seed = self.cfg.seed;
        match self.cfg.election {
            ElectionMode::Statistical { nodes } => {
                let mut rng = RngStream::new(seed, "election", r);
                let draw = draw_leaders(&mut rng, self.cfg.m, self.cfg.beta)?;
                let mut assign = RngStream::new(seed, "assign", r);
                let mut perm: Vec<usize> = (0..nodes).collect();
                let h = draw.honest_count as usize;
                for i in 0..h.min(nodes) {
                    let k = i + assign.below((nodes - i) as u64) as usize;
                    perm.swap(i, k);
                }
                let honest = (0..h)
                    .map(|i| {
                        let node = perm[i % nodes];
                        (node, (node + nodes * (i / nodes)) as MinerId)
                    })
                    .collect();
                let adv = (0..draw.adversary_count)
                    .map(|k| mock_vrf_prove(ADVERSARY_ID_BASE | k, r, seed))
                    .collect();
                Ok((honest, adv))
            }
            ElectionMode::Identity { participants } => {
                let target = self.cfg.m / participants as f64;
                let mut honest = Vec::new();
                let mut adv = Vec::new();
                for id in 0..participants {
                    let proof = mock_vrf_prove(id, r, seed);
                    if proof.y <= target {
                        if id < self.honest_participants {
                            honest.push((id as usize, id));
                        } else {
                            adv.push(proof);
                        }
                    }
                }
                Ok((honest, adv))
            }
        }
    }

    pub fn run_epoch(&mut self) -> Result<&EpochRecord, NetError> {
        let r = self.epoch + 1;
        let seed = self.cfg.seed;
        let (leaders, adv_proofs) = self.elect(r)?;

        // Honest mining on end-of-previous-epoch tips; broadcast to everyone.
        let mut honest: Vec<(usize, BlockId)> = Vec::with_capacity(leaders.len());
        for &(node, miner) in &leaders {
            let parents = self.net.tip(node).clone();
            let b = Block::new(r, miner, parents, mock_vrf_prove(miner, r, seed), false, 0);
            let id = self.net.insert(b)?;
            honest.push((node, id));
        }
        for &(_, id) in &honest {
            self.net.add_base(id);
        }

        // Last epoch's targeted deliveries have now reached every node.
        self.net.promote();

        let obs = Observation {
            epoch: r,
            proofs: &adv_proofs,
            honest: &honest,
            mitigation: self.cfg.mitigation,
        };
        let decision = self.adversary.decide(&self.net, &obs);
        let equivocations = decision.equivocations();
        let mut notes = std::mem::take(&mut self.adversary.pending_notes);
        notes.extend(decision.notes.iter().cloned());
        let honest_ids: Vec<BlockId> = honest.iter().map(|(_, id)| *id).collect();
        self.apply_delivery(&decision, &honest_ids, r, &mut notes)?;

        for j in 0..self.net.node_count() {
            self.net.choose(j, decision.hint(j));
        }
        let (w_min, w_max) = self.net.bounds();
        let lead = self.adversary.update_lead(&self.net);

        let h = leaders.len() as u32;
        let record = EpochRecord {
            epoch: r,
            h,
            z: adv_proofs.len() as u32,
            x: (h >= 1) as u32,
            y: (h == 1) as u32,
            w_min,
            w_max,
            distinct_tips: self.net.distinct_tips(),
            lead,
            released: decision.release,
            equivocations,
            tips: self.net.nodes().iter().map(|n| n.tip().clone()).collect(),
            honest_blocks: honest_ids,
            notes,
        };
        self.epoch = r;
        self.trace.records.push(record);
        Ok(self.trace.records.last().unwrap())
    }

    /// Applies the adversary's decision for epoch `r`. Invalid blocks and
    /// deliveries whose parents a recipient cannot see are dropped with a note.
    pub fn apply_delivery(
        &mut self,
        decision: &StrategyDecision,
        honest: &[BlockId],
        r: u64,
        notes: &mut Vec<String>,
    ) -> Result<(), NetError> {
        for d in &decision.plan.deliveries {
            if honest.contains(&d.block)
                && (d.recipients != Recipients::All || d.phase != DeliveryPhase::BeforeCutoff)
            {
                return Err(NetError::PlanViolatesSynchrony(d.block));
            }
        }
        for b in &decision.blocks {
            if let Err(e) = self.net.insert(b.clone()) {
                notes.push(format!("dropped block {:?}: {e}", b.id()));
            }
        }

        let n = self.net.node_count();
        let cb = self.cfg.mitigation == Mitigation::ConsistentBroadcast;
        let mut arrivals: Vec<Vec<(BlockId, CbPhase)>> = vec![Vec::new(); if cb { n } else { 0 }];
        for d in &decision.plan.deliveries {
            let Some(block) = self.net.dag().get(&d.block) else {
                continue;
            };
            if block.epoch() != r {
                notes.push(format!("ignored delivery of old block {:?}", d.block));
                continue;
            }
            if honest.contains(&d.block) {
                continue;
            }
            if cb {
                // Direct recipients get the block in the stated phase; the
                // in-epoch re-broadcast reaches everyone else after the cutoff.
                if !self.net.parents_visible(None, &d.block) {
                    notes.push(format!("dropped delivery of {:?}: parents unknown", d.block));
                    continue;
                }
                for (j, arr) in arrivals.iter_mut().enumerate() {
                    let direct = match &d.recipients {
                        Recipients::All => true,
                        Recipients::Nodes(s) => s.contains(&j),
                    };
                    let phase = if direct && d.phase == DeliveryPhase::BeforeCutoff {
                        CbPhase::BeforeFirstCutoff
                    } else {
                        CbPhase::BetweenCutoffs
                    };
                    arr.push((d.block, phase));
                }
                self.net.add_base(d.block);
                continue;
            }
            match &d.recipients {
                Recipients::All => {
                    if self.net.parents_visible(None, &d.block) {
                        self.net.add_base(d.block);
                    } else {
                        notes.push(format!("dropped delivery of {:?}: parents unknown", d.block));
                    }
                }
                Recipients::Nodes(s) => {
                    for &j in s {
                        if j < n && self.net.parents_visible(Some(j), &d.block) {
                            self.net.add_recent(j, d.block);
                        } else {
                            notes.push(format!("dropped delivery of {:?} to node {j}", d.block));
                        }
                    }
                }
            }
        }

        if cb {
            for (j, arr) in arrivals.into_iter().enumerate() {
                if arr.is_empty() {
                    continue;
                }
                let mut state = CbNodeState::default();
                let honest_arrivals = honest.iter().map(|id| (*id, CbPhase::BeforeFirstCutoff));
                let all: Vec<(&Block, CbPhase)> = honest_arrivals
                    .chain(arr.iter().copied())
                    .map(|(id, p)| (self.net.dag().get(&id).unwrap(), p))
                    .collect();
                let accepted = cb_epoch_step(&mut state, &all);
                for (id, _) in arr {
                    if !accepted.contains(&id) {
                        self.net.exclude(j, id);
                    }
                }
            }
        }

        if decision.release {
            let mut ids = decision.publish.clone();
            ids.sort_by_key(|id| (self.net.dag().get(id).map_or(0, |b| b.epoch()), *id));
            for id in ids {
                if self.net.dag().contains(&id) {
                    self.net.add_base(id);
                }
            }
        }
        Ok(())
    }

    pub fn run(mut self, epochs: u64) -> Result<(Trace, Net, Adversary), NetError> {
        for _ in 0..epochs {
            self.run_epoch()?;
        }
        Ok(self.into_parts())
    }
}

/// Convenience: run a world to completion.
pub fn simulate(cfg: WorldConfig, epochs: u64) -> Result<(Trace, Net, Adversary), NetError> {
    World::new(cfg)?.run(epochs)
}
