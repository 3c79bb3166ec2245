//! Shared block knowledge and per-node views.
//!
//! Blocks every honest node knows form the *base*. A node's view is the base
//! plus its own `recent` blocks (targeted deliveries not yet re-broadcast)
//! minus its `excluded` blocks (blocks a consistent-broadcast node refused for
//! the current epoch).
//!
//! Fork-choice candidates are *groups*: all blocks sharing an epoch and a
//! parents key. The heaviest tipset a node can form from a group holds one
//! block per distinct election proof, so its weight is the parents' weight
//! plus the number of distinct proofs visible. Under the longest-chain
//! variant every block is its own group.

use std::collections::BTreeMap;

use crate::chain::{
    break_tie, Block, BlockDag, BlockId, ChainError, FastMap, FastSet, TieBreakPolicy, TipsetKey,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMode {
    Tipset,
    LongestChain,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct GroupKey {
    epoch: u64,
    parents: TipsetKey,
    solo: Option<BlockId>,
}

struct Group {
    parents_weight: u64,
    base_members: Vec<BlockId>,
    base_canon: TipsetKey,
    base_weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeView {
    pub id: usize,
    tip: TipsetKey,
    tip_weight: u64,
    recent: Vec<BlockId>,
    excluded: FastSet<BlockId>,
}

impl NodeView {
    pub fn tip(&self) -> &TipsetKey {
        &self.tip
    }
    pub fn tip_weight(&self) -> u64 {
        self.tip_weight
    }
    pub fn recent(&self) -> &[BlockId] {
        &self.recent
    }
}

pub struct Net {
    dag: BlockDag,
    mode: ChainMode,
    policy: TieBreakPolicy,
    groups: Vec<Group>,
    group_index: FastMap<GroupKey, usize>,
    block_group: FastMap<BlockId, usize>,
    base: FastSet<BlockId>,
    base_index: BTreeMap<u64, Vec<usize>>,
    nodes: Vec<NodeView>,
}

fn canonical(dag: &BlockDag, ids: impl Iterator<Item = BlockId>) -> TipsetKey {
    let mut pairs: Vec<([u8; 32], BlockId)> =
        ids.map(|id| (dag.get(&id).expect("stored").proof().p, id)).collect();
    pairs.sort_unstable();
    pairs.dedup_by(|a, b| a.0 == b.0);
    TipsetKey::from_ids(pairs.into_iter().map(|(_, id)| id).collect())
}

impl Net {
    pub fn new(dag: BlockDag, nodes: usize, mode: ChainMode, policy: TieBreakPolicy) -> Self {
        assert!(nodes >= 1, "at least one honest node");
        let genesis = dag.genesis_key();
        let mut net = Net {
            dag,
            mode,
            policy,
            groups: Vec::new(),
            group_index: FastMap::default(),
            block_group: FastMap::default(),
            base: FastSet::default(),
            base_index: BTreeMap::new(),
            nodes: (0..nodes)
                .map(|id| NodeView {
                    id,
                    tip: genesis.clone(),
                    tip_weight: 1,
                    recent: Vec::new(),
                    excluded: FastSet::default(),
                })
                .collect(),
        };
        let g = net.dag.genesis().clone();
        net.register(&g);
        net.add_base(g.id());
        net
    }

    pub fn dag(&self) -> &BlockDag {
        &self.dag
    }
    pub fn mode(&self) -> ChainMode {
        self.mode
    }
    pub fn policy(&self) -> TieBreakPolicy {
        self.policy
    }
    pub fn nodes(&self) -> &[NodeView] {
        &self.nodes
    }
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
    pub fn tip(&self, j: usize) -> &TipsetKey {
        &self.nodes[j].tip
    }
    pub fn tip_weight(&self, j: usize) -> u64 {
        self.nodes[j].tip_weight
    }
    pub fn in_base(&self, id: &BlockId) -> bool {
        self.base.contains(id)
    }

    /// `(W_min, W_max)` over honest tips.
    pub fn bounds(&self) -> (u64, u64) {
        let ws = self.nodes.iter().map(|n| n.tip_weight);
        (ws.clone().min().unwrap(), ws.max().unwrap())
    }

    pub fn distinct_tips(&self) -> usize {
        let mut tips: Vec<&TipsetKey> = self.nodes.iter().map(|n| &n.tip).collect();
        tips.sort_unstable();
        tips.dedup();
        tips.len()
    }

    /// Heaviest tipset weight formable from base blocks alone.
    pub fn base_max_weight(&self) -> u64 {
        *self.base_index.keys().next_back().expect("genesis is in base")
    }

    /// Canonical base tipsets of the given weight.
    pub fn base_tips_at(&self, w: u64) -> Vec<TipsetKey> {
        self.base_index
            .get(&w)
            .map(|gs| gs.iter().map(|&g| self.groups[g].base_canon.clone()).collect())
            .unwrap_or_default()
    }

    pub fn visible(&self, j: usize, id: &BlockId) -> bool {
        let n = &self.nodes[j];
        !n.excluded.contains(id) && (self.base.contains(id) || n.recent.contains(id))
    }

    fn group_key(&self, b: &Block) -> GroupKey {
        GroupKey {
            epoch: b.epoch(),
            parents: b.parents().clone(),
            solo: match self.mode {
                ChainMode::Tipset => None,
                ChainMode::LongestChain => Some(b.id()),
            },
        }
    }

    fn register(&mut self, b: &Block) {
        let key = self.group_key(b);
        let next = self.groups.len();
        let g = *self.group_index.entry(key).or_insert(next);
        if g == next {
            let parents_weight = self.dag.parents_weight(&b.id()).expect("stored");
            self.groups.push(Group {
                parents_weight,
                base_members: Vec::new(),
                base_canon: TipsetKey::empty(),
                base_weight: 0,
            });
        }
        self.block_group.insert(b.id(), g);
    }

    /// Validates and stores a block without making it visible to anyone.
    pub(crate) fn insert(&mut self, b: Block) -> Result<BlockId, ChainError> {
        if self.dag.contains(&b.id()) {
            return Ok(b.id());
        }
        if self.mode == ChainMode::LongestChain && b.parents().len() != 1 {
            return Err(ChainError::Invalid(crate::chain::InvalidReason::ParentsNotTipset));
        }
        let stored = b.clone();
        let id = self.dag.insert(b)?;
        self.register(&stored);
        Ok(id)
    }

    /// Whether all of `b`'s parents are visible to node `j` (or to everyone if `None`).
    pub fn parents_visible(&self, j: Option<usize>, id: &BlockId) -> bool {
        let Some(b) = self.dag.get(id) else {
            return false;
        };
        b.parents().ids().iter().all(|p| match j {
            Some(j) => self.visible(j, p),
            None => self.base.contains(p),
        })
    }

    pub(crate) fn add_base(&mut self, id: BlockId) {
        if !self.base.insert(id) {
            return;
        }
        let g = self.block_group[&id];
        let group = &mut self.groups[g];
        group.base_members.push(id);
        let canon = canonical(&self.dag, group.base_members.iter().copied());
        let w = group.parents_weight + canon.len() as u64;
        let old = group.base_weight;
        group.base_canon = canon;
        if w != old {
            group.base_weight = w;
            if old > 0 {
                let bucket = self.base_index.get_mut(&old).unwrap();
                bucket.retain(|&x| x != g);
                if bucket.is_empty() {
                    self.base_index.remove(&old);
                }
            }
            self.base_index.entry(w).or_default().push(g);
        }
    }

    pub(crate) fn add_recent(&mut self, j: usize, id: BlockId) {
        if !self.base.contains(&id) && !self.nodes[j].recent.contains(&id) {
            self.nodes[j].recent.push(id);
        }
    }

    pub(crate) fn exclude(&mut self, j: usize, id: BlockId) {
        self.nodes[j].excluded.insert(id);
    }

    /// Completes last epoch's re-broadcast and lifts per-epoch exclusions.
    pub(crate) fn promote(&mut self) {
        let mut ids = Vec::new();
        for n in &mut self.nodes {
            ids.append(&mut n.recent);
            n.excluded.clear();
        }
        // Parents before children: sort by epoch.
        ids.sort_by_key(|id| (self.dag.get(id).map_or(0, |b| b.epoch()), *id));
        for id in ids {
            self.add_base(id);
        }
    }

    fn visible_canon(&self, j: usize, g: usize) -> TipsetKey {
        let n = &self.nodes[j];
        let group = &self.groups[g];
        let ids = group
            .base_members
            .iter()
            .chain(n.recent.iter().filter(|id| self.block_group[*id] == g))
            .filter(|id| !n.excluded.contains(*id))
            .copied();
        canonical(&self.dag, ids)
    }

    /// Heaviest weight node `j` can currently form, with the canonical tipset of each maximal group.
    pub fn heaviest_for(&self, j: usize) -> (u64, Vec<TipsetKey>) {
        let n = &self.nodes[j];
        let mut touched: Vec<usize> = n
            .recent
            .iter()
            .chain(n.excluded.iter())
            .map(|id| self.block_group[id])
            .collect();
        touched.sort_unstable();
        touched.dedup();

        let mut best = 0u64;
        let mut cands: Vec<TipsetKey> = Vec::new();
        let offer = |w: u64, t: TipsetKey, best: &mut u64, cands: &mut Vec<TipsetKey>| {
            if w > *best {
                *best = w;
                cands.clear();
            }
            if w == *best {
                cands.push(t);
            }
        };
        for &g in &touched {
            let canon = self.visible_canon(j, g);
            if canon.is_empty() {
                continue;
            }
            let w = self.groups[g].parents_weight + canon.len() as u64;
            offer(w, canon, &mut best, &mut cands);
        }
        for (&w, gs) in self.base_index.iter().rev() {
            if w < best {
                break;
            }
            for &g in gs {
                if touched.binary_search(&g).is_err() {
                    offer(w, self.groups[g].base_canon.clone(), &mut best, &mut cands);
                }
            }
        }
        (best, cands)
    }

    /// Weight of `t` if node `j` can see all of it and it is a stored tipset.
    pub fn visible_weight(&self, j: usize, t: &TipsetKey) -> Option<u64> {
        if t.is_empty() || !t.ids().iter().all(|id| self.visible(j, id)) {
            return None;
        }
        crate::chain::weight(t, &self.dag).ok()
    }

    /// Runs end-of-epoch fork choice for node `j`.
    pub(crate) fn choose(&mut self, j: usize, hint: Option<&TipsetKey>) {
        let (best, cands) = self.heaviest_for(j);
        let hinted = match (self.policy, hint) {
            (TieBreakPolicy::AdversaryFavoring, Some(h)) if self.visible_weight(j, h) == Some(best) => {
                Some(h.clone())
            }
            _ => None,
        };
        let tip = hinted.unwrap_or_else(|| {
            let refs: Vec<&TipsetKey> = cands.iter().collect();
            break_tie(&self.dag, &refs, self.policy, None).clone()
        });
        let n = &mut self.nodes[j];
        n.tip = tip;
        n.tip_weight = best;
    }
}
