//! Persistence and liveness of the ledger each honest node reads off its chain.
//!
//! A node's ledger is the blocks of its heaviest chain ordered by epoch, then
//! by block id. At epoch `k` the node's confirmed prefix ends at the tipset on
//! its chain with the greatest epoch `<= k - tau` (its *anchor*). Since a
//! later anchor of the same chain extends an earlier one, it is enough to
//! carry the previous epoch's anchors forward: persistence fails when an
//! anchor is not exactly a tipset of some node's chain at that or any later
//! epoch.

use serde::{Deserialize, Serialize};

use crate::chain::{BlockDag, BlockId, FastMap, TipsetKey};
use crate::netsim::Trace;

/// Tipset ending the confirmed prefix of `tip` at epoch `k`, or `None` before
/// anything can be `tau`-deep.
pub fn confirmed_anchor(dag: &BlockDag, tip: &TipsetKey, k: u64, tau: u64) -> Option<TipsetKey> {
    if k < tau {
        return None;
    }
    dag.ancestor_at(tip, k - tau)
}

/// Blocks of the chain ending at `tip`, by epoch then id.
pub fn ledger_of(dag: &BlockDag, tip: &TipsetKey) -> Vec<BlockId> {
    let mut out = Vec::new();
    let mut cur = tip.clone();
    while !cur.is_empty() {
        out.extend(cur.ids().iter().rev().copied());
        cur = dag.parent_of(&cur).cloned().unwrap_or_default();
    }
    out.reverse();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Persistence,
    Liveness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub epoch: u64,
    pub node: usize,
    /// First block of the displaced anchor (persistence), or the marker epoch's
    /// lowest-id honest block if any (liveness).
    pub block: Option<BlockId>,
    pub kind: ViolationKind,
    /// Persistence: epoch of the displaced anchor. Liveness: the marker epoch.
    pub at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerCheck {
    pub tau: u64,
    pub u: u64,
    /// Per-epoch distinct anchors (empty until epoch `tau`).
    pub anchors: Vec<Vec<TipsetKey>>,
    pub violations: Vec<Violation>,
}

impl LedgerCheck {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn first(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }
}

/// Epoch of the newest tipset holding an honest block on `t`'s chain (0 if none).
fn latest_honest(dag: &BlockDag, t: &TipsetKey, memo: &mut FastMap<TipsetKey, u64>) -> u64 {
    let mut path = Vec::new();
    let mut cur = t.clone();
    let answer = loop {
        if cur.is_empty() {
            break 0;
        }
        if let Some(&v) = memo.get(&cur) {
            break v;
        }
        let honest_here = cur.ids().iter().any(|id| dag.get(id).is_some_and(|b| !b.adversarial() && b.epoch() > 0));
        if honest_here {
            break dag.epoch_of(&cur).unwrap();
        }
        let parent = dag.parent_of(&cur).cloned().unwrap_or_default();
        path.push(std::mem::replace(&mut cur, parent));
    };
    memo.insert(cur, answer);
    for k in path {
        memo.insert(k, answer);
    }
    answer
}

/// Persistence with depth `tau`; liveness requires each epoch-`i` marker to
/// sit `tau`-deep in every honest chain by epoch `i + u`.
///
/// Markers ride in every honest block, so marker `i` is in a chain's stable
/// part when that chain holds an honest block from an epoch in
/// `[i, i + u - tau]` (or `[i, i + u]` when `u < tau`).
pub fn check_ledger(trace: &Trace, dag: &BlockDag, tau: u64, u: u64) -> LedgerCheck {
    let mut violations = Vec::new();
    let mut anchors_log = Vec::with_capacity(trace.records.len());
    let mut carried: Vec<TipsetKey> = Vec::new();
    let mut honest_memo: FastMap<TipsetKey, u64> = FastMap::default();

    for rec in &trace.records {
        let k = rec.epoch;
        let mut current: Vec<TipsetKey> = rec
            .tips
            .iter()
            .filter_map(|tip| confirmed_anchor(dag, tip, k, tau))
            .collect();
        current.sort();
        current.dedup();

        let mut candidates = carried.clone();
        candidates.extend(current.iter().cloned());
        candidates.sort();
        candidates.dedup();
        for a in &candidates {
            for (node, tip) in rec.tips.iter().enumerate() {
                if !dag.is_ancestor(a, tip) {
                    violations.push(Violation {
                        epoch: k,
                        node,
                        block: a.ids().first().copied(),
                        kind: ViolationKind::Persistence,
                        at: dag.epoch_of(a).unwrap_or(0),
                    });
                }
            }
        }
        carried = current.clone();
        anchors_log.push(current);

        // Liveness for the marker injected at epoch i = k - u.
        if k > u {
            let i = k - u;
            let hi = if u >= tau { k - tau } else { k };
            for (node, tip) in rec.tips.iter().enumerate() {
                let ok = dag
                    .ancestor_at(tip, hi)
                    .is_some_and(|a| latest_honest(dag, &a, &mut honest_memo) >= i);
                if !ok {
                    violations.push(Violation {
                        epoch: k,
                        node,
                        block: trace.records.get(i as usize - 1).and_then(|r| r.honest_blocks.iter().min().copied()),
                        kind: ViolationKind::Liveness,
                        at: i,
                    });
                }
            }
        }
    }
    LedgerCheck {
        tau,
        u,
        anchors: anchors_log,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::tests::{figure_one, mk};
    use crate::netsim::EpochRecord;

    fn rec(epoch: u64, tips: Vec<TipsetKey>) -> EpochRecord {
        EpochRecord {
            epoch,
            h: 1,
            z: 0,
            x: 1,
            y: 1,
            w_min: 0,
            w_max: 0,
            distinct_tips: 1,
            lead: 0,
            released: false,
            equivocations: 0,
            tips,
            honest_blocks: vec![],
            notes: vec![],
        }
    }

    #[test]
    fn ledger_orders_by_epoch_then_id() {
        let (dag, bs) = figure_one();
        let tip = TipsetKey::from_ids(vec![bs[5].id(), bs[6].id(), bs[7].id()]);
        let l = ledger_of(&dag, &tip);
        assert_eq!(l.len(), 9);
        for w in l.windows(2) {
            let (a, b) = (dag.get(&w[0]).unwrap(), dag.get(&w[1]).unwrap());
            assert!((a.epoch(), a.id()) < (b.epoch(), b.id()));
        }
    }

    #[test]
    fn tau_zero_flags_any_reorg() {
        let mut dag = crate::chain::BlockDag::new(crate::chain::tests::rules());
        let g = dag.genesis_key();
        let a = mk(&mut dag, 1, 1, &g, false);
        let b = mk(&mut dag, 1, 2, &g, true);
        let ka = TipsetKey::from_ids(vec![a.id()]);
        let kb = TipsetKey::from_ids(vec![b.id()]);
        let b2 = mk(&mut dag, 2, 3, &kb, true);
        let kb2 = TipsetKey::from_ids(vec![b2.id()]);
        let stable = Trace {
            nodes: 1,
            records: vec![rec(1, vec![ka.clone()])],
        };
        assert_eq!(check_ledger(&stable, &dag, 0, 100).count(ViolationKind::Persistence), 0);
        let reorg = Trace {
            nodes: 1,
            records: vec![rec(1, vec![ka.clone()]), rec(2, vec![kb2.clone()])],
        };
        let chk = check_ledger(&reorg, &dag, 0, 100);
        assert_eq!(chk.count(ViolationKind::Persistence), 1);
        assert_eq!(chk.first(ViolationKind::Persistence).unwrap().epoch, 2);
        // The same reorg is invisible at depth 2: nothing was confirmed yet.
        assert_eq!(check_ledger(&reorg, &dag, 2, 100).count(ViolationKind::Persistence), 0);
    }

    #[test]
    fn disagreeing_nodes_violate_persistence() {
        let mut dag = crate::chain::BlockDag::new(crate::chain::tests::rules());
        let g = dag.genesis_key();
        let a = mk(&mut dag, 1, 1, &g, false);
        let b = mk(&mut dag, 1, 2, &g, false);
        let ka = TipsetKey::from_ids(vec![a.id()]);
        let kb = TipsetKey::from_ids(vec![b.id()]);
        let t = Trace {
            nodes: 2,
            records: vec![rec(1, vec![ka, kb])],
        };
        assert_eq!(check_ledger(&t, &dag, 0, 100).count(ViolationKind::Persistence), 2);
    }

    #[test]
    fn liveness_needs_recent_honest_blocks() {
        let mut dag = crate::chain::BlockDag::new(crate::chain::tests::rules());
        let g = dag.genesis_key();
        let mut honest_tip = g.clone();
        let mut adv_tip = g.clone();
        let mut good = Vec::new();
        let mut bad = Vec::new();
        for e in 1..=6u64 {
            let h = mk(&mut dag, e, e as u32, &honest_tip, false);
            honest_tip = TipsetKey::from_ids(vec![h.id()]);
            let a = mk(&mut dag, e, 100 + e as u32, &adv_tip, true);
            adv_tip = TipsetKey::from_ids(vec![a.id()]);
            good.push(rec(e, vec![honest_tip.clone()]));
            bad.push(rec(e, vec![adv_tip.clone()]));
        }
        let good = Trace { nodes: 1, records: good };
        let bad = Trace { nodes: 1, records: bad };
        assert_eq!(check_ledger(&good, &dag, 1, 2).count(ViolationKind::Liveness), 0);
        assert_eq!(check_ledger(&bad, &dag, 1, 2).count(ViolationKind::Liveness), 4);
    }
}
