//! Blocks, tipsets, the block DAG, weight and fork choice.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hash, Hasher};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::election::{ElectionProof, ElectionRules, MinerId, GENESIS_MINER};

/// Hasher for keys that are already uniformly distributed digests.
#[derive(Default, Clone, Copy)]
pub struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }

    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }

    fn write_u32(&mut self, v: u32) {
        self.write_u64(v as u64);
    }
}

pub type FastMap<K, V> = HashMap<K, V, BuildHasherDefault<IdHasher>>;
pub type FastSet<K> = HashSet<K, BuildHasherDefault<IdHasher>>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockId(pub [u8; 32]);

impl Hash for BlockId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(u64::from_le_bytes(self.0[..8].try_into().unwrap()));
    }
}

impl BlockId {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", &self.to_hex()[..12])
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Ascending list of block ids. Only the genesis block has an empty parents key.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct TipsetKey(Vec<BlockId>);

impl TipsetKey {
    pub fn empty() -> Self {
        TipsetKey(Vec::new())
    }

    /// Sorts and deduplicates without checking tipset rules.
    pub fn from_ids(mut ids: Vec<BlockId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        TipsetKey(ids)
    }

    pub fn ids(&self) -> &[BlockId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.0.binary_search(id).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    id: BlockId,
    epoch: u64,
    miner: MinerId,
    parents: TipsetKey,
    proof: ElectionProof,
    adversarial: bool,
    equivocation_tag: u32,
}

impl Block {
    pub fn new(
        epoch: u64,
        miner: MinerId,
        parents: TipsetKey,
        proof: ElectionProof,
        adversarial: bool,
        equivocation_tag: u32,
    ) -> Self {
        let id = Self::compute_id(epoch, miner, &parents, &proof, equivocation_tag);
        Block {
            id,
            epoch,
            miner,
            parents,
            proof,
            adversarial,
            equivocation_tag,
        }
    }

    pub fn genesis() -> Self {
        Self::new(0, GENESIS_MINER, TipsetKey::empty(), ElectionProof::genesis(), false, 0)
    }

    /// `SHA-256(epoch_be64 || miner_be32 || tag_be32 || parent ids || y_bits_be64 || p)`.
    pub fn compute_id(
        epoch: u64,
        miner: MinerId,
        parents: &TipsetKey,
        proof: &ElectionProof,
        equivocation_tag: u32,
    ) -> BlockId {
        let mut h = Sha256::new();
        h.update(epoch.to_be_bytes());
        h.update(miner.to_be_bytes());
        h.update(equivocation_tag.to_be_bytes());
        for id in parents.ids() {
            h.update(id.0);
        }
        h.update(proof.to_bytes());
        BlockId(h.finalize().into())
    }

    pub fn id(&self) -> BlockId {
        self.id
    }
    pub fn epoch(&self) -> u64 {
        self.epoch
    }
    pub fn miner(&self) -> MinerId {
        self.miner
    }
    pub fn parents(&self) -> &TipsetKey {
        &self.parents
    }
    pub fn proof(&self) -> &ElectionProof {
        &self.proof
    }
    pub fn adversarial(&self) -> bool {
        self.adversarial
    }
    pub fn equivocation_tag(&self) -> u32 {
        self.equivocation_tag
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TipsetError {
    #[error("a tipset must contain at least one block")]
    Empty,
    #[error("tipset blocks must share one epoch")]
    MixedEpoch,
    #[error("tipset blocks must share one parents key")]
    MixedParents,
    #[error("a tipset may not hold two blocks carrying the same election proof")]
    DuplicateProof,
}

/// Builds the canonical key of a block set, enforcing the tipset rules.
pub fn tipset_key(blocks: &[&Block]) -> Result<TipsetKey, TipsetError> {
    let first = blocks.first().ok_or(TipsetError::Empty)?;
    let mut proofs = FastSet::default();
    let mut ids = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.epoch != first.epoch {
            return Err(TipsetError::MixedEpoch);
        }
        if b.parents != first.parents {
            return Err(TipsetError::MixedParents);
        }
        ids.push(b.id);
    }
    let key = TipsetKey::from_ids(ids);
    // Re-listing the same block is harmless; two distinct blocks with one proof are not.
    for id in key.ids() {
        let b = blocks.iter().find(|b| b.id == *id).unwrap();
        if !proofs.insert(b.proof.p) {
            return Err(TipsetError::DuplicateProof);
        }
    }
    Ok(key)
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    #[error("election proof does not verify or exceeds the target")]
    BadElection,
    #[error("a parent block is unknown")]
    MissingParent,
    #[error("parents do not form a tipset of an earlier epoch")]
    ParentsNotTipset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(InvalidReason),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("tipset does not resolve in the DAG")]
    UnknownTipset,
    #[error("fork choice needs at least one candidate")]
    EmptyViews,
    #[error("invalid block: {0}")]
    Invalid(InvalidReason),
}

struct Entry {
    block: Block,
    parents_weight: u64,
}

/// Append-only store of validated blocks.
pub struct BlockDag {
    blocks: FastMap<BlockId, Entry>,
    children: FastMap<TipsetKey, Vec<BlockId>>,
    genesis: BlockId,
    rules: ElectionRules,
    verified_proofs: FastSet<[u8; 32]>,
}

impl BlockDag {
    pub fn new(rules: ElectionRules) -> Self {
        let g = Block::genesis();
        let genesis = g.id;
        let mut blocks = FastMap::default();
        blocks.insert(
            genesis,
            Entry {
                block: g,
                parents_weight: 0,
            },
        );
        BlockDag {
            blocks,
            children: FastMap::default(),
            genesis,
            rules,
            verified_proofs: FastSet::default(),
        }
    }

    pub fn rules(&self) -> &ElectionRules {
        &self.rules
    }

    pub fn genesis(&self) -> &Block {
        &self.blocks[&self.genesis].block
    }

    pub fn genesis_key(&self) -> TipsetKey {
        TipsetKey(vec![self.genesis])
    }

    pub fn get(&self, id: &BlockId) -> Option<&Block> {
        self.blocks.get(id).map(|e| &e.block)
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.blocks.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Weight of the chain ending at the block's parents.
    pub fn parents_weight(&self, id: &BlockId) -> Option<u64> {
        self.blocks.get(id).map(|e| e.parents_weight)
    }

    pub fn children_of(&self, parents: &TipsetKey) -> &[BlockId] {
        self.children.get(parents).map_or(&[], |v| v.as_slice())
    }

    /// Validates and stores `b`. Re-inserting a stored block is a no-op.
    pub fn insert(&mut self, b: Block) -> Result<BlockId, ChainError> {
        if self.blocks.contains_key(&b.id) {
            return Ok(b.id);
        }
        let proof_known = self.verified_proofs.contains(&b.proof.p);
        match validate_inner(&b, self, &self.rules, proof_known) {
            Validity::Valid => {}
            Validity::Invalid(r) => return Err(ChainError::Invalid(r)),
        }
        self.verified_proofs.insert(b.proof.p);
        let parents_weight = weight(&b.parents, self)?;
        let id = b.id;
        self.children.entry(b.parents.clone()).or_default().push(id);
        self.blocks.insert(
            id,
            Entry {
                block: b,
                parents_weight,
            },
        );
        Ok(id)
    }

    /// Resolves a key to its blocks, checking that they form a stored tipset.
    pub fn resolve(&self, t: &TipsetKey) -> Result<Vec<&Block>, ChainError> {
        let blocks: Vec<&Block> = t
            .ids()
            .iter()
            .map(|id| self.get(id).ok_or(ChainError::UnknownTipset))
            .collect::<Result<_, _>>()?;
        tipset_key(&blocks).map_err(|_| ChainError::UnknownTipset)?;
        Ok(blocks)
    }

    /// Epoch of a stored tipset (first block's epoch; no structural check).
    pub fn epoch_of(&self, t: &TipsetKey) -> Option<u64> {
        t.ids().first().and_then(|id| self.get(id)).map(|b| b.epoch)
    }

    /// Parent key of a stored tipset (no structural check).
    pub fn parent_of(&self, t: &TipsetKey) -> Option<&TipsetKey> {
        t.ids().first().and_then(|id| self.get(id)).map(|b| &b.parents)
    }

    /// The tipset on `tip`'s chain with the greatest epoch `<= epoch`.
    pub fn ancestor_at(&self, tip: &TipsetKey, epoch: u64) -> Option<TipsetKey> {
        let mut cur = tip;
        loop {
            let first = self.get(cur.ids().first()?)?;
            if first.epoch <= epoch {
                return Some(cur.clone());
            }
            cur = &first.parents;
        }
    }

    /// Whether `anc` is on the chain ending at `tip` (inclusive).
    pub fn is_ancestor(&self, anc: &TipsetKey, tip: &TipsetKey) -> bool {
        let Some(e) = self.epoch_of(anc) else {
            return false;
        };
        self.ancestor_at(tip, e).as_ref() == Some(anc)
    }

    /// Whether block `id` belongs to some tipset on `tip`'s chain.
    pub fn chain_contains_block(&self, tip: &TipsetKey, id: &BlockId) -> bool {
        let Some(b) = self.get(id) else {
            return false;
        };
        match self.ancestor_at(tip, b.epoch) {
            Some(t) => self.epoch_of(&t) == Some(b.epoch) && t.contains(id),
            None => false,
        }
    }
}

fn validate_inner(b: &Block, dag: &BlockDag, rules: &ElectionRules, proof_known: bool) -> Validity {
    if b.id == dag.genesis {
        return Validity::Valid;
    }
    // Election proof: bound to this miner and epoch, verifies, and meets the target.
    let proof_ok = b.proof.miner == b.miner
        && b.proof.epoch == b.epoch
        && b.epoch >= 1
        && if proof_known {
            rules.target.is_none_or(|t| b.proof.y <= t)
        } else {
            rules.check(&b.proof)
        };
    if !proof_ok {
        return Validity::Invalid(InvalidReason::BadElection);
    }
    // The storage proof is stubbed and always passes.
    if b.parents.is_empty() {
        return Validity::Invalid(InvalidReason::ParentsNotTipset);
    }
    let mut parents = Vec::with_capacity(b.parents.len());
    for id in b.parents.ids() {
        match dag.get(id) {
            Some(p) => parents.push(p),
            None => return Validity::Invalid(InvalidReason::MissingParent),
        }
    }
    // Stored parents were validated on insertion, so recursion stops here.
    match tipset_key(&parents) {
        Ok(k) if k == b.parents && parents[0].epoch < b.epoch => Validity::Valid,
        _ => Validity::Invalid(InvalidReason::ParentsNotTipset),
    }
}

/// Checks a block against the stored DAG without inserting it.
pub fn validate_block(b: &Block, dag: &BlockDag, rules: &ElectionRules) -> Validity {
    validate_inner(b, dag, rules, false)
}

/// Sum of tipset sizes from genesis to `t`, genesis counting 1.
pub fn weight(t: &TipsetKey, dag: &BlockDag) -> Result<u64, ChainError> {
    let blocks = dag.resolve(t)?;
    Ok(dag.blocks[&blocks[0].id].parents_weight + blocks.len() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainView {
    pub tipsets: Vec<TipsetKey>,
}

impl ChainView {
    pub fn sizes(&self) -> Vec<usize> {
        self.tipsets.iter().map(|t| t.len()).collect()
    }

    pub fn weight(&self) -> u64 {
        self.tipsets.iter().map(|t| t.len() as u64).sum()
    }

    pub fn tip(&self) -> &TipsetKey {
        self.tipsets.last().expect("chain always holds genesis")
    }
}

pub fn chain_of(t: &TipsetKey, dag: &BlockDag) -> Result<ChainView, ChainError> {
    let mut out = Vec::new();
    let mut cur = t.clone();
    while !cur.is_empty() {
        let blocks = dag.resolve(&cur)?;
        let parent = blocks[0].parents.clone();
        out.push(cur);
        cur = parent;
    }
    out.reverse();
    Ok(ChainView { tipsets: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// Ties go to tips holding an adversarial block; among those the lowest key.
    AdversaryFavoring,
    /// Ties go to the tip holding the smallest election-proof value.
    MinProof,
}

fn min_y(t: &TipsetKey, dag: &BlockDag) -> f64 {
    t.ids()
        .iter()
        .filter_map(|id| dag.get(id))
        .map(|b| b.proof.y)
        .fold(f64::INFINITY, f64::min)
}

fn has_adversarial(t: &TipsetKey, dag: &BlockDag) -> bool {
    t.ids().iter().filter_map(|id| dag.get(id)).any(|b| b.adversarial)
}

/// Breaks a tie among equal-weight candidates. Under `AdversaryFavoring` the
/// adversary may name its preferred tip through `hint`.
pub fn break_tie<'a>(
    dag: &BlockDag,
    tied: &[&'a TipsetKey],
    policy: TieBreakPolicy,
    hint: Option<&TipsetKey>,
) -> &'a TipsetKey {
    match policy {
        TieBreakPolicy::AdversaryFavoring => {
            if let Some(h) = hint {
                if let Some(t) = tied.iter().find(|t| **t == h) {
                    return t;
                }
            }
            tied.iter()
                .filter(|t| has_adversarial(t, dag))
                .min()
                .or_else(|| tied.iter().min())
                .copied()
                .expect("tie set is non-empty")
        }
        TieBreakPolicy::MinProof => tied
            .iter()
            .min_by(|a, b| min_y(a, dag).total_cmp(&min_y(b, dag)).then_with(|| a.cmp(b)))
            .copied()
            .expect("tie set is non-empty"),
    }
}

pub fn fork_choice(
    dag: &BlockDag,
    views: &[TipsetKey],
    policy: TieBreakPolicy,
) -> Result<TipsetKey, ChainError> {
    fork_choice_hinted(dag, views, policy, None)
}

pub fn fork_choice_hinted(
    dag: &BlockDag,
    views: &[TipsetKey],
    policy: TieBreakPolicy,
    hint: Option<&TipsetKey>,
) -> Result<TipsetKey, ChainError> {
    if views.is_empty() {
        return Err(ChainError::EmptyViews);
    }
    let weights: Vec<u64> = views.iter().map(|t| weight(t, dag)).collect::<Result<_, _>>()?;
    let max = *weights.iter().max().unwrap();
    let tied: Vec<&TipsetKey> = views.iter().zip(&weights).filter(|(_, w)| **w == max).map(|(t, _)| t).collect();
    Ok(break_tie(dag, &tied, policy, hint).clone())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::election::mock_vrf_prove;
    use proptest::prelude::*;

    pub const SEED: u64 = 1234;

    pub fn rules() -> ElectionRules {
        ElectionRules { seed: SEED, target: None }
    }

    pub fn mk(dag: &mut BlockDag, epoch: u64, miner: MinerId, parents: &TipsetKey, adv: bool) -> Block {
        let b = Block::new(epoch, miner, parents.clone(), mock_vrf_prove(miner, epoch, SEED), adv, 0);
        dag.insert(b.clone()).unwrap();
        b
    }

    fn key(bs: &[&Block]) -> TipsetKey {
        tipset_key(bs).unwrap()
    }

    /// A B C at epoch 1 on genesis; D E at 2; F G H at 4 (epoch 3 empty).
    pub fn figure_one() -> (BlockDag, Vec<Block>) {
        let mut dag = BlockDag::new(rules());
        let g = dag.genesis_key();
        let a = mk(&mut dag, 1, 1, &g, false);
        let b = mk(&mut dag, 1, 2, &g, false);
        let c = mk(&mut dag, 1, 3, &g, false);
        let t1 = key(&[&a, &b, &c]);
        let d = mk(&mut dag, 2, 4, &t1, false);
        let e = mk(&mut dag, 2, 5, &t1, false);
        let t2 = key(&[&d, &e]);
        let f = mk(&mut dag, 4, 6, &t2, false);
        let gg = mk(&mut dag, 4, 7, &t2, false);
        let h = mk(&mut dag, 4, 8, &t2, false);
        (dag, vec![a, b, c, d, e, f, gg, h])
    }

    #[test]
    fn genesis_key_and_weight() {
        let dag = BlockDag::new(rules());
        let g = dag.genesis().clone();
        assert_eq!(tipset_key(&[&g]).unwrap(), dag.genesis_key());
        assert_eq!(weight(&dag.genesis_key(), &dag).unwrap(), 1);
        assert_eq!(chain_of(&dag.genesis_key(), &dag).unwrap().tipsets, vec![dag.genesis_key()]);
    }

    #[test]
    fn tipset_key_is_order_insensitive() {
        let (_, bs) = figure_one();
        let (a, b, c) = (&bs[0], &bs[1], &bs[2]);
        let perms = [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
        let k0 = tipset_key(&perms[0]).unwrap();
        for p in &perms {
            assert_eq!(tipset_key(p).unwrap(), k0);
        }
    }

    #[test]
    fn tipset_rule_violations() {
        let (_, bs) = figure_one();
        assert_eq!(tipset_key(&[]), Err(TipsetError::Empty));
        assert_eq!(tipset_key(&[&bs[2], &bs[3]]), Err(TipsetError::MixedEpoch));
        let g = TipsetKey::from_ids(vec![bs[0].id()]);
        let other = Block::new(2, 9, g, mock_vrf_prove(9, 2, SEED), false, 0);
        assert_eq!(tipset_key(&[&bs[3], &other]), Err(TipsetError::MixedParents));
        let twin = Block::new(2, 4, bs[3].parents().clone(), *bs[3].proof(), true, 1);
        assert_eq!(tipset_key(&[&bs[3], &twin]), Err(TipsetError::DuplicateProof));
    }

    #[test]
    fn figure_one_weight_and_chain() {
        let (dag, bs) = figure_one();
        let tip = key(&[&bs[5], &bs[6], &bs[7]]);
        let chain = chain_of(&tip, &dag).unwrap();
        assert_eq!(chain.sizes(), vec![1, 3, 2, 3]);
        let summed: u64 = chain.sizes().iter().map(|s| *s as u64).sum();
        assert_eq!(weight(&tip, &dag).unwrap(), summed);
        assert_eq!(summed, 9);
        assert_eq!(chain.tip(), &tip);
        for w in chain.tipsets.windows(2) {
            assert_eq!(dag.parent_of(&w[1]).unwrap(), &w[0]);
        }
    }

    #[test]
    fn child_weight_adds_size() {
        let (dag, bs) = figure_one();
        let parent = key(&[&bs[3], &bs[4]]);
        let child = key(&[&bs[5], &bs[6]]);
        assert_eq!(weight(&child, &dag).unwrap(), weight(&parent, &dag).unwrap() + 2);
    }

    #[test]
    fn validation_outcomes() {
        let mut dag = BlockDag::new(rules());
        let g = dag.genesis_key();
        let ok = Block::new(1, 1, g.clone(), mock_vrf_prove(1, 1, SEED), false, 0);
        assert_eq!(validate_block(&ok, &dag, &rules()), Validity::Valid);

        let proof = mock_vrf_prove(2, 1, SEED);
        let strict = ElectionRules { seed: SEED, target: Some(proof.y / 2.0) };
        let over = Block::new(1, 2, g.clone(), proof, false, 0);
        assert_eq!(validate_block(&over, &dag, &strict), Validity::Invalid(InvalidReason::BadElection));

        let a = mk(&mut dag, 1, 1, &g, false);
        let b = mk(&mut dag, 2, 2, &TipsetKey::from_ids(vec![a.id()]), false);
        let bad_parents = TipsetKey::from_ids(vec![a.id(), b.id()]);
        let c = Block::new(3, 3, bad_parents, mock_vrf_prove(3, 3, SEED), false, 0);
        assert_eq!(validate_block(&c, &dag, &rules()), Validity::Invalid(InvalidReason::ParentsNotTipset));

        let orphan_parent = Block::new(1, 7, g, mock_vrf_prove(7, 1, SEED), false, 0);
        let orphan = Block::new(2, 8, TipsetKey::from_ids(vec![orphan_parent.id()]), mock_vrf_prove(8, 2, SEED), false, 0);
        assert_eq!(validate_block(&orphan, &dag, &rules()), Validity::Invalid(InvalidReason::MissingParent));
        assert_eq!(dag.insert(orphan), Err(ChainError::Invalid(InvalidReason::MissingParent)));
    }

    #[test]
    fn parents_must_be_older() {
        let mut dag = BlockDag::new(rules());
        let g = dag.genesis_key();
        let a = mk(&mut dag, 2, 1, &g, false);
        let same_epoch = Block::new(2, 2, TipsetKey::from_ids(vec![a.id()]), mock_vrf_prove(2, 2, SEED), false, 0);
        assert_eq!(validate_block(&same_epoch, &dag, &rules()), Validity::Invalid(InvalidReason::ParentsNotTipset));
    }

    #[test]
    fn fork_choice_cases() {
        let (mut dag, bs) = figure_one();
        let tip9 = key(&[&bs[5], &bs[6], &bs[7]]);
        assert_eq!(fork_choice(&dag, std::slice::from_ref(&tip9), TieBreakPolicy::MinProof).unwrap(), tip9);
        assert_eq!(fork_choice(&dag, &[], TieBreakPolicy::MinProof), Err(ChainError::EmptyViews));

        let tip8 = key(&[&bs[5], &bs[6]]);
        assert_eq!(weight(&tip8, &dag).unwrap() + 1, weight(&tip9, &dag).unwrap());
        for p in [TieBreakPolicy::AdversaryFavoring, TieBreakPolicy::MinProof] {
            assert_eq!(fork_choice(&dag, &[tip8.clone(), tip9.clone()], p).unwrap(), tip9);
        }

        // Two equal-weight tips on the same parent, one adversarial.
        let t2 = key(&[&bs[3], &bs[4]]);
        let honest = mk(&mut dag, 3, 20, &t2, false);
        let adv = mk(&mut dag, 3, 21, &t2, true);
        let hk = TipsetKey::from_ids(vec![honest.id()]);
        let ak = TipsetKey::from_ids(vec![adv.id()]);
        let got = fork_choice(&dag, &[hk.clone(), ak.clone()], TieBreakPolicy::AdversaryFavoring).unwrap();
        assert_eq!(got, ak);
        let got = fork_choice(&dag, &[ak.clone(), hk.clone()], TieBreakPolicy::MinProof).unwrap();
        let want = if honest.proof().y < adv.proof().y { hk } else { ak };
        assert_eq!(got, want);
    }

    #[test]
    fn ancestry_queries() {
        let (dag, bs) = figure_one();
        let tip = key(&[&bs[5], &bs[6], &bs[7]]);
        let t1 = key(&[&bs[0], &bs[1], &bs[2]]);
        assert!(dag.is_ancestor(&t1, &tip));
        assert!(dag.is_ancestor(&tip, &tip));
        assert!(!dag.is_ancestor(&key(&[&bs[0]]), &tip));
        assert!(dag.chain_contains_block(&tip, &bs[1].id()));
        assert_eq!(dag.ancestor_at(&tip, 3), Some(key(&[&bs[3], &bs[4]])));
    }

    proptest! {
        #[test]
        fn key_canonical_under_permutation(n in 1usize..8, seed in any::<u64>()) {
            let mut dag = BlockDag::new(rules());
            let g = dag.genesis_key();
            let mut blocks: Vec<Block> = (0..n as u32).map(|i| mk(&mut dag, 1, i, &g, false)).collect();
            let k0 = tipset_key(&blocks.iter().collect::<Vec<_>>()).unwrap();
            let mut s = seed;
            for i in (1..blocks.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                blocks.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(tipset_key(&blocks.iter().collect::<Vec<_>>()).unwrap(), k0);
        }

        #[test]
        fn random_dag_weights_and_fork_choice(choices in proptest::collection::vec((0usize..4, 1u32..4), 1..25)) {
            // Grow a random DAG: each step picks an existing tipset and adds a
            // child tipset of the given size one epoch later.
            let mut dag = BlockDag::new(rules());
            let mut tips = vec![dag.genesis_key()];
            let mut miner = 0u32;
            for (pick, size) in choices {
                let parent = tips[pick % tips.len()].clone();
                let epoch = dag.epoch_of(&parent).unwrap() + 1;
                let blocks: Vec<Block> = (0..size).map(|_| { miner += 1; mk(&mut dag, epoch, miner, &parent, miner.is_multiple_of(3)) }).collect();
                let k = tipset_key(&blocks.iter().collect::<Vec<_>>()).unwrap();
                prop_assert!(weight(&k, &dag).unwrap() > weight(&parent, &dag).unwrap());
                tips.push(k);
            }
            for t in &tips {
                let c = chain_of(t, &dag).unwrap();
                prop_assert_eq!(c.weight(), weight(t, &dag).unwrap());
                prop_assert_eq!(c.tip(), t);
            }
            let max = tips.iter().map(|t| weight(t, &dag).unwrap()).max().unwrap();
            for p in [TieBreakPolicy::AdversaryFavoring, TieBreakPolicy::MinProof] {
                let chosen = fork_choice(&dag, &tips, p).unwrap();
                prop_assert_eq!(weight(&chosen, &dag).unwrap(), max);
            }
        }
    }
}
