use crate::chain::{Block, BlockId, TipsetKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recipients {
    All,
    Nodes(Vec<usize>),
}

/// When within the epoch a delivery lands. The plain protocol accepts both;
/// consistent broadcast treats late arrivals as rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeliveryPhase {
    BeforeCutoff,
    AfterCutoff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub block: BlockId,
    pub recipients: Recipients,
    pub phase: DeliveryPhase,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeliveryPlan {
    pub deliveries: Vec<Delivery>,
}

impl DeliveryPlan {
    pub fn push(&mut self, block: BlockId, recipients: Recipients, phase: DeliveryPhase) {
        self.deliveries.push(Delivery {
            block,
            recipients,
            phase,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.deliveries.is_empty()
    }
}

/// What the adversary does in one epoch.
#[derive(Clone, Debug, Default)]
pub struct StrategyDecision {
    /// New blocks, stored in the DAG but visible to nobody until delivered.
    pub blocks: Vec<Block>,
    pub plan: DeliveryPlan,
    /// Publish `publish` to every node this epoch.
    pub release: bool,
    pub publish: Vec<BlockId>,
    /// Per-node preferred tip for tie-breaking, indexed by node.
    pub hints: Vec<Option<TipsetKey>>,
    pub notes: Vec<String>,
}

impl StrategyDecision {
    pub fn equivocations(&self) -> u32 {
        self.blocks.iter().filter(|b| b.equivocation_tag() > 0).count() as u32
    }

    pub fn hint(&self, node: usize) -> Option<&TipsetKey> {
        self.hints.get(node).and_then(|h| h.as_ref())
    }
}
