//! Deterministic simulator and analysis toolkit for Expected Consensus, the
//! heaviest-tipset-chain protocol used by Filecoin.
//!
//! A run is a [`netsim::World`]: honest nodes mine on their heaviest tipset
//! each epoch while an [`adversary::Adversary`] schedules its own blocks and
//! deliveries. Traces feed the [`analysis`] passes: weight bounds, Nakamoto
//! epochs, ledger persistence and liveness, and Monte Carlo sweeps.

pub mod adversary;
pub mod analysis;
pub mod chain;
pub mod config;
pub mod election;
pub mod io;
pub mod mitigations;
pub mod netsim;

pub use adversary::{AdversaryConfig, SplitVariant, Strategy};
pub use chain::{Block, BlockDag, BlockId, TieBreakPolicy, TipsetKey};
pub use config::{Cell, ExperimentConfig, Mode};
pub use mitigations::Mitigation;
pub use netsim::{simulate, ElectionMode, EpochRecord, Trace, World, WorldConfig};
