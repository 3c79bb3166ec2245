//! Measurements over traces.

pub mod ledger;
pub mod nakamoto;
pub mod series;
pub mod stats;
pub mod sweep;
pub mod threshold;

use thiserror::Error;

pub use ledger::{check_ledger, confirmed_anchor, ledger_of, LedgerCheck, Violation, ViolationKind};
pub use nakamoto::{check_lemma1, detect_nakamoto, Lemma1Violation, NakamotoEpoch, NakamotoReport};
pub use series::{derive_series, series_from_draws, SeriesBundle};
pub use sweep::{run_cell, run_trial, summarize, sweep, trial_seed, SummaryRow, TrialOutcome};
pub use threshold::{solve_threshold, split_growth_rate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("horizon {horizon} is shorter than candidate epoch {s}")]
    HorizonTooShort { s: u64, horizon: u64 },
    #[error("horizon {horizon} exceeds the last traced epoch {last}")]
    HorizonBeyondTrace { horizon: u64, last: u64 },
    #[error("no threshold root in (0, 1) for m = {m}, c = {c}")]
    NoRoot { m: f64, c: f64 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
}
