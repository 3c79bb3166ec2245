//! Monte Carlo trials and per-cell summaries.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::ledger::{check_ledger, ViolationKind};
use super::nakamoto::detect_nakamoto;
use super::series::derive_series;
use super::stats::{mean, wilson};
use crate::adversary::Strategy;
use crate::config::{Cell, ExperimentConfig};
use crate::mitigations::Mitigation;
use crate::netsim::{simulate, NetError, Trace};

/// Seed of trial `index` under `master`; shared across grid cells so cells
/// are compared on common randomness.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"ecsim/trial");
    h.update(master.to_be_bytes());
    h.update(index.to_be_bytes());
    u64::from_be_bytes(h.finalize()[..8].try_into().unwrap())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub index: u64,
    pub seed: u64,
    /// At least one persistence violation.
    pub success: bool,
    pub final_lead: i64,
    pub nakamoto_epochs: usize,
    pub persistence_violations: usize,
    pub liveness_violations: usize,
    pub first_violation_epoch: Option<u64>,
}

pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, index: u64) -> Result<(TrialOutcome, Trace), NetError> {
    let seed = trial_seed(cfg.seed, index);
    let (trace, net, _) = simulate(cfg.world_config(cell, seed), cfg.epochs)?;
    let series = derive_series(&trace);
    let nakamoto = detect_nakamoto(&series, series.last_epoch() as u64).expect("horizon within trace");
    let ledger = check_ledger(&trace, net.dag(), cfg.tau, cfg.liveness_u);
    let persistence = ledger.count(ViolationKind::Persistence);
    let outcome = TrialOutcome {
        index,
        seed,
        success: persistence > 0,
        final_lead: trace.records.last().map_or(0, |r| r.lead),
        nakamoto_epochs: nakamoto.epochs.len(),
        persistence_violations: persistence,
        liveness_violations: ledger.count(ViolationKind::Liveness),
        first_violation_epoch: ledger.first(ViolationKind::Persistence).map(|v| v.epoch),
    };
    Ok((outcome, trace))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub m: f64,
    pub beta: f64,
    pub strategy: Strategy,
    pub mitigation: Mitigation,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_final_lead: f64,
    pub nakamoto_rate: f64,
    pub persistence_violations: u64,
    pub liveness_violations: u64,
    pub seed: u64,
}

impl SummaryRow {
    pub fn ci(&self) -> (f64, f64) {
        (self.ci_low, self.ci_high)
    }
}

pub fn summarize(cell: &Cell, outcomes: &[TrialOutcome], epochs: u64, seed: u64) -> SummaryRow {
    let trials = outcomes.len() as u64;
    let successes = outcomes.iter().filter(|o| o.success).count() as u64;
    let (ci_low, ci_high) = wilson(successes, trials);
    let leads: Vec<f64> = outcomes.iter().map(|o| o.final_lead as f64).collect();
    let rates: Vec<f64> = outcomes.iter().map(|o| o.nakamoto_epochs as f64 / epochs as f64).collect();
    SummaryRow {
        m: cell.m,
        beta: cell.beta,
        strategy: cell.strategy,
        mitigation: cell.mitigation,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        ci_low,
        ci_high,
        mean_final_lead: mean(&leads),
        nakamoto_rate: mean(&rates),
        persistence_violations: outcomes.iter().map(|o| o.persistence_violations as u64).sum(),
        liveness_violations: outcomes.iter().map(|o| o.liveness_violations as u64).sum(),
        seed,
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Runs every trial of one cell, in parallel, returning outcomes in trial
/// order. Traces are kept only when asked for.
pub fn run_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    keep_traces: bool,
) -> Result<(Vec<TrialOutcome>, Vec<Trace>), NetError> {
    let results: Vec<(TrialOutcome, Option<Trace>)> = in_pool(cfg.jobs, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, cell, i).map(|(o, t)| (o, keep_traces.then_some(t))))
            .collect::<Result<_, _>>()
    })?;
    let mut outcomes = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for (o, t) in results {
        outcomes.push(o);
        traces.extend(t);
    }
    Ok((outcomes, traces))
}

/// One summary row per grid cell, sorted by `(m, beta, strategy, mitigation)`.
/// Cells with zero trials produce no row.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>, NetError> {
    let mut rows = Vec::new();
    if cfg.trials == 0 {
        return Ok(rows);
    }
    for cell in cfg.cells() {
        let (outcomes, _) = run_cell(cfg, &cell, false)?;
        rows.push(summarize(&cell, &outcomes, cfg.epochs, cfg.seed));
    }
    Ok(rows)
}
