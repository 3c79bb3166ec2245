//! Finite-horizon Nakamoto epochs and the runtime check that their blocks stick.
//!
//! Epoch `s` is flagged when it is isolated successful and, for every
//! `r in [0, s-2]` and `t in [s, T]`, `Z(r-1, t] < X(r+1, t]`. With prefix sums
//! `PZ`, `PX` the margin `X(r+1, t] - Z(r-1, t]` splits into
//! `(PZ[r-1] - PX[r+1]) - (PZ[t] - PX[t])`, so the smallest margin for `s` is a
//! prefix minimum minus a suffix maximum and the whole scan is linear.

use serde::{Deserialize, Serialize};

use super::series::SeriesBundle;
use super::AnalysisError;
use crate::chain::{BlockDag, BlockId, FastMap, TipsetKey};
use crate::netsim::Trace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NakamotoEpoch {
    pub epoch: u64,
    /// Smallest margin over all `(r, t)` pairs; `None` when no `r` exists (`s = 1`).
    pub witness: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NakamotoReport {
    pub horizon: u64,
    pub epochs: Vec<NakamotoEpoch>,
}

impl NakamotoReport {
    pub fn flagged(&self) -> Vec<u64> {
        self.epochs.iter().map(|e| e.epoch).collect()
    }
}

/// Margin for a single candidate `s` at horizon `horizon`, or `None` if `s`
/// fails `F_s`. Does not check `U_s`.
pub fn nakamoto_margin(series: &SeriesBundle, s: u64, horizon: u64) -> Result<Option<Option<i64>>, AnalysisError> {
    if horizon < s {
        return Err(AnalysisError::HorizonTooShort { s, horizon });
    }
    if horizon as usize > series.last_epoch() {
        return Err(AnalysisError::HorizonBeyondTrace { horizon, last: series.last_epoch() as u64 });
    }
    let (s, t_end) = (s as i64, horizon as i64);
    let max_b = (s..=t_end).map(|t| series.prefix_z(t) - series.prefix_x(t)).max().unwrap();
    let min_a = (0..=s - 2).map(|r| series.prefix_z(r - 1) - series.prefix_x(r + 1)).min();
    Ok(match min_a {
        None => Some(None),
        Some(a) if a - max_b > 0 => Some(Some(a - max_b)),
        Some(_) => None,
    })
}

pub fn detect_nakamoto(series: &SeriesBundle, horizon: u64) -> Result<NakamotoReport, AnalysisError> {
    let last = series.last_epoch() as u64;
    if horizon > last {
        return Err(AnalysisError::HorizonBeyondTrace { horizon, last });
    }
    let t_end = horizon as usize;
    // suffix_max[s] = max over t in [s, T] of PZ[t] - PX[t].
    let mut suffix_max = vec![i64::MIN; t_end + 2];
    for t in (0..=t_end).rev() {
        let b = series.prefix_z(t as i64) - series.prefix_x(t as i64);
        suffix_max[t] = suffix_max[t + 1].max(b);
    }
    let mut epochs = Vec::new();
    let mut prefix_min: Option<i64> = None;
    for s in 1..=t_end {
        if s >= 2 {
            let r = s as i64 - 2;
            let a = series.prefix_z(r - 1) - series.prefix_x(r + 1);
            prefix_min = Some(prefix_min.map_or(a, |m| m.min(a)));
        }
        if !(series.h[s - 1] == 0 && series.y[s] == 1) {
            continue;
        }
        match prefix_min {
            None => epochs.push(NakamotoEpoch { epoch: s as u64, witness: None }),
            Some(a) if a - suffix_max[s] > 0 => epochs.push(NakamotoEpoch {
                epoch: s as u64,
                witness: Some(a - suffix_max[s]),
            }),
            _ => {}
        }
    }
    Ok(NakamotoReport { horizon, epochs })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Violation {
    pub s: u64,
    pub epoch: u64,
    pub node: usize,
}

/// For each flagged `s`, checks that the single honest block of epoch `s` is on
/// every honest node's chain at every epoch in `[s, T]`.
pub fn check_lemma1(trace: &Trace, dag: &BlockDag, report: &NakamotoReport) -> Vec<Lemma1Violation> {
    let mut out = Vec::new();
    let horizon = (report.horizon as usize).min(trace.records.len());
    for flagged in &report.epochs {
        let s = flagged.epoch;
        let Some(rec) = trace.records.get(s as usize - 1) else {
            continue;
        };
        let Some(&b) = rec.honest_blocks.first() else {
            out.push(Lemma1Violation { s, epoch: s, node: 0 });
            continue;
        };
        let mut memo: FastMap<TipsetKey, bool> = FastMap::default();
        for rec in &trace.records[s as usize - 1..horizon] {
            for (node, tip) in rec.tips.iter().enumerate() {
                if !contains_memo(dag, tip, &b, s, &mut memo) {
                    out.push(Lemma1Violation { s, epoch: rec.epoch, node });
                }
            }
        }
    }
    out
}

/// Whether `b` (mined at epoch `s`) lies on `tip`'s chain, caching every tipset walked.
fn contains_memo(dag: &BlockDag, tip: &TipsetKey, b: &BlockId, s: u64, memo: &mut FastMap<TipsetKey, bool>) -> bool {
    let mut path: Vec<TipsetKey> = Vec::new();
    let mut cur = tip.clone();
    let answer = loop {
        if let Some(&v) = memo.get(&cur) {
            break v;
        }
        let Some(e) = dag.epoch_of(&cur) else {
            break false;
        };
        if e <= s {
            let v = e == s && cur.contains(b);
            memo.insert(cur.clone(), v);
            break v;
        }
        let parent = dag.parent_of(&cur).cloned().unwrap_or_default();
        path.push(std::mem::replace(&mut cur, parent));
    };
    for k in path {
        memo.insert(k, answer);
    }
    answer
}
