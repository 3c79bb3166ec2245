//! Per-epoch random-variable series and the honest weight-bound checks.
//!
//! Index 0 is the genesis epoch (no leaders, weight 1); index `r` is epoch `r`.
//! Interval sums follow the half-open convention `S(a, b] = S[a+1] + .. + S[b]`
//! and accept `a = -1`, so `S(-1, b]` includes epoch 0.

use crate::election::{draw_leaders, ElectionError, RngStream};
use crate::netsim::Trace;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesBundle {
    pub h: Vec<u32>,
    pub z: Vec<u32>,
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    /// Empty for series built from leader counts alone.
    pub w_min: Vec<u64>,
    pub w_max: Vec<u64>,
    px: Vec<i64>,
    pz: Vec<i64>,
}

fn prefix(v: &[u32]) -> Vec<i64> {
    v.iter()
        .scan(0i64, |acc, &x| {
            *acc += x as i64;
            Some(*acc)
        })
        .collect()
}

impl SeriesBundle {
    /// Builds the series from per-epoch leader counts; `h[0]` and `z[0]` are genesis.
    pub fn from_counts(h: Vec<u32>, z: Vec<u32>) -> Self {
        assert_eq!(h.len(), z.len());
        let x: Vec<u32> = h.iter().map(|&v| (v >= 1) as u32).collect();
        let y: Vec<u32> = h.iter().map(|&v| (v == 1) as u32).collect();
        let px = prefix(&x);
        let pz = prefix(&z);
        SeriesBundle {
            h,
            z,
            x,
            y,
            w_min: Vec::new(),
            w_max: Vec::new(),
            px,
            pz,
        }
    }

    /// Last epoch index `T`.
    pub fn last_epoch(&self) -> usize {
        self.h.len() - 1
    }

    fn at(p: &[i64], i: i64) -> i64 {
        if i < 0 {
            0
        } else {
            p[i as usize]
        }
    }

    /// `X(a, b]`, the number of successful epochs in `a+1..=b`.
    pub fn x_sum(&self, a: i64, b: i64) -> i64 {
        if b <= a {
            return 0;
        }
        Self::at(&self.px, b) - Self::at(&self.px, a)
    }

    /// `Z(a, b]`, adversarial blocks elected in `a+1..=b`.
    pub fn z_sum(&self, a: i64, b: i64) -> i64 {
        if b <= a {
            return 0;
        }
        Self::at(&self.pz, b) - Self::at(&self.pz, a)
    }

    pub(crate) fn prefix_x(&self, i: i64) -> i64 {
        Self::at(&self.px, i)
    }

    pub(crate) fn prefix_z(&self, i: i64) -> i64 {
        Self::at(&self.pz, i)
    }

    /// Epochs `s` with `H[s-1] = 0` and exactly one honest block at `s`.
    pub fn isolated_successful(&self) -> Vec<usize> {
        (1..self.h.len()).filter(|&s| self.h[s - 1] == 0 && self.y[s] == 1).collect()
    }

    /// Epochs `r` where `W_min[r] <= W_max[r] <= W_min[r+1]` fails.
    pub fn weight_bound_violations(&self) -> Vec<usize> {
        let n = self.w_min.len();
        (0..n)
            .filter(|&r| self.w_min[r] > self.w_max[r] || (r + 1 < n && self.w_max[r] > self.w_min[r + 1]))
            .collect()
    }

    /// Pairs `(r, t)` with `W_min[t] < W_max[r] + X(r+1, t]`, one per failing `t`.
    ///
    /// Rewritten as `W_max[r] - PX[r+1] <= W_min[t] - PX[t]`, a prefix maximum
    /// over `r < t` makes this linear.
    pub fn min_growth_violations(&self) -> Vec<(usize, usize)> {
        let n = self.w_min.len();
        let mut out = Vec::new();
        let mut best: Option<(i64, usize)> = None;
        for t in 1..n {
            let r = t - 1;
            let v = self.w_max[r] as i64 - self.prefix_x(r as i64 + 1);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, r));
            }
            let (b, arg) = best.unwrap();
            if b > self.w_min[t] as i64 - self.prefix_x(t as i64) {
                out.push((arg, t));
            }
        }
        out
    }
}

/// Series of a simulated run, including genesis at index 0.
pub fn derive_series(trace: &Trace) -> SeriesBundle {
    let mut h = vec![0];
    let mut z = vec![0];
    let mut w_min = vec![1];
    let mut w_max = vec![1];
    for rec in &trace.records {
        h.push(rec.h);
        z.push(rec.z);
        w_min.push(rec.w_min);
        w_max.push(rec.w_max);
    }
    let mut s = SeriesBundle::from_counts(h, z);
    s.w_min = w_min;
    s.w_max = w_max;
    s
}

/// Leader-count series for epochs `1..=epochs` from the same election stream a
/// simulated world uses, without simulating the network.
pub fn series_from_draws(seed: u64, m: f64, beta: f64, epochs: u64) -> Result<SeriesBundle, ElectionError> {
    let mut h = Vec::with_capacity(epochs as usize + 1);
    let mut z = Vec::with_capacity(epochs as usize + 1);
    h.push(0);
    z.push(0);
    for r in 1..=epochs {
        let d = draw_leaders(&mut RngStream::new(seed, "election", r), m, beta)?;
        h.push(d.honest_count);
        z.push(d.adversary_count);
    }
    Ok(SeriesBundle::from_counts(h, z))
}
