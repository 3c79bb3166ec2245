//! Leader election and randomness.
//!
//! Everything random in a run flows through [`RngStream`], a ChaCha20
//! keystream keyed by `(seed, label)` and positioned by a 64-bit counter
//! (the ChaCha stream id). Epoch `r` of the election stream is always
//! `RngStream::new(seed, "election", r)`, so a draw never depends on how much
//! randomness other parts of the run consumed.
//!
//! The beacon and the VRF are keyed SHA-256 constructions. They are not
//! cryptographically meaningful; they only have to be deterministic, unique
//! per `(miner, epoch)`, and uniform.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Participant index. Statistical mode synthesizes identities for leaders.
pub type MinerId = u32;

/// Miner id carried by the genesis block.
pub const GENESIS_MINER: MinerId = u32::MAX;

/// First miner id used for synthesized adversarial leaders in statistical mode.
pub const ADVERSARY_ID_BASE: MinerId = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectionError {
    #[error("bad election parameters: {0}")]
    BadParameters(String),
}

/// Counter-based deterministic generator.
///
/// The key is `SHA-256("ecsim/rng" || seed_be || label)`; the counter selects
/// the ChaCha20 stream. Output is the raw ChaCha20 keystream, read as
/// little-endian words, so any ChaCha20 implementation reproduces it.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    label: String,
    counter: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str, counter: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"ecsim/rng");
        h.update(seed.to_be_bytes());
        h.update(label.as_bytes());
        let key: [u8; 32] = h.finalize().into();
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(counter);
        RngStream {
            seed,
            label: label.to_string(),
            counter,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Rejection sampling keeps the result exactly uniform.
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Poisson sample by sequential inversion. Large means are split into
    /// chunks so `exp(-lambda)` never underflows.
    pub fn poisson(&mut self, lambda: f64) -> u32 {
        const CHUNK: f64 = 30.0;
        let mut remaining = lambda;
        let mut total = 0u32;
        while remaining > CHUNK {
            total += self.poisson_small(CHUNK);
            remaining -= CHUNK;
        }
        total + self.poisson_small(remaining)
    }

    fn poisson_small(&mut self, lambda: f64) -> u32 {
        if lambda <= 0.0 {
            return 0;
        }
        let u = self.next_f64();
        let mut k = 0u32;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if p == 0.0 && cdf < 1.0 {
                // Tail mass lost to rounding: u sits in a region of measure ~1e-16.
                break;
            }
        }
        k
    }
}

/// Per-epoch randomness, standing in for the drand output of `epoch`.
pub fn beacon(epoch: u64, seed: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ecsim/drand");
    h.update(seed.to_be_bytes());
    h.update(epoch.to_be_bytes());
    h.finalize().into()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectionProof {
    /// VRF output mapped to `[0, 1)`.
    pub y: f64,
    /// Verification token.
    pub p: [u8; 32],
    pub miner: MinerId,
    pub epoch: u64,
}

impl ElectionProof {
    pub fn genesis() -> Self {
        ElectionProof {
            y: 0.0,
            p: [0u8; 32],
            miner: GENESIS_MINER,
            epoch: 0,
        }
    }

    /// Bytes folded into block ids: `y` as big-endian IEEE-754 bits, then `p`.
    pub fn to_bytes(&self) -> [u8; 40] {
        let mut out = [0u8; 40];
        out[..8].copy_from_slice(&self.y.to_bits().to_be_bytes());
        out[8..].copy_from_slice(&self.p);
        out
    }
}

fn vrf_secret(seed: u64, miner: MinerId) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ecsim/vrf-key");
    h.update(seed.to_be_bytes());
    h.update(miner.to_be_bytes());
    h.finalize().into()
}

fn vrf_eval(seed: u64, miner: MinerId, epoch: u64) -> (f64, [u8; 32]) {
    let secret = vrf_secret(seed, miner);
    let input = beacon(epoch, seed);
    let mut h = Sha256::new();
    h.update(b"ecsim/vrf-out");
    h.update(secret);
    h.update(input);
    let out: [u8; 32] = h.finalize().into();
    let bits = u64::from_be_bytes(out[..8].try_into().unwrap()) >> 11;
    let y = bits as f64 * (1.0 / (1u64 << 53) as f64);

    let mut h = Sha256::new();
    h.update(b"ecsim/vrf-proof");
    h.update(secret);
    h.update(input);
    h.update(y.to_bits().to_be_bytes());
    (y, h.finalize().into())
}

pub fn mock_vrf_prove(miner: MinerId, epoch: u64, seed: u64) -> ElectionProof {
    let (y, p) = vrf_eval(seed, miner, epoch);
    ElectionProof { y, p, miner, epoch }
}

/// Accepts exactly the proofs [`mock_vrf_prove`] produces for `seed`.
pub fn mock_vrf_verify(proof: &ElectionProof, seed: u64) -> bool {
    if proof.miner == GENESIS_MINER {
        return *proof == ElectionProof::genesis();
    }
    let (y, p) = vrf_eval(seed, proof.miner, proof.epoch);
    y.to_bits() == proof.y.to_bits() && p == proof.p
}

/// Election parameters a validator checks proofs against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectionRules {
    pub seed: u64,
    /// Eligibility threshold on `y`; `None` in statistical mode, where leader
    /// counts are drawn directly and no target exists.
    pub target: Option<f64>,
}

impl ElectionRules {
    pub fn check(&self, proof: &ElectionProof) -> bool {
        mock_vrf_verify(proof, self.seed) && self.target.is_none_or(|t| proof.y <= t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeaderDraw {
    pub honest_count: u32,
    pub adversary_count: u32,
    /// Leader slots `0..honest_count`; the world maps them onto nodes.
    pub honest_leader_ids: Vec<MinerId>,
}

fn check_rate(m: f64, beta: f64) -> Result<(), ElectionError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(ElectionError::BadParameters(format!("m must be positive, got {m}")));
    }
    if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
        return Err(ElectionError::BadParameters(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Statistical-mode draw: `H ~ Poisson((1-beta) m)` then `Z ~ Poisson(beta m)`.
pub fn draw_leaders(rng: &mut RngStream, m: f64, beta: f64) -> Result<LeaderDraw, ElectionError> {
    check_rate(m, beta)?;
    let honest_count = rng.poisson((1.0 - beta) * m);
    let adversary_count = rng.poisson(beta * m);
    Ok(LeaderDraw {
        honest_count,
        adversary_count,
        honest_leader_ids: (0..honest_count).collect(),
    })
}

/// Flat model: each of `n` unit participants is elected with probability `m / n`.
pub fn flat_election(rng: &mut RngStream, n: u32, m: f64) -> Result<Vec<MinerId>, ElectionError> {
    if n == 0 {
        return Err(ElectionError::BadParameters("participant count must be >= 1".into()));
    }
    if !(m.is_finite() && m > 0.0 && m <= n as f64) {
        return Err(ElectionError::BadParameters(format!(
            "m must lie in (0, n], got m={m}, n={n}"
        )));
    }
    let p = m / n as f64;
    Ok((0..n).filter(|_| rng.next_f64() < p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chacha_matches_rfc_zero_key_vector() {
        // First keystream block for the all-zero key and nonce.
        let mut rng = ChaCha20Rng::from_seed([0u8; 32]);
        let mut buf = [0u8; 16];
        rng.fill_bytes(&mut buf);
        assert_eq!(
            buf,
            [
                0x76, 0xb8, 0xe0, 0xad, 0xa0, 0xf1, 0x3d, 0x90, 0x40, 0x5d, 0x6a, 0xe5, 0x53,
                0x86, 0xbd, 0x28
            ]
        );
    }

    #[test]
    fn stream_is_reproducible_and_counter_keyed() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, "election", 3);
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, "election", 3);
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let mut other = RngStream::new(7, "election", 4);
        assert_ne!(a[0], other.next_u64());
        let mut other = RngStream::new(7, "delivery", 3);
        assert_ne!(a[0], other.next_u64());
    }

    #[test]
    fn beacon_is_deterministic_and_distinct() {
        assert_eq!(beacon(1, 9), beacon(1, 9));
        assert_ne!(beacon(1, 9), beacon(2, 9));
        assert_ne!(beacon(1, 9), beacon(1, 10));
    }

    #[test]
    fn vrf_round_trip_and_tamper() {
        let proof = mock_vrf_prove(4, 11, 99);
        assert!(mock_vrf_verify(&proof, 99));
        assert!(!mock_vrf_verify(&proof, 98));
        let mut bad = proof;
        bad.y = (bad.y + 0.25) % 1.0;
        assert!(!mock_vrf_verify(&bad, 99));
        let mut bad = proof;
        bad.miner = 5;
        assert!(!mock_vrf_verify(&bad, 99));
        assert!((0.0..1.0).contains(&proof.y));
    }

    #[test]
    fn target_is_enforced() {
        let proof = mock_vrf_prove(1, 1, 5);
        let loose = ElectionRules { seed: 5, target: Some(1.0) };
        let tight = ElectionRules { seed: 5, target: Some(proof.y / 2.0) };
        assert!(loose.check(&proof));
        assert!(!tight.check(&proof));
    }

    #[test]
    fn zero_beta_never_elects_adversary() {
        for epoch in 0..2000 {
            let mut rng = RngStream::new(1, "election", epoch);
            assert_eq!(draw_leaders(&mut rng, 5.0, 0.0).unwrap().adversary_count, 0);
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        let mut rng = RngStream::new(1, "x", 0);
        assert!(draw_leaders(&mut rng, 0.0, 0.1).is_err());
        assert!(draw_leaders(&mut rng, 5.0, 1.0).is_err());
        assert!(draw_leaders(&mut rng, 5.0, -0.1).is_err());
        assert!(flat_election(&mut rng, 0, 1.0).is_err());
        assert!(flat_election(&mut rng, 3, 4.0).is_err());
    }

    #[test]
    fn full_rate_elects_everyone() {
        let mut rng = RngStream::new(3, "flat", 0);
        assert_eq!(flat_election(&mut rng, 10, 10.0).unwrap(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn honest_count_mean_and_zero_mass() {
        let n = 100_000u64;
        let (mut sum, mut zeros) = (0u64, 0u64);
        for epoch in 0..n {
            let mut rng = RngStream::new(42, "election", epoch);
            let d = draw_leaders(&mut rng, 5.0, 0.2).unwrap();
            sum += d.honest_count as u64;
            zeros += (d.honest_count == 0) as u64;
        }
        let mean = sum as f64 / n as f64;
        let sigma = (4.0f64 / n as f64).sqrt();
        assert!((mean - 4.0).abs() < (3.0 * sigma).max(0.05), "mean {mean}");
        let p0 = zeros as f64 / n as f64;
        assert!((p0 - (-4.0f64).exp()).abs() < 0.002, "P(H=0) {p0}");
    }

    #[test]
    fn flat_election_moments() {
        let n = 100_000u64;
        let mut counts = Vec::with_capacity(n as usize);
        for epoch in 0..n {
            let mut rng = RngStream::new(8, "flat", epoch);
            counts.push(flat_election(&mut rng, 1000, 5.0).unwrap().len() as f64);
        }
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 5.0).abs() < 0.05, "mean {mean}");
        let expected = 1000.0 * 0.005 * 0.995;
        assert!((var - expected).abs() / expected < 0.05, "var {var}");
    }

    #[test]
    fn vrf_outputs_are_uniform() {
        // One-sample Kolmogorov-Smirnov against U(0,1); 1% critical value
        // is 1.628 / sqrt(n) for large n.
        let mut ys: Vec<f64> = (0..100_000u32)
            .map(|i| mock_vrf_prove(i % 1000, (i / 1000) as u64 + 1, 17).y)
            .collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = ys.len() as f64;
        let d = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| ((i + 1) as f64 / n - y).max(y - i as f64 / n))
            .fold(0.0, f64::max);
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn poisson_tail_below_chernoff_shape() {
        // Sanity check on the sampler: P(X > (1+d) lambda) <= exp(-d^2 lambda / 3).
        let lambda = 4.0;
        let n = 1_000_000u64;
        let mut rng = RngStream::new(5, "tail", 0);
        let samples: Vec<u32> = (0..n).map(|_| rng.poisson(lambda)).collect();
        for delta in [0.25, 0.5, 0.75, 0.9] {
            let thresh = (1.0 + delta) * lambda;
            let tail = samples.iter().filter(|&&x| x as f64 > thresh).count() as f64 / n as f64;
            let bound = (-delta * delta * lambda / 3.0).exp();
            assert!(tail < bound, "delta {delta}: tail {tail} bound {bound}");
        }
    }
}
