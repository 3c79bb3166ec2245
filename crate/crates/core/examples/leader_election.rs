//! Leader draws in both election modes, with empirical rates against their means.
//!
//! cargo run --example leader_election

use ecsim::election::{draw_leaders, flat_election, mock_vrf_prove, mock_vrf_verify, RngStream};

fn main() {
    let (m, beta, epochs) = (5.0, 0.2, 100_000u64);
    let mut rng = RngStream::new(1, "example", 0);
    let (mut h, mut z, mut empty) = (0u64, 0u64, 0u64);
    for _ in 0..epochs {
        let d = draw_leaders(&mut rng, m, beta).unwrap();
        h += d.honest_count as u64;
        z += d.adversary_count as u64;
        empty += (d.honest_count == 0) as u64;
    }
    let n = epochs as f64;
    println!("statistical: H {:.3} (want {:.3}), Z {:.3} (want {:.3})", h as f64 / n, (1.0 - beta) * m, z as f64 / n, beta * m);
    println!("no honest leader in {:.4} of epochs (want {:.4})", empty as f64 / n, (-(1.0 - beta) * m).exp());

    let mut rng = RngStream::new(1, "flat", 0);
    let total: usize = (0..10_000).map(|_| flat_election(&mut rng, 50, m).unwrap().len()).sum();
    println!("identity, 50 participants: {:.3} leaders per epoch (want {m})", total as f64 / 10_000.0);

    let proof = mock_vrf_prove(3, 10, 42);
    println!("proof y = {:.6}, verifies: {}, under another seed: {}", proof.y, mock_vrf_verify(&proof, 42), mock_vrf_verify(&proof, 43));
}
