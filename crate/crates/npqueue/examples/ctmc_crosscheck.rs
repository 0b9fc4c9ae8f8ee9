//! Checks both engines against an independent oracle: the stationary
//! distribution of the truncated single-server chain, solved as a block
//! tridiagonal linear system with no code shared with the engines.
//!
//! ```bash
//! cargo run --release --example ctmc_crosscheck
//! ```

use npqueue::validation::{ctmc_oracle, default_truncation};
use npqueue::{quadratic, rintegral, ModelParams};

fn main() {
    for (r, nu) in [(0.5, 0.5), (0.75, 0.9), (0.9, 0.25)] {
        let params = ModelParams::new(r, nu).unwrap();
        let k = default_truncation(r);
        let oracle = ctmc_oracle(&params, Some(k)).unwrap();
        let qr = quadratic::joint_qr(&params, 20, 20);
        let ri = rintegral::joint_ri(&params, 20, 20);

        let mut worst_qr = 0.0f64;
        let mut worst_ri = 0.0f64;
        for n in 0..=20usize {
            for m in 0..=20usize {
                worst_qr = worst_qr.max((oracle.joint.get(n, m) - qr.get(n, m)).abs());
                worst_ri = worst_ri.max((oracle.joint.get(n, m) - ri.get(n, m)).abs());
            }
        }
        println!(
            "r = {r}, nu = {nu}: K = {k}, balance residual = {:.2e}, tail bound = {:.2e}",
            oracle.residual, oracle.tail_bound
        );
        println!("  max |oracle - recurrence|      = {worst_qr:.3e}");
        println!("  max |oracle - integral series| = {worst_ri:.3e}");
        println!("  idle probability                = {:.12}", oracle.idle_probability);
    }
}
