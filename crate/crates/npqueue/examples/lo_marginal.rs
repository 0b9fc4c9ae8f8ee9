//! Computes the wait-conditional low-priority marginal with both engines
//! and shows their agreement.
//!
//! ```bash
//! cargo run --release --example lo_marginal
//! ```

use npqueue::{quadratic, rintegral, ModelParams};

fn main() {
    let params = ModelParams::new(0.9, 0.5).unwrap();
    let n_max = 200;

    let qr = quadratic::lo_marginal_qr(&params, n_max);
    let ri = rintegral::lo_marginal_ri(&params, n_max);

    println!("f_lo(n) for r = {}, nu = {} (given all servers busy)\n", params.r(), params.nu());
    println!("{:>5} {:>24} {:>24} {:>8}", "n", "recurrence", "integral series", "digits");
    for n in [0, 1, 2, 5, 10, 20, 50, 100, 200] {
        let (a, b) = (qr.values[n], ri.values[n]);
        let digits = -((a / b).ln().abs().max(1e-17)).log10();
        println!("{n:>5} {a:>24.16e} {b:>24.16e} {digits:>8.1}");
    }

    let mass: f64 = qr.values.iter().sum();
    println!("\nmass captured by n <= {n_max}: {mass:.12}");
    println!("negative round-off clamps: {} (gross: {})", qr.clamped, qr.gross_negatives);
}
