//! Tail-law overlay for the low-priority marginal: regimes, coefficients,
//! and the convergence of the computed PMF to its asymptote.
//!
//! ```bash
//! cargo run --release --example asymptote_overlay
//! ```

use npqueue::asymptotics::{asymptote_convergence_report, TailAsymptote};
use npqueue::{quadratic, ModelParams};

fn main() {
    for (r, nu) in [(0.9, 0.5), (0.5, 0.5), (0.5, 0.9)] {
        let params = ModelParams::new(r, nu).unwrap();
        let asym = TailAsymptote::new(&params).unwrap();
        println!(
            "r = {r}, nu = {nu}: regime = {}, chi = {:.6}, pole coefficient = {:.6e}",
            asym.regime.label(),
            asym.chi,
            asym.pole_coeff
        );
        let lo = quadratic::lo_marginal_qr(&params, 1000);
        println!("{:>6} {:>22} {:>22} {:>12}", "n", "f_lo(n)", "asymptote", "rel err");
        for n in [50, 100, 200, 500, 1000] {
            let a = asym.eval(n);
            println!(
                "{n:>6} {:>22.14e} {:>22.14e} {:>12.3e}",
                lo.values[n],
                a,
                (lo.values[n] / a - 1.0).abs()
            );
        }
        let report = asymptote_convergence_report(&params, 500, 1000).unwrap();
        let last = report.rel_errors.last().unwrap();
        println!("relative error at n = {}: {:.3e}\n", last.0, last.1);
    }
}
