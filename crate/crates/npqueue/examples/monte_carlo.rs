//! Event-driven simulation of the full multi-server system against the
//! exact wait-conditional joint PMF.
//!
//! ```bash
//! cargo run --release --example monte_carlo
//! ```

use npqueue::validation::monte_carlo;
use npqueue::{quadratic, ModelParams};

fn main() {
    let params = ModelParams::new(0.75, 0.9).unwrap().with_servers(3).unwrap();
    let events = 2_000_000;
    let seed = 7;
    let sim = monte_carlo(&params, events, seed).unwrap();
    let exact = quadratic::joint_qr(&params, 40, 40);

    println!(
        "r = {}, nu = {}, N = {}, {} events (seed {}), busy fraction = {:.4}",
        params.r(),
        params.nu(),
        sim.n_servers,
        sim.events,
        sim.seed,
        sim.busy_fraction
    );
    println!("{:>4} {:>4} {:>12} {:>12} {:>10} {:>7}", "n", "m", "simulated", "exact", "std err", "z");
    let mut shown = 0;
    'outer: for k in 0..10usize {
        for n in 0..=k {
            let m = k - n;
            let want = exact.get(n, m);
            if want < 5e-3 || n > sim.estimates.n_max || m > sim.estimates.m_max {
                continue;
            }
            let got = sim.estimates.get(n, m);
            let se = sim.std_error(n, m);
            println!(
                "{n:>4} {m:>4} {got:>12.6} {want:>12.6} {se:>10.2e} {:>7.2}",
                (got - want) / se
            );
            shown += 1;
            if shown >= 15 {
                break 'outer;
            }
        }
    }
    println!("\npooled queue-length histogram vs (1-r) r^k:");
    for (k, (&est, &se)) in sim.aggregate.iter().zip(&sim.aggregate_se).enumerate().take(8) {
        let want = (1.0 - params.r()) * params.r().powi(k as i32);
        println!("  k={k}: {est:.6} vs {want:.6} (z = {:+.2})", (est - want) / se);
    }
}
