//! The server-count layer: no-wait probability, empty-system probability,
//! and mixing the wait-conditional law into the unconditional one.
//!
//! ```bash
//! cargo run --release --example servers_and_conditioning
//! ```

use npqueue::model::{
    condition_decomposition, empty_system_probability, no_wait_probability,
    scaled_upper_incomplete_gamma,
};
use npqueue::{quadratic, ModelParams};

fn main() {
    let r = 0.75;
    println!("per-server intensity r = {r}:");
    println!("{:>4} {:>18} {:>18}", "N", "P(no wait)", "P(empty system)");
    for n in [1u32, 2, 4, 8, 16] {
        println!(
            "{n:>4} {:>18.12} {:>18.12}",
            no_wait_probability(r, n).unwrap(),
            empty_system_probability(r, n).unwrap()
        );
    }

    // The wait-conditional law depends only on (r, nu); the server count
    // enters through the mixing weight 1 - P(no wait).
    let params = ModelParams::new(r, 0.6).unwrap().with_servers(2).unwrap();
    let conditional = quadratic::lo_marginal_qr(&params, 30);
    let unconditional = condition_decomposition(&params, &conditional).unwrap();
    let p_nw = no_wait_probability(r, 2).unwrap();
    println!("\nN = 2 mixing weight on the conditional part: 1 - P_NW = {:.12}", 1.0 - p_nw);
    println!("{:>4} {:>22} {:>22}", "n", "wait-conditional", "unconditional");
    for n in 0..=6 {
        println!(
            "{n:>4} {:>22.14e} {:>22.14e}",
            conditional.values[n], unconditional.values[n]
        );
    }

    println!(
        "\nscaled upper incomplete gamma (used by the empty-system formula):\n  \
         G(x=10, shape=5) = {:.15} (exact: 0.7732)",
        scaled_upper_incomplete_gamma(10.0, 5.0).unwrap()
    );
}
