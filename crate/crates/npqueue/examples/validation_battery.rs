//! Runs the four consistency tests (aggregate, exclusively-high,
//! exclusively-low, nearest-neighbour) for both engines over a parameter
//! grid and prints the worst-case decimal places of agreement.
//!
//! ```bash
//! cargo run --release --example validation_battery           # quick grid
//! cargo run --release --example validation_battery -- --full # full grid
//! ```

use npqueue::validation::{aggregation_test, nn_test, xhi_test, xlo_test};
use npqueue::{Method, ModelParams};
use rayon::prelude::*;

fn main() {
    let full = std::env::args().any(|a| a == "--full");
    let rs: Vec<f64> = if full {
        vec![0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 0.9999]
    } else {
        vec![0.5, 0.9, 0.99]
    };
    let nus: Vec<f64> = if full {
        (1..=19).map(|i| i as f64 * 0.05).collect()
    } else {
        vec![0.05, 0.25, 0.5, 0.75, 0.95]
    };
    let n_lim = 1000;

    println!(
        "{:>8} {:>6} {:>6} | {:>8} {:>8} {:>8} {:>8}",
        "r", "nu", "engine", "agg", "xhi", "xlo", "nn"
    );
    let mut rows: Vec<((f64, f64, &str), [f64; 4])> = rs
        .iter()
        .flat_map(|&r| nus.iter().map(move |&nu| (r, nu)))
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map(|&(r, nu)| {
            let p = ModelParams::new(r, nu).unwrap();
            [Method::QuadraticRecurrence, Method::RIntegral].map(|engine| {
                let xi = [
                    aggregation_test(&p, engine, n_lim, 1e-20).unwrap().xi,
                    xhi_test(&p, engine, n_lim, 1e-30).unwrap().xi,
                    xlo_test(&p, engine, n_lim, 1e-20).unwrap().xi,
                    nn_test(&p, engine, n_lim, 1e-20).unwrap().xi,
                ];
                ((r, nu, engine.tag()), xi)
            })
        })
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut worst = f64::INFINITY;
    for ((r, nu, engine), xi) in rows {
        println!(
            "{r:>8} {nu:>6.2} {engine:>6} | {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
            xi[0], xi[1], xi[2], xi[3]
        );
        worst = xi.iter().fold(worst, |w, &x| w.min(x));
    }
    println!("\nworst-case agreement: {worst:.2} decimal places (target: >= 8)");
}
