//! Writes the joint queue-length PMF as plot-ready CSV files: the raw
//! probabilities and the logarithmically mapped surface
//! `max(0, 1 + log10(f/f_max)/20)`.
//!
//! ```bash
//! cargo run --release --example joint_map
//! ```

use npqueue::cli;
use npqueue::output::OutputFormat;
use npqueue::{quadratic, ModelParams};
use std::path::Path;

fn main() {
    let params = ModelParams::new(0.75, 0.9).unwrap();
    let (n_max, m_max) = (150, 150);

    let joint = quadratic::joint_qr(&params, n_max, m_max);
    println!("joint PMF at r = {}, nu = {}:", params.r(), params.nu());
    println!("  f(0,0) = {:.15} (should be 1 - r = {})", joint.get(0, 0), 1.0 - params.r());
    println!("  mass on the grid = {:.12}", joint.total_mass());

    let raw = Path::new("joint_pmf.csv");
    let mapped = Path::new("joint_logmap.csv");
    cli::run_joint(&params, n_max, m_max, "qr", false, OutputFormat::Csv, Some(raw)).unwrap();
    cli::run_joint(&params, n_max, m_max, "qr", true, OutputFormat::Csv, Some(mapped)).unwrap();
    println!("\nwrote {} and {} (long format: n,m,value)", raw.display(), mapped.display());
}
