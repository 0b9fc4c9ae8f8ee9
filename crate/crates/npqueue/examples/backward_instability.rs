//! Demonstrates why the backwards three-term recurrence for the contour
//! integrals is not used in production: it diverges from the stable
//! series evaluation, catastrophically so for small high-priority
//! fractions.
//!
//! ```bash
//! cargo run --release --example backward_instability
//! ```

use npqueue::rintegral::backwards_recurrence_diagnostic;
use npqueue::ModelParams;

fn main() {
    for nu in [0.75, 0.3, 0.05] {
        let params = ModelParams::new(0.9, nu).unwrap();
        let diag = backwards_recurrence_diagnostic(&params, 12, 14).unwrap();
        println!("nu = {nu}: log10 of the relative divergence at R^m_n");
        print!("{:>4}", "n\\m");
        for m in (0..=14).step_by(2) {
            print!("{m:>7}");
        }
        println!();
        for n in (1..=12).step_by(2) {
            print!("{n:>4}");
            for m in (0..=14).step_by(2) {
                let d = diag.digits_lost[n][m];
                if d.is_nan() {
                    print!("{:>7}", "-");
                } else {
                    print!("{d:>7.1}");
                }
            }
            println!();
        }
        println!("worst divergence: 10^{:.1}\n", diag.max_divergence);
    }
    println!("(-16 to -10 means agreement with the series; positive exponents mean");
    println!("the recurrence has lost every digit. The series evaluation never");
    println!("touches this path; it exists to quantify the instability.)");
}
