// Which two-batch designs are certified to beat uniform allocation, for
// every Gaussian instance at once? The check only looks at the weights.
//
//     cargo run --example check_dominance

use bae_lab::design::two_batch_weights;
use bae_lab::exponent::dominance_condition;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for k in [3, 4, 6, 10] {
        for s in 1..=k - 2 {
            // smallest first-batch share on a 0.01 grid that clears the certificate
            let first = (1..100)
                .map(|i| i as f64 / 100.0)
                .find(|&beta| two_batch_weights(k, s, beta).map(|d| dominance_condition(&d.weights).0).unwrap_or(false));
            let threshold = two_batch_weights(k, s, 0.5)?.threshold;
            match first {
                Some(beta) => println!("K={k:<2} s={s}: threshold {threshold:.4}, first grid point {beta:.2}"),
                None => println!("K={k:<2} s={s}: threshold {threshold:.4}, nothing on the grid"),
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
