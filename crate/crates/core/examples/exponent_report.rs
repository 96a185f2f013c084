// Exponent lower bounds for a few designs on one Gaussian instance.
//
//     cargo run --example exponent_report

use bae_lab::design::{crt_weights, successive_rejects_weights, two_batch_weights, Instance};
use bae_lab::exponent::bae_exponent_lower_bound;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let instance = Instance::new(vec![1.0, 0.0, 0.0, 0.0], 1.0)?;
    let designs = [
        ("crt", crt_weights(4)?),
        ("two_batch(s=1, beta=0.7)", two_batch_weights(4, 1, 0.7)?.weights),
        ("successive_rejects", successive_rejects_weights(4)?),
    ];

    for (name, weights) in &designs {
        let report = bae_exponent_lower_bound(&instance, weights)?;
        println!("{name}: weights {:?}", weights.as_slice());
        for st in &report.stages {
            println!("  n={} w={:.4} gamma={:.4} w*gamma={:.5}", st.n, st.w, st.gamma, st.product);
        }
        println!(
            "  bound {:.5} vs CRT {:.5}; certified dominance: {} (margin {:+.5})",
            report.bae_lower_bound, report.crt_exponent, report.dominates, report.dominance_margin
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
