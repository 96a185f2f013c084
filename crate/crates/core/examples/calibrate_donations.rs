// Fit zero-inflated lognormal arms from raw `arm,outcome` data, then
// simulate designs against the fitted model.
//
//     cargo run --release --example calibrate_donations

use std::io::Write;

use bae_lab::calibrate::{load_arm_samples, FittedModel};
use bae_lab::design::{two_batch_weights, DesignSpec};
use bae_lab::simulate::{monte_carlo, replication_stream};
use rand::Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // stand-in for an observed donation file
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("donations.csv");
    let mut file = std::fs::File::create(&path)?;
    writeln!(file, "arm,outcome")?;
    let mut rng = replication_stream(1, 0);
    for (arm, scale) in [("control", 30.0), ("match_1to1", 36.0), ("match_2to1", 42.0)] {
        for _ in 0..20_000 {
            let gave = rng.random::<f64>() < 0.03;
            let amount = if gave { scale * (rng.random::<f64>() * 1.5 + 0.25) } else { 0.0 };
            writeln!(file, "{arm},{amount}")?;
        }
    }
    drop(file);

    let fitted = FittedModel::fit(&load_arm_samples(&path)?)?;
    println!("{}", serde_json::to_string_pretty(&fitted)?);

    let model = fitted.to_model()?;
    println!("implied arm means {:?}, best arm {}", model.true_means(), model.best_arm());
    for design in [DesignSpec::crt(3)?, DesignSpec::bae(two_batch_weights(3, 1, 0.8)?.weights, "two_batch")] {
        let r = monte_carlo(&design, &model, 3000, 500, 9)?;
        println!("{:<10} T=3000 error {:.3} regret {:.4}", design.name, r.error_rate, r.regret);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
