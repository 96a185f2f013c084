// A donation-style experiment: rare, heavy-tailed gifts described by a zero
// probability and the mean and sd of positive gifts. Compares a two-batch
// design with the CRT as the budget grows.
//
//     cargo run --release --example donation_experiment

use bae_lab::calibrate::{model_from_summary, ArmSummary};
use bae_lab::design::{two_batch_weights, DesignSpec};
use bae_lab::simulate::monte_carlo;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let arms: Vec<ArmSummary> = [30.0, 36.0, 42.0, 60.0]
        .iter()
        .map(|&mean| ArmSummary { p_zero: 0.98, mean, sd: 42.0 })
        .collect();
    let model = model_from_summary(&arms)?;
    let two_batch = DesignSpec::bae(two_batch_weights(4, 1, 2.0 / 3.0)?.weights, "two_batch");
    let crt = DesignSpec::crt(4)?;

    println!("{:>6} {:>18} {:>18}", "T", "two_batch error", "crt error");
    for t in [360, 1440, 5760] {
        let a = monte_carlo(&two_batch, &model, t, 1000, 17)?;
        let b = monte_carlo(&crt, &model, t, 1000, 17)?;
        println!(
            "{t:>6} {:>10.3} ± {:.3} {:>10.3} ± {:.3}",
            a.error_rate, a.error_se, b.error_rate, b.error_se
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
