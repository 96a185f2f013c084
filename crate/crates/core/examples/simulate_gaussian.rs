// Monte Carlo error and regret for a two-batch design and the CRT on a
// Gaussian instance. Results depend only on the seed, not the thread count.
//
//     cargo run --release --example simulate_gaussian

use bae_lab::design::{two_batch_weights, DesignSpec};
use bae_lab::simulate::{monte_carlo, monte_carlo_with_threads, OutcomeModel, SimReport};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = OutcomeModel::gaussian(vec![0.6, 0.0, 0.2, 0.1], 1.0)?;
    let designs = [
        DesignSpec::crt(4)?,
        DesignSpec::bae(two_batch_weights(4, 1, 0.7)?.weights, "two_batch"),
    ];

    println!("{}", SimReport::csv_header(4));
    for design in &designs {
        for t in [20, 40, 80] {
            let report = monte_carlo(design, &model, t, 4000, 7)?;
            println!("{}", report.csv_row());
        }
    }

    let a = monte_carlo_with_threads(&designs[1], &model, 40, 4000, 7, 1)?;
    let b = monte_carlo_with_threads(&designs[1], &model, 40, 4000, 7, 4)?;
    assert_eq!(a, b);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
