// Empirical error exponent of the CRT on two arms, against the exact error
// curve and the theoretical rate Δ²/(8σ²).
//
//     cargo run --release --example sweep_exponents

use bae_lab::design::{DesignSpec, Instance};
use bae_lab::exponent::crt_exponent;
use bae_lab::simulate::{empirical_exponent, exact_crt_error_two_arms, monte_carlo, OutcomeModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let instance = Instance::new(vec![1.0, 0.0], 1.0)?;
    let model = OutcomeModel::from_instance(&instance);
    let crt = DesignSpec::crt(2)?;

    let mut simulated = Vec::new();
    let mut exact = Vec::new();
    for t in [4, 8, 16, 24, 32] {
        let r = monte_carlo(&crt, &model, t, 20_000, 3)?;
        let p = exact_crt_error_two_arms(1.0, 1.0, t)?;
        println!("T={t:<3} simulated {:.5} ± {:.5}  exact {p:.5}", r.error_rate, r.error_se);
        simulated.push((t as f64, r.error_rate));
        exact.push((t as f64, p));
    }

    let fit = empirical_exponent(&simulated)?;
    let exact_fit = empirical_exponent(&exact)?;
    println!(
        "slope: simulated {:.4} ± {:.4}, exact curve {:.4}, asymptotic rate {:.4}",
        fit.slope,
        fit.slope_se,
        exact_fit.slope,
        crt_exponent(&instance)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
