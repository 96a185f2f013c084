// Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest
// harness so the lines always reach the output; exits non-zero on any FAIL.

use std::time::{Duration, Instant};

use bae_lab::calibrate::{model_from_summary, ArmSummary};
use bae_lab::cli::{cmd_simulate, Overrides, RunConfig};
use bae_lab::design::{crt_weights, successive_rejects_weights, two_batch_weights, DesignSpec, Instance};
use bae_lab::exponent::{bae_exponent_lower_bound, crt_exponent, dominance_condition, gamma, psi_brute_force, psi_closed_form};
use bae_lab::simulate::{empirical_exponent, monte_carlo, normal_cdf, OutcomeModel, SimReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn sorted_means(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut mu: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        mu.sort_by(|a, b| b.total_cmp(a));
        if mu[0] > mu[1] {
            return mu;
        }
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let k = rng.random_range(2..=8);
    let sigma = rng.random_range(0.2..3.0);
    loop {
        let means: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        if let Ok(inst) = Instance::new(means, sigma) {
            return inst;
        }
    }
}

fn c1_psi_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=8);
        let mu = sorted_means(&mut rng, n);
        let d = (psi_closed_form(&mu).unwrap() - psi_brute_force(&mu).unwrap()).abs();
        worst = worst.max(d);
    }
    verdict(worst <= 1e-9, format!("1000 vectors, max |closed - enumerated| = {worst:.2e} (tol 1e-9)"))
}

fn c2_gamma_lemma() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..500 {
        let inst = random_instance(&mut rng);
        let base = inst.delta_min().powi(2) / (2.0 * inst.sigma().powi(2));
        for n in 2..=inst.k() {
            let slack = gamma(&inst, n).unwrap() - (n as f64 - 1.0) / n as f64 * base;
            worst_slack = worst_slack.min(slack);
        }
    }
    let mut worst_eq = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=8);
        let sigma = rng.random_range(0.2..3.0);
        let top = rng.random_range(-3.0..3.0);
        let gap = rng.random_range(0.01..3.0);
        let mut means = vec![top - gap; k];
        means[rng.random_range(0..k)] = top;
        let inst = Instance::new(means, sigma).unwrap();
        let base = gap * gap / (2.0 * sigma * sigma);
        for n in 2..=k {
            let d = (gamma(&inst, n).unwrap() - (n as f64 - 1.0) / n as f64 * base).abs();
            worst_eq = worst_eq.max(d);
        }
    }
    verdict(
        worst_slack >= -1e-12 && worst_eq <= 1e-12,
        format!("min slack {worst_slack:.2e} over 500 instances; max equality gap {worst_eq:.2e} over 100 (tol 1e-12)"),
    )
}

fn c3_crt_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let inst = random_instance(&mut rng);
        let r = bae_exponent_lower_bound(&inst, &crt_weights(inst.k()).unwrap()).unwrap();
        worst = worst.max((r.bae_lower_bound - crt_exponent(&inst)).abs());
    }
    verdict(worst <= 1e-12, format!("500 instances, max |bound - CRT exponent| = {worst:.2e} (tol 1e-12)"))
}

fn c4_dominance_fixtures() -> Verdict {
    let (d_tb, m_tb) = dominance_condition(&two_batch_weights(4, 1, 0.7).unwrap().weights);
    let (d_sr, m_sr) = dominance_condition(&successive_rejects_weights(3).unwrap());
    let (d_crt, m_crt) = dominance_condition(&crt_weights(4).unwrap());
    let pass = d_tb
        && (m_tb - 0.00625).abs() <= 1e-12
        && !d_sr
        && m_sr.abs() <= 1e-12
        && !d_crt
        && m_crt.abs() <= 1e-12;
    verdict(
        pass,
        format!("two-batch margin {m_tb:.12} ({d_tb}), successive rejects {m_sr:.1e} ({d_sr}), CRT {m_crt:.1e} ({d_crt})"),
    )
}

fn c5_monte_carlo_vs_exact() -> Verdict {
    let model = OutcomeModel::gaussian(vec![1.0, 0.0], 1.0).unwrap();
    let crt = DesignSpec::crt(2).unwrap();
    let n = 100_000u64;
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [4u64, 16, 64] {
        let r = monte_carlo(&crt, &model, t, n, 5).unwrap();
        let p = normal_cdf(-(t as f64).sqrt() / 2.0);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = (r.error_rate - p) / se;
        pass &= z.abs() <= 3.0;
        parts.push(format!("T={t}: {:.4e} vs {p:.4e} (z={z:+.2})", r.error_rate));
    }
    verdict(pass, parts.join("; "))
}

fn c6_dominance_in_simulation() -> Verdict {
    let model = OutcomeModel::gaussian(vec![1.0, 0.0, 0.0], 1.0).unwrap();
    let bae = DesignSpec::bae(two_batch_weights(3, 1, 0.8).unwrap().weights, "two_batch");
    let crt = DesignSpec::crt(3).unwrap();
    let n = 100_000u64;
    let grid = [30u64, 60, 120, 240];
    let run = |d: &DesignSpec| -> Vec<SimReport> { grid.iter().map(|&t| monte_carlo(d, &model, t, n, 6).unwrap()).collect() };
    let (rb, rc) = (run(&bae), run(&crt));

    let (pb, pc) = (rb[3].error_rate, rc[3].error_rate);
    let pooled = (pb + pc) / 2.0;
    let z = (pc - pb) / (pooled * (1.0 - pooled) * 2.0 / n as f64).sqrt();
    let part_a = pb < pc && z > 3.0;

    let points = |rs: &[SimReport]| rs.iter().map(|r| (r.t as f64, r.error_rate)).collect::<Vec<_>>();
    let (fb, fc) = (empirical_exponent(&points(&rb)), empirical_exponent(&points(&rc)));
    let part_b = matches!((&fb, &fc), (Ok(b), Ok(c)) if b.slope >= c.slope);
    let slope = |f: &Result<bae_lab::simulate::ExponentFit, _>| match f {
        Ok(f) => format!("{:.4}", f.slope),
        Err(e) => format!("undefined ({e})"),
    };

    let rates: Vec<String> = rb
        .iter()
        .zip(&rc)
        .map(|(b, c)| format!("T={} {:.2e}/{:.2e}", b.t, b.error_rate, c.error_rate))
        .collect();
    verdict(
        part_a && part_b,
        format!(
            "(a) T=240 BAE {pb:.2e} vs CRT {pc:.2e}, z={z:.2} -> {}; (b) slopes BAE {} vs CRT {} -> {}; errors BAE/CRT: {}",
            if part_a { "ok" } else { "not met" },
            slope(&fb),
            slope(&fc),
            if part_b { "ok" } else { "not met" },
            rates.join(", ")
        ),
    )
}

fn c7_donation_figure() -> Verdict {
    let arms: Vec<ArmSummary> = [30.0, 36.0, 42.0, 60.0]
        .iter()
        .map(|&mean| ArmSummary { p_zero: 0.98, mean, sd: 42.0 })
        .collect();
    let model = model_from_summary(&arms).unwrap();
    let bae = DesignSpec::bae(two_batch_weights(4, 1, 2.0 / 3.0).unwrap().weights, "two_batch");
    let crt = DesignSpec::crt(4).unwrap();
    let grid = [360u64, 1440, 5760, 23040, 46080];
    let reps = 10_000u64;

    let mut parts = Vec::new();
    let mut first = None;
    let mut last = None;
    for &t in &grid {
        let b = monte_carlo(&bae, &model, t, reps, 7).unwrap();
        let c = monte_carlo(&crt, &model, t, reps, 7).unwrap();
        parts.push(format!("T={t} {:.4}±{:.4}/{:.4}±{:.4}", b.regret, b.regret_se, c.regret, c.regret_se));
        if first.is_none() {
            first = Some((b.clone(), c.clone()));
        }
        last = Some((b, c));
    }
    let (b0, c0) = first.unwrap();
    let overlap = (b0.regret - 2.0 * b0.regret_se) <= (c0.regret + 2.0 * c0.regret_se)
        && (c0.regret - 2.0 * c0.regret_se) <= (b0.regret + 2.0 * b0.regret_se);
    let (b1, c1) = last.unwrap();
    let se = (b1.regret_se.powi(2) + c1.regret_se.powi(2)).sqrt();
    let not_worse = b1.regret <= c1.regret + 2.0 * se;
    verdict(
        overlap && not_worse,
        format!(
            "smallest T bands overlap: {overlap}; largest T BAE {:.4} <= CRT {:.4} + 2SE ({:.4}): {not_worse}; regret BAE/CRT: {}",
            b1.regret,
            c1.regret,
            2.0 * se,
            parts.join(", ")
        ),
    )
}

fn c8_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let value = json!({
        "designs": [{"kind": "crt", "k": 3}, {"kind": "two_batch", "k": 3, "s": 1, "beta_first": 0.8, "name": "tb"}],
        "instance": {"means": [1.0, 0.0, 0.0], "sigma": 1.0},
        "t": [30, 60],
        "replications": 20000,
        "seed": 8
    });
    let run = |file: &str, threads: Option<usize>| -> Vec<u8> {
        let out = dir.path().join(file);
        let overrides = Overrides { out: Some(out.clone()), ..Overrides::default() };
        let cfg = RunConfig::from_value(value.clone(), dir.path(), &overrides).unwrap();
        cmd_simulate(&cfg, threads, &mut std::io::sink()).unwrap();
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", None);
    let b = run("b.csv", None);
    let one = run("t1.csv", Some(1));
    let eight = run("t8.csv", Some(8));
    let pass = !a.is_empty() && a == b && one == eight && a == one;
    verdict(pass, format!("repeat identical: {}; --threads 1 vs 8 identical: {}", a == b, one == eight))
}

type Criterion = (&'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        ("psi oracle equivalence", c1_psi_oracle, Duration::from_secs(10)),
        ("gamma lower-bound lemma", c2_gamma_lemma, Duration::from_secs(10)),
        ("CRT exponent consistency", c3_crt_consistency, Duration::from_secs(60)),
        ("dominance margin fixtures", c4_dominance_fixtures, Duration::from_secs(60)),
        ("Monte Carlo vs exact two-arm CRT", c5_monte_carlo_vs_exact, Duration::from_secs(60)),
        ("dominance in simulation", c6_dominance_in_simulation, Duration::from_secs(300)),
        ("donation experiment regret", c7_donation_figure, Duration::from_secs(600)),
        ("determinism", c8_determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {name}: {} [{:.1}s, limit {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
