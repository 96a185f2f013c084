use bae_lab::design::{
    crt_weights, make_batch_weights, successive_rejects_weights, two_batch_weights, BatchWeights, DesignSpec,
    Instance,
};
use bae_lab::exponent::{
    allocation_proportion, bae_exponent_lower_bound, crt_exponent, dominance_condition, gamma, psi_brute_force,
    psi_closed_form,
};
use bae_lab::simulate::{checkpoints, monte_carlo, replication_stream, run_trial, OutcomeModel};
use proptest::prelude::*;

fn sorted_means(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_n)
        .prop_flat_map(|n| (prop::collection::vec(-5.0..5.0f64, n - 1), 0.01..3.0f64))
        .prop_map(|(mut rest, lead_gap)| {
            rest.sort_by(|a, b| b.total_cmp(a));
            let mut mu = vec![rest[0] + lead_gap];
            mu.extend(rest);
            mu
        })
}

fn instance(max_k: usize) -> impl Strategy<Value = Instance> {
    (2..=max_k).prop_flat_map(instance_of)
}

fn instance_of(k: usize) -> impl Strategy<Value = Instance> {
    (prop::collection::vec(-3.0..3.0f64, k), 0.2..3.0f64, 0.01..2.0f64, any::<prop::sample::Index>())
        .prop_map(|(mut means, sigma, gap, idx)| {
            let best = idx.index(means.len());
            let top = means
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != best)
                .map(|(_, &m)| m)
                .fold(f64::NEG_INFINITY, f64::max);
            means[best] = top + gap;
            Instance::new(means, sigma).unwrap()
        })
}

fn weights(max_k: usize) -> impl Strategy<Value = BatchWeights> {
    (2..=max_k).prop_flat_map(weights_of)
}

fn weights_of(k: usize) -> impl Strategy<Value = BatchWeights> {
    prop::collection::vec(0.0..1.0f64, k - 1)
        .prop_filter("nonzero", |raw| raw.iter().sum::<f64>() > 1e-6)
        .prop_map(move |raw| make_batch_weights(k, &raw).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn psi_matches_enumeration(mu in sorted_means(10)) {
        let a = psi_closed_form(&mu).unwrap();
        let b = psi_brute_force(&mu).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{mu:?}: {a} vs {b}");
    }

    #[test]
    fn psi_bounds(mu in sorted_means(10)) {
        let n = mu.len() as f64;
        let psi = psi_closed_form(&mu).unwrap();
        let d2 = mu[0] - mu[1];
        let upper: f64 = mu[1..].iter().map(|m| (mu[0] - m).powi(2)).sum();
        prop_assert!(psi >= (n - 1.0) / n * d2 * d2 - 1e-12);
        prop_assert!(psi <= upper + 1e-12);
    }

    #[test]
    fn psi_equal_followers(lead in -3.0..3.0f64, gap in 0.01..3.0f64, n in 2usize..12) {
        let mut mu = vec![lead];
        mu.extend(std::iter::repeat_n(lead - gap, n - 1));
        let psi = psi_closed_form(&mu).unwrap();
        let expected = (n as f64 - 1.0) / n as f64 * (mu[0] - mu[1]).powi(2);
        prop_assert!((psi - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn gamma_lower_bound(inst in instance(8)) {
        let base = inst.delta_min().powi(2) / (2.0 * inst.sigma().powi(2));
        for n in 2..=inst.k() {
            let g = gamma(&inst, n).unwrap();
            prop_assert!(g >= (n as f64 - 1.0) / n as f64 * base - 1e-12);
        }
    }

    #[test]
    fn gamma_shift_and_scale(inst in instance(7), shift in -10.0..10.0f64, scale in 0.1..5.0f64) {
        let shifted = Instance::new(inst.means().iter().map(|m| m + shift).collect(), inst.sigma()).unwrap();
        let scaled = Instance::new(inst.means().iter().map(|m| m * scale).collect(), inst.sigma()).unwrap();
        for n in 2..=inst.k() {
            let g = gamma(&inst, n).unwrap();
            let gs = gamma(&shifted, n).unwrap();
            let gc = gamma(&scaled, n).unwrap();
            prop_assert!((g - gs).abs() <= 1e-9 * (1.0 + g));
            prop_assert!((gc - scale * scale * g).abs() <= 1e-9 * (1.0 + gc));
        }
    }

    #[test]
    fn crt_bound_equals_crt_exponent(inst in instance(8)) {
        let r = bae_exponent_lower_bound(&inst, &crt_weights(inst.k()).unwrap()).unwrap();
        prop_assert!((r.bae_lower_bound - crt_exponent(&inst)).abs() <= 1e-12);
    }

    #[test]
    fn allocation_monotone_and_total(w in weights(10)) {
        let k = w.k();
        let ws: Vec<f64> = (2..=k).rev().map(|n| allocation_proportion(&w, n).unwrap()).collect();
        for pair in ws.windows(2) {
            prop_assert!(pair[0] <= pair[1] + 1e-15);
        }
        let total: f64 = ws.iter().sum::<f64>() + allocation_proportion(&w, 2).unwrap();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dominance_ignores_instance((w, a, b) in (2..=6usize).prop_flat_map(|k| (weights_of(k), instance_of(k), instance_of(k)))) {
        let ra = bae_exponent_lower_bound(&a, &w).unwrap();
        let rb = bae_exponent_lower_bound(&b, &w).unwrap();
        prop_assert_eq!(ra.dominance_margin, rb.dominance_margin);
        prop_assert_eq!(ra.dominates, dominance_condition(&w).0);
    }

    #[test]
    fn dominating_weights_beat_crt((w, inst) in (2..=6usize).prop_flat_map(|k| (weights_of(k), instance_of(k)))) {
        let r = bae_exponent_lower_bound(&inst, &w).unwrap();
        if r.dominates {
            prop_assert!(r.bae_lower_bound > r.crt_exponent);
        }
        prop_assert!(r.bae_lower_bound >= r.corollary_bound - 1e-12);
    }

    #[test]
    fn constructed_weights_on_simplex(w in weights(12)) {
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.as_slice().iter().all(|&b| b >= 0.0));
    }
}

fn trial_strategy() -> impl Strategy<Value = (BatchWeights, u64, u64)> {
    weights(6).prop_flat_map(|w| {
        let k = w.k() as u64;
        (Just(w), k..200u64, any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trial_record_invariants((w, t, seed) in trial_strategy()) {
        let k = w.k();
        let means: Vec<f64> = (0..k).map(|i| -(i as f64) * 0.3).collect();
        let model = OutcomeModel::gaussian(means, 1.0).unwrap();
        let design = DesignSpec::bae(w.clone(), "p");
        let rec = run_trial(&design, &model, t, &mut replication_stream(seed, 0)).unwrap();

        prop_assert_eq!(rec.pull_counts.iter().sum::<u64>(), t);
        prop_assert_eq!(rec.elimination_order.len(), k - 1);
        let mut eliminated: Vec<usize> = rec.elimination_order.iter().map(|e| e.arm).collect();
        prop_assert!(!eliminated.contains(&rec.chosen_arm));
        eliminated.sort();
        eliminated.dedup();
        prop_assert_eq!(eliminated.len(), k - 1);

        // per-batch balance: within each stage every candidate's pulls differ by at most one
        let stops = checkpoints(&w, t);
        let mut prev_pulls = vec![0u64; k];
        let mut prev_time = 0u64;
        let mut alive: Vec<usize> = (0..k).collect();
        for (e, &stop) in rec.elimination_order.iter().zip(&stops) {
            prop_assert_eq!(e.time, stop);
            let b = e.time - prev_time;
            let n = alive.len() as u64;
            for &a in &alive {
                let got = e.pulls[a] - prev_pulls[a];
                prop_assert!(got == b / n || got == b.div_ceil(n), "stage {} arm {a}: {got} of {b}", e.stage);
            }
            prev_pulls = e.pulls.clone();
            prev_time = e.time;
            alive.retain(|&a| a != e.arm);
        }
    }

    #[test]
    fn regret_bracketing(seed in any::<u64>()) {
        let model = OutcomeModel::gaussian(vec![0.0, 0.4, -0.3, 0.2], 1.0).unwrap();
        let design = DesignSpec::bae(two_batch_weights(4, 1, 0.7).unwrap().weights, "tb");
        let rep = monte_carlo(&design, &model, 20, 300, seed).unwrap();
        let (dmin, dmax) = (0.2, 0.7);
        prop_assert!(dmin * rep.error_rate <= rep.regret + 1e-12);
        prop_assert!(rep.regret <= dmax * rep.error_rate + 1e-12);
        prop_assert!((0.0..=1.0).contains(&rep.error_rate));
    }
}

#[test]
fn allocation_identity_without_rounding() {
    // T divisible by every checkpoint denominator: eliminated arm at stage n has w_n·T pulls
    let w = make_batch_weights(4, &[0.5, 0.25, 0.25]).unwrap();
    let t = 240u64;
    let model = OutcomeModel::gaussian(vec![1.0, 0.5, 0.0, -0.5], 1.0).unwrap();
    let design = DesignSpec::bae(w.clone(), "w");
    for r in 0..50 {
        let rec = run_trial(&design, &model, t, &mut replication_stream(3, r)).unwrap();
        for e in &rec.elimination_order {
            let expected = allocation_proportion(&w, e.stage).unwrap() * t as f64;
            assert!((rec.pull_counts[e.arm] as f64 - expected).abs() < 1e-9, "stage {}", e.stage);
        }
    }
}

#[test]
fn successive_rejects_is_not_certified() {
    for k in 3..12 {
        let (dominates, _) = dominance_condition(&successive_rejects_weights(k).unwrap());
        assert!(!dominates, "k={k}");
    }
}

#[test]
fn two_batch_threshold_matches_certificate() {
    for k in 3..10 {
        for s in 1..=k - 2 {
            for step in 1..100 {
                let beta = step as f64 / 100.0;
                let d = two_batch_weights(k, s, beta).unwrap();
                if (beta - d.threshold).abs() < 1e-9 {
                    continue;
                }
                let (dominates, _) = dominance_condition(&d.weights);
                assert_eq!(dominates, d.meets_threshold, "k={k} s={s} beta={beta}");
            }
        }
    }
}
