use std::f64::consts::PI;

use levy_homog::ergodic::{
    compare_measures, estimate_invariant_measure, invariance_fixed_point, mixing_diagnostic, EmpiricalMeasure,
    InvariantOptions, MixingOptions,
};
use levy_homog::model::presets;
use levy_homog::rng::SeedSequence;
use proptest::prelude::*;

#[test]
fn drift_preset_measure_is_reflection_symmetric() {
    let m = presets::drift();
    let mu = estimate_invariant_measure(&m, 0.0, 200_000, None, 0.1, 32, &SeedSequence::new(3), &InvariantOptions::default())
        .unwrap();
    assert!(mu.converged, "between-chain TV {} > {}", mu.between_chain_tv, mu.tv_threshold);
    // reflect about 0 on bin centres: bin j ↔ bin 31 − j
    let reflected: Vec<f64> = (0..32).map(|j| mu.probabilities[31 - j]).collect();
    let m2 = EmpiricalMeasure::from_probabilities(1, 32, reflected).unwrap();
    let d = compare_measures(&mu, &m2).unwrap();
    assert!(d.tv < 3.0 * mu.tv_noise(mu.ess), "tv {} noise {}", d.tv, mu.tv_noise(mu.ess));
    // the drift 2 sin 2πx pushes mass towards x = 1/2
    assert!(mu.density_at(&[0.5, 0.0]) > mu.density_at(&[0.0, 0.0]));
}

#[test]
fn modulated_measure_follows_inverse_power_density() {
    let m = presets::modulated();
    let mu = estimate_invariant_measure(&m, 0.0, 200_000, None, 0.1, 16, &SeedSequence::new(4), &InvariantOptions::default())
        .unwrap();
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let oracle = EmpiricalMeasure::from_density(1, 16, |x| s0(x[0]).powf(-1.5)).unwrap();
    let d = compare_measures(&mu, &oracle).unwrap();
    assert!(d.tv < 0.02, "tv {}", d.tv);
}

#[test]
fn fixed_point_test_detects_wrong_measure() {
    let m = presets::drift();
    let uniform = EmpiricalMeasure::uniform(1, 32).unwrap();
    let fp = invariance_fixed_point(&m, &uniform, 50_000, 1.0, 0.01, &SeedSequence::new(2)).unwrap();
    assert!(!fp.passed, "{fp:?}");
    let c = presets::constant();
    let fp = invariance_fixed_point(&c, &uniform, 50_000, 1.0, 0.01, &SeedSequence::new(2)).unwrap();
    assert!(fp.passed, "{fp:?}");
}

#[test]
fn mixing_rate_of_first_mode() {
    // Cov(cos 2πX̃₀, cos 2πX̃_τ) = ½ e^{−ψ(2π)τ} for the constant preset
    let opts = MixingOptions {
        length: 400.0,
        ..Default::default()
    };
    let f = |x: &[f64; 2]| (2.0 * PI * x[0]).cos();
    let fit = mixing_diagnostic(&presets::constant(), 0.0, &f, &SeedSequence::new(1), &opts).unwrap();
    assert!(!fit.failed && !fit.degenerate);
    assert!((fit.rho_hat - 52.64).abs() < 0.1 * 52.64, "{} ± {}", fit.rho_hat, fit.rho_stderr);
}

#[test]
fn wasserstein_of_shifted_point_masses() {
    let mut p = vec![0.0; 16];
    let mut q = vec![0.0; 16];
    p[0] = 1.0;
    q[4] = 1.0;
    let a = EmpiricalMeasure::from_probabilities(1, 16, p).unwrap();
    let b = EmpiricalMeasure::from_probabilities(1, 16, q).unwrap();
    let d = compare_measures(&a, &b).unwrap();
    assert!((d.tv - 1.0).abs() < 1e-12);
    assert!((d.w1 - 0.25).abs() < 1e-12, "{}", d.w1);
}

#[test]
fn bad_bin_counts_rejected() {
    assert!(EmpiricalMeasure::uniform(1, 12).is_err());
    assert!(EmpiricalMeasure::uniform(3, 16).is_err());
    let a = EmpiricalMeasure::uniform(1, 16).unwrap();
    let b = EmpiricalMeasure::uniform(1, 32).unwrap();
    assert!(compare_measures(&a, &b).is_err());
}

fn measure(dim: usize, bins: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    let n = bins.pow(dim as u32);
    prop::collection::vec(0u64..50, n).prop_filter_map("empty", move |c| {
        if c.iter().sum::<u64>() == 0 {
            None
        } else {
            Some(EmpiricalMeasure::from_counts(dim, bins, c).unwrap())
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_normalise(mu in measure(2, 8)) {
        let s: f64 = mu.probabilities.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let (one, _) = mu.integrate(|_| 1.0);
        prop_assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distances_are_symmetric_and_bounded(a in measure(1, 16), b in measure(1, 16)) {
        let ab = compare_measures(&a, &b).unwrap();
        let ba = compare_measures(&b, &a).unwrap();
        prop_assert!((ab.tv - ba.tv).abs() < 1e-12 && (ab.w1 - ba.w1).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab.tv));
        prop_assert!(ab.w1 <= 0.5 * ab.tv + 1e-12);
        prop_assert!(compare_measures(&a, &a).unwrap().tv == 0.0);
    }

    #[test]
    fn bin_lookup_is_consistent(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let mu = EmpiricalMeasure::uniform(2, 8).unwrap();
        let j = mu.bin_of(&[x, y]);
        let c = mu.bin_corner(j);
        prop_assert!(c[0] <= x && x < c[0] + 0.125 && c[1] <= y && y < c[1] + 0.125);
    }
}
