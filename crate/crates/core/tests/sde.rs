use std::f64::consts::PI;

use levy_homog::grid::GridField;
use levy_homog::levy::CompensationPolicy;
use levy_homog::model::presets;
use levy_homog::rng::SeedSequence;
use levy_homog::sde::{corrector_transform, simulate_x_eps, simulate_x_tilde, Integrator, SimOptions};
use levy_homog::stats::Estimate;
use proptest::prelude::*;

#[test]
fn drift_only_reproduces_flow() {
    let m = presets::deterministic(0.7, -0.3);
    let p = simulate_x_eps(&m, 0.2, &[0.1, 0.0], 1.5, 1e-3, &SimOptions::default(), &SeedSequence::new(1), 0).unwrap();
    assert!(p.jumps.is_empty());
    let x = p.final_state();
    assert!((x[0] - (0.1 + 0.7 * 1.5)).abs() < 1e-9, "{x:?}");
    assert!((p.final_y() - (-0.3 * 1.5)).abs() < 1e-9);
    assert!((p.horizon() - 1.5).abs() < 1e-12);
}

#[test]
fn paths_are_reproducible() {
    let m = presets::drift();
    let seq = SeedSequence::new(3);
    let a = simulate_x_eps(&m, 0.25, &[0.2, 0.0], 0.3, 1e-3, &SimOptions::default(), &seq, 7).unwrap();
    let b = simulate_x_eps(&m, 0.25, &[0.2, 0.0], 0.3, 1e-3, &SimOptions::default(), &seq, 7).unwrap();
    assert_eq!(a, b);
    let c = simulate_x_eps(&m, 0.25, &[0.2, 0.0], 0.3, 1e-3, &SimOptions::default(), &seq, 8).unwrap();
    assert_ne!(a.states, c.states);
}

#[test]
fn torus_projection_commutes_with_dynamics() {
    let m = presets::drift();
    let seq = SeedSequence::new(5);
    let a = simulate_x_tilde(&m, 0.3, &[0.15, 0.0], 2.0, 0.01, &SimOptions::default(), &seq, 0).unwrap();
    let b = simulate_x_tilde(&m, 0.3, &[3.15, 0.0], 2.0, 0.01, &SimOptions::default(), &seq, 0).unwrap();
    for (p, q) in a.torus().iter().zip(b.torus()) {
        let d = (p[0] - q[0]).abs();
        assert!(d.min(1.0 - d) < 1e-9, "{p:?} vs {q:?}");
    }
}

#[test]
fn path_time_grid_covers_jumps_and_steps() {
    let m = presets::modulated();
    let p = simulate_x_eps(&m, 0.5, &[0.0, 0.0], 0.5, 0.01, &SimOptions::default(), &SeedSequence::new(2), 0).unwrap();
    assert!(p.times.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(p.times.len(), p.states.len());
    assert_eq!(p.times.len(), p.ys.len());
    assert!(!p.jumps.is_empty());
    for j in &p.jumps {
        assert!(j.t > 0.0 && j.t <= 0.5);
    }
}

#[test]
fn oversized_step_is_rescaled_with_warning() {
    let m = presets::constant();
    let integ = Integrator::for_x_eps(&m, 0.1, 0.1, &SimOptions::default()).unwrap();
    let s = integ.scheme();
    assert!(s.rescaled);
    assert_eq!(s.z_step, 0.25);
    assert!((s.delta - 0.25f64.powf(1.0 / 1.5)).abs() < 1e-12);
    assert!(!s.warnings.is_empty());
}

#[test]
fn y_cap_aborts_path() {
    let m = presets::deterministic(0.0, 10.0);
    let opts = SimOptions {
        y_cap: 5.0,
        ..Default::default()
    };
    let r = simulate_x_eps(&m, 0.5, &[0.0, 0.0], 1.0, 1e-3, &opts, &SeedSequence::new(1), 0);
    assert!(matches!(r, Err(levy_homog::Error::PathAborted { .. })));
}

/// `E cos 2π(x + L_t)` for the pure-stable model under both small-jump policies.
fn mean_cos(policy: CompensationPolicy, dt: f64) -> Estimate {
    let m = presets::pure_stable(1);
    let opts = SimOptions {
        policy,
        ..Default::default()
    };
    let integ = Integrator::for_x_tilde(&m, 0.0, dt, &opts).unwrap();
    let seq = SeedSequence::new(9);
    let v: Vec<f64> = (0..20_000)
        .map(|i| {
            let (z, _) = integ.run([0.0, 0.0], 0.02, seq.stream(1, i), &mut ()).unwrap();
            (2.0 * PI * z[0]).cos()
        })
        .collect();
    Estimate::from_samples(&v)
}

#[test]
fn gaussian_correction_matches_stable_law() {
    // ψ(2π) = −2Γ(−1.5)cos(3π/4)(2π)^{1.5}
    let exact = (-0.02f64 * 52.637_890_139_143_25).exp();
    let g = mean_cos(CompensationPolicy::GaussianCorrection, 0.01);
    assert!(g.agrees_with(exact, 4.0), "{g:?} vs {exact}");
    // discarding the small jumps loses their variance
    let d = mean_cos(CompensationPolicy::Discard, 0.01);
    assert!(d.value > exact + 4.0 * d.stderr, "{d:?} vs {exact}");
}

#[test]
fn halving_dt_is_self_consistent() {
    let m = presets::modulated();
    let seq = SeedSequence::new(4);
    let run = |dt: f64| {
        let v: Vec<f64> = (0..4_000)
            .map(|i| {
                let p = simulate_x_eps(&m, 0.25, &[0.1, 0.0], 0.02, dt, &SimOptions::default(), &seq, i).unwrap();
                (2.0 * PI * p.final_state()[0]).cos()
            })
            .collect();
        Estimate::from_samples(&v)
    };
    let a = run(2e-3);
    let b = run(1e-3);
    assert!((a.value - b.value).abs() < 4.0 * (a.stderr + b.stderr), "{a:?} vs {b:?}");
}

#[test]
fn corrector_transform_stays_within_bound() {
    let m = presets::drift();
    let b_hat = GridField::from_fn(1, 64, |x| 0.05 * (2.0 * PI * x[0]).sin());
    let p = simulate_x_eps(&m, 0.25, &[0.3, 0.0], 0.2, 1e-3, &SimOptions::default(), &SeedSequence::new(8), 0).unwrap();
    let q = corrector_transform(&p, &b_hat, 0.25).unwrap();
    let bound = 2.0 * 0.25 * 0.05 + 1e-9;
    for (a, b) in p.states.iter().zip(&q.states) {
        assert!((a[0] - b[0]).abs() <= bound);
    }
    assert_eq!(q.states[0], p.states[0]);
    let wrong = GridField::from_fn(2, 8, |_| 0.0);
    assert!(corrector_transform(&p, &wrong, 0.25).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_drift_is_exact_for_any_eps(eps in 0.05f64..1.0, c in -2.0f64..2.0, t in 0.01f64..1.0) {
        let m = presets::deterministic(c, 0.0);
        let p = simulate_x_eps(&m, eps, &[0.0, 0.0], t, 1e-3, &SimOptions::default(), &SeedSequence::new(1), 0).unwrap();
        prop_assert!((p.final_state()[0] - c * t).abs() < 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn torus_states_lie_in_unit_cell(seed in 0u64..500) {
        let m = presets::pure_stable(2);
        let p = simulate_x_tilde(&m, 0.0, &[0.5, 0.5], 0.5, 0.05, &SimOptions::default(), &SeedSequence::new(seed), 0).unwrap();
        for z in p.torus() {
            prop_assert!((0.0..1.0).contains(&z[0]) && (0.0..1.0).contains(&z[1]));
        }
    }
}
