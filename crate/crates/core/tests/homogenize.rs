use std::f64::consts::PI;

use levy_homog::ergodic::EmpiricalMeasure;
use levy_homog::homogenize::{
    cone_annulus_mass, compute_homogenized, corrector_jump_tables, effective_jump_measure, fclt_diagnostics,
    path_jump_tail_index, FcltOptions, HomogenizeOptions, HomogenizedModel, RadialIndicator,
};
use levy_homog::levy::StableMeasureSpec;
use levy_homog::model::presets;
use levy_homog::rng::SeedSequence;
use levy_homog::sde::SimOptions;
use proptest::prelude::*;

fn opts() -> HomogenizeOptions {
    HomogenizeOptions {
        mc_samples: 20_000,
        ..HomogenizeOptions::for_dim(1)
    }
}

#[test]
fn constant_preset_is_already_homogenized() {
    let m = presets::constant();
    let mu = EmpiricalMeasure::uniform(1, 64).unwrap();
    let h = compute_homogenized(&m, &mu, &opts(), &SeedSequence::new(1)).unwrap();
    assert!((h.model.c_bar[0].value - 0.3).abs() < 1e-12);
    assert!((h.model.e_bar.value - 0.2).abs() < 1e-12);
    for d in &h.model.pi_spec.density {
        assert!((d - 1.0).abs() < 1e-12);
    }
    assert!(h.jump_measure.mc_discrepancy < 4.0);
    assert_eq!(h.model.provenance.model_hash, m.hash());
}

#[test]
fn modulated_jump_measure_is_harmonic_mean_like() {
    // with density ∝ σ₀^{−α}, ∫σ₀^α dμ = 1 / ∫σ₀^{−α} dx
    let m = presets::modulated();
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let mu = EmpiricalMeasure::from_density(1, 256, |x| s0(x[0]).powf(-1.5)).unwrap();
    let jm = effective_jump_measure(&m, &mu, 64, 20_000, &SeedSequence::new(2)).unwrap();
    let n = 100_000;
    let inv: f64 = (0..n).map(|i| s0((i as f64 + 0.5) / n as f64).powf(-1.5)).sum::<f64>() / n as f64;
    let k = 1.0 / inv;
    assert!((jm.spec.density[0] - k).abs() < 1e-4, "{} vs {k}", jm.spec.density[0]);
    assert!((jm.spec.density[0] - jm.spec.density[1]).abs() < 1e-12);
    assert!((jm.mc_spec.density[0] - k).abs() < 4.0 * jm.mc_stderr[0]);
}

#[test]
fn drift_preset_effective_drift_is_reduced() {
    // (I + ∇b̂) averages to less than one when b pushes mass towards a sink
    let m = presets::drift();
    let mu = levy_homog::ergodic::estimate_invariant_measure(
        &m,
        0.0,
        200_000,
        None,
        0.1,
        64,
        &SeedSequence::new(3),
        &Default::default(),
    )
    .unwrap();
    let h = compute_homogenized(&m, &mu, &opts(), &SeedSequence::new(4)).unwrap();
    let c = h.model.c_bar[0];
    assert!(c.value > 0.0 && c.value < 0.3, "{c:?}");
    assert!(h.model.provenance.b_hat_residual < 1e-3);
    let json = h.model.to_json().unwrap();
    assert_eq!(HomogenizedModel::from_json(&json).unwrap(), h.model);
}

#[test]
fn dimension_mismatch_rejected() {
    let mu = EmpiricalMeasure::uniform(2, 8).unwrap();
    assert!(compute_homogenized(&presets::constant(), &mu, &opts(), &SeedSequence::new(1)).is_err());
}

#[test]
fn two_dimensional_isotropic_measure() {
    let m = presets::pure_stable(2);
    let mu = EmpiricalMeasure::uniform(2, 8).unwrap();
    let jm = effective_jump_measure(&m, &mu, 32, 10_000, &SeedSequence::new(5)).unwrap();
    for d in &jm.spec.density {
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }
    assert!(jm.spec.asymmetry() < 1e-12);
}

#[test]
fn fclt_terms_vanish_without_drift() {
    let m = presets::modulated();
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let mu = EmpiricalMeasure::from_density(1, 64, |x| s0(x[0]).powf(-1.5)).unwrap();
    let h = compute_homogenized(&m, &mu, &opts(), &SeedSequence::new(6)).unwrap();
    let fo = FcltOptions {
        n_paths: 20,
        ..Default::default()
    };
    let rep = fclt_diagnostics(&m, &h.model, &h.b_hat, &[0.5, 0.25], 0.2, &fo, &SeedSequence::new(7)).unwrap();
    assert!(rep.small_terms_vanish());
    assert_eq!(rep.rows.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    rep.write_csv(&dir.path().join("fclt.csv")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("fclt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn jump_tables_scale_with_eps() {
    let m = presets::drift();
    let mu = EmpiricalMeasure::uniform(1, 64).unwrap();
    let h = compute_homogenized(&m, &mu, &opts(), &SeedSequence::new(8)).unwrap();
    let fo = FcltOptions::default();
    let test = RadialIndicator { rho: 0.05 };
    let a = corrector_jump_tables(&m, &h.b_hat.field, 0.2, &test, &fo).unwrap();
    let b = corrector_jump_tables(&m, &h.b_hat.field, 0.1, &test, &fo).unwrap();
    assert!(a.b2_zero && b.b2_zero);
    // the squared-jump component scales as ε²
    let sq = |t: &levy_homog::homogenize::CorrectorJumpTables| t.field.component(2).mean(0);
    let r = sq(&a) / sq(&b);
    assert!((r - 4.0).abs() < 0.05, "{r}");
}

#[test]
fn path_jumps_have_stable_tail() {
    let m = presets::modulated();
    let fit = path_jump_tail_index(&m, 0.25, 1.0, 1e-3, 400, &SimOptions::default(), &SeedSequence::new(9)).unwrap();
    assert!((fit.alpha_hat - 1.5).abs() < 0.05, "{fit:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn annulus_masses_add_up(r0 in 0.05f64..1.0, r1f in 1.1f64..3.0, r2f in 1.1f64..3.0, k in 0.1f64..3.0) {
        let spec = StableMeasureSpec::standard(1.5, 2, 16, k);
        let all: Vec<usize> = (0..16).collect();
        let r1 = r0 * r1f;
        let r2 = r1 * r2f;
        let a = cone_annulus_mass(&spec, &all, r0, r1) + cone_annulus_mass(&spec, &all, r1, r2);
        let b = cone_annulus_mass(&spec, &all, r0, r2);
        prop_assert!((a - b).abs() < 1e-12 * b.max(1.0));
        let half: Vec<usize> = (0..8).collect();
        prop_assert!((2.0 * cone_annulus_mass(&spec, &half, r0, r1) - cone_annulus_mass(&spec, &all, r0, r1)).abs() < 1e-12);
    }
}
