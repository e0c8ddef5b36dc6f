use std::f64::consts::PI;
use std::sync::OnceLock;

use levy_homog::ergodic::EmpiricalMeasure;
use levy_homog::grid::GridField;
use levy_homog::model::presets;
use levy_homog::nonlocal::{
    apply_generator, assemble_generator, compute_corrector, solve_poisson_centered, solve_resolvent,
    solve_resolvent_with, symbol_apply, CorrectorKind, GeneratorMatrix, InnerScheme, QuadratureOptions,
    SolverOptions, Variant,
};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

/// `∫(1 − cos ξ·y)|y|^{−d−α} dy = |ξ|^α π^{d/2} Γ(1 − α/2) / (α 2^{α−1} Γ((d+α)/2))`.
fn psi(alpha: f64, dim: usize, xi: f64) -> f64 {
    let d = dim as f64;
    xi.abs().powf(alpha) * PI.powf(0.5 * d) * gamma(1.0 - 0.5 * alpha)
        / (alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (d + alpha)))
}

fn modulated_generator() -> &'static GeneratorMatrix {
    static G: OnceLock<GeneratorMatrix> = OnceLock::new();
    G.get_or_init(|| assemble_generator(&presets::modulated(), 256, Variant::Limit, &QuadratureOptions::default()).unwrap())
}

#[test]
fn generator_acts_on_modes_by_symbol() {
    let m = presets::constant();
    let gen = assemble_generator(&m, 256, Variant::Limit, &QuadratureOptions::default()).unwrap();
    for k in 1..=3 {
        let u = GridField::from_fn(1, 256, |x| (2.0 * PI * k as f64 * x[0]).cos());
        let lu = gen.apply(&u).unwrap();
        let s = psi(1.5, 1, 2.0 * PI * k as f64);
        let err = lu.values.iter().zip(&u.values).map(|(a, b)| (a + s * b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4 * s, "k={k}: {err:e} vs ψ = {s}");
        let sym = symbol_apply(&u, &m, Variant::Limit).unwrap();
        let err = sym.values.iter().zip(&u.values).map(|(a, b)| (a + s * b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7 * s, "symbol route k={k}: {err:e}");
    }
}

#[test]
fn two_dimensional_symbol() {
    let m = presets::pure_stable(2);
    let n = 32;
    let u = GridField::from_fn(2, n, |x| (2.0 * PI * (x[0] + x[1])).cos());
    let s = psi(1.5, 2, 2.0 * PI * 2f64.sqrt());
    let sym = symbol_apply(&u, &m, Variant::Limit).unwrap();
    let err = sym.values.iter().zip(&u.values).map(|(a, b)| (a + s * b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3 * s, "symbol route {err:e} vs {s}");
    let gen = assemble_generator(&m, n, Variant::Limit, &QuadratureOptions::default()).unwrap();
    let lu = gen.apply(&u).unwrap();
    let err = lu.values.iter().zip(&u.values).map(|(a, b)| (a + s * b).abs()).fold(0.0, f64::max);
    assert!(err < 5e-2 * s, "matrix {err:e} vs {s}");
}

#[test]
fn constants_are_annihilated() {
    let gen = modulated_generator();
    assert!(gen.max_row_sum() < 1e-9 * gen.matrix.amax());
    let one = GridField::from_fn(1, 256, |_| 1.0);
    assert!(gen.apply(&one).unwrap().sup_norm() < 1e-8);
}

#[test]
fn second_difference_scheme_has_nonnegative_jumps() {
    let opts = QuadratureOptions {
        inner_scheme: InnerScheme::SecondDifference,
        ..Default::default()
    };
    let gen = assemble_generator(&presets::modulated(), 128, Variant::Limit, &opts).unwrap();
    assert_eq!(gen.positivity_violations, 0);
    let m = &gen.matrix;
    for i in 0..128 {
        for j in 0..128 {
            if i != j {
                assert!(m[(i, j)] >= -1e-12 * m[(i, i)].abs(), "({i},{j}) = {}", m[(i, j)]);
            }
        }
    }
}

#[test]
fn discrete_stationary_weights_match_inverse_power_density() {
    let w = modulated_generator().stationary_weights().unwrap();
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let z: f64 = (0..256).map(|k| s0(k as f64 / 256.0).powf(-1.5)).sum();
    let worst = (0..256)
        .map(|k| (w[k] - s0(k as f64 / 256.0).powf(-1.5) / z).abs() * 256.0)
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst:e}");
}

#[test]
fn resolvent_exact_on_modes() {
    let m = presets::constant();
    let f = GridField::from_fn(1, 256, |x| 2.0 + (2.0 * PI * x[0]).sin());
    let sol = solve_resolvent(0.5, &f, &m, &SolverOptions::for_dim(1)).unwrap();
    let s = psi(1.5, 1, 2.0 * PI);
    for k in 0..256 {
        let x = k as f64 / 256.0;
        let exact = 2.0 / 0.5 + (2.0 * PI * x).sin() / (0.5 + s);
        assert!((sol.u.values[k] - exact).abs() < 1e-6, "{} vs {exact}", sol.u.values[k]);
    }
    assert!(sol.error_estimate < 1e-5);
}

#[test]
fn resolvent_rejects_bad_input() {
    let m = presets::constant();
    let f = GridField::from_fn(1, 64, |_| 1.0);
    let opts = SolverOptions {
        grid_n: 64,
        ..SolverOptions::for_dim(1)
    };
    assert!(solve_resolvent(0.0, &f, &m, &opts).is_err());
    let gen = assemble_generator(&m, 32, Variant::Limit, &opts.quadrature).unwrap();
    assert!(matches!(
        solve_resolvent_with(1.0, &f, &gen, &m, &opts),
        Err(levy_homog::Error::GridMismatch(_))
    ));
}

#[test]
fn oscillating_variant_needs_integer_period() {
    let m = presets::drift();
    let q = QuadratureOptions::default();
    assert!(assemble_generator(&m, 64, Variant::Oscillating(0.3), &q).is_err());
    assert!(assemble_generator(&m, 64, Variant::Oscillating(0.25), &q).is_ok());
    assert!(assemble_generator(&m, 4, Variant::Limit, &q).is_err());
}

#[test]
fn tilde_variant_adds_scaled_drift() {
    let m = presets::constant();
    let u = GridField::from_fn(1, 128, |x| (2.0 * PI * x[0]).sin());
    let a = apply_generator(&u, &m, Variant::Tilde(0.25)).unwrap();
    let b = apply_generator(&u, &m, Variant::Limit).unwrap();
    let c = 0.3 * 0.25f64.sqrt();
    for k in 0..128 {
        let x = k as f64 / 128.0;
        let drift = c * 2.0 * PI * (2.0 * PI * x).cos();
        assert!((a.values[k] - b.values[k] - drift).abs() < 1e-6);
    }
}

#[test]
fn corrector_of_drift_preset() {
    let m = presets::drift();
    let mu = EmpiricalMeasure::uniform(1, 64).unwrap();
    let c = compute_corrector(CorrectorKind::BHat, &m, &mu, &SolverOptions::for_dim(1)).unwrap();
    assert!(c.residual() < 1e-3, "{:e}", c.residual());
    // b̂ is odd like b
    let n = c.field.n;
    for k in 1..n {
        assert!((c.field.values[k] + c.field.values[n - k]).abs() < 1e-6);
    }
    let zero = compute_corrector(CorrectorKind::BHat, &presets::modulated(), &mu, &SolverOptions::for_dim(1)).unwrap();
    assert_eq!(zero.field.sup_norm(), 0.0);
    assert!(zero.solution.is_none());
}

#[test]
fn poisson_solution_is_centered() {
    let m = presets::modulated();
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let mu = EmpiricalMeasure::from_density(1, 64, |x| s0(x[0]).powf(-1.5)).unwrap();
    let f = GridField::from_fn(1, 256, |x| (4.0 * PI * x[0]).cos());
    let sol = solve_poisson_centered(&f, &mu, &m, &SolverOptions::for_dim(1)).unwrap();
    let (mean_u, _) = mu.integrate(|x| sol.u.interpolate(x, 0));
    assert!(mean_u.abs() < 1e-4, "{mean_u:e}");
    assert!(sol.consistency_residual < 1e-3);
}

fn trig_poly() -> impl Strategy<Value = Vec<(u32, f64, f64)>> {
    prop::collection::vec((1u32..10, -1.0f64..1.0, -1.0f64..1.0), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn maximum_principle(modes in trig_poly(), c0 in -1.0f64..1.0, kappa in 0.1f64..5.0) {
        let f = GridField::from_fn(1, 256, |x| {
            c0 + modes
                .iter()
                .map(|&(k, a, b)| {
                    let t = 2.0 * PI * k as f64 * x[0];
                    a * t.cos() + b * t.sin()
                })
                .sum::<f64>()
        });
        prop_assume!(f.sup_norm() > 1e-3);
        let sol = solve_resolvent_with(kappa, &f, modulated_generator(), &presets::modulated(), &SolverOptions::for_dim(1)).unwrap();
        prop_assert!(kappa * sol.u.sup_norm() <= 1.02 * f.sup_norm());
    }
}
