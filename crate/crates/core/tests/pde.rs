use std::f64::consts::PI;

use levy_homog::homogenize::HomogenizedModel;
use levy_homog::levy::StableMeasureSpec;
use levy_homog::model::{presets, FourierField};
use levy_homog::pde::{
    homogenization_error, solve_limit_mc, solve_limit_spectral, solve_u_eps_mc, uniform_points, FeynmanKacOptions,
};
use levy_homog::rng::SeedSequence;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn psi_1d(xi: f64) -> f64 {
    -2.0 * gamma(-1.5) * (0.75 * PI).cos() * xi.abs().powf(1.5)
}

fn hom(c: f64, e: f64, k: f64) -> HomogenizedModel {
    HomogenizedModel::exact(&[c], e, StableMeasureSpec::standard(1.5, 1, 2, k))
}

#[test]
fn limit_mc_agrees_with_spectral() {
    let h = hom(0.3, 0.2, 1.0);
    let u0 = FourierField::cos_mode(&[1], 1.0);
    let xs = uniform_points(1, 8);
    let t = 0.02;
    let spec = solve_limit_spectral(&h, &u0, t, &xs).unwrap();
    let mc = solve_limit_mc(&h, &u0, t, &xs, 40_000, &SeedSequence::new(3)).unwrap();
    for (e, u) in mc.iter().zip(&spec) {
        assert!(e.agrees_with(*u, 4.0), "{e:?} vs {u}");
    }
    assert!(solve_limit_mc(&h, &u0, t, &xs, 1, &SeedSequence::new(3)).is_err());
}

#[test]
fn feynman_kac_on_constant_preset() {
    // constant coefficients: u^ε is the limit for every ε
    let m = presets::constant();
    let xs = uniform_points(1, 4);
    let t = 0.02;
    let opts = FeynmanKacOptions {
        n_paths: 8_000,
        dt: 1e-3,
        ..Default::default()
    };
    let sol = solve_u_eps_mc(&m, 0.25, t, &xs, None, &opts, &SeedSequence::new(5)).unwrap();
    let exact = solve_limit_spectral(&hom(0.3, 0.2, 1.0), &m.u0, t, &xs).unwrap();
    for (e, u) in sol.values.iter().zip(&exact) {
        assert!(e.agrees_with(*u, 4.0), "{e:?} vs {u}");
    }
    assert!(sol.hat_values.is_none());
    assert!(solve_u_eps_mc(&m, 0.25, 0.0, &xs, None, &opts, &SeedSequence::new(5)).is_err());
}

#[test]
fn error_table_outputs() {
    let m = presets::constant();
    let h = hom(0.3, 0.2, 1.0);
    let xs = uniform_points(1, 4);
    let opts = FeynmanKacOptions {
        n_paths: 500,
        dt: 1e-3,
        ..Default::default()
    };
    let table = homogenization_error(&m, &h, &[0.5, 0.25], 0.02, &xs, &opts, &SeedSequence::new(6)).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.limit_uncertainty, 0.0);
    for r in &table.rows {
        assert!(r.noise_floor >= r.sup_error.stderr);
    }
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("error.csv");
    table.write_csv(&csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,x,u_eps,stderr,u_limit,abs_err");
    assert_eq!(lines.count(), 8);
    let py = dir.path().join("plot.py");
    table.write_plot_script(&py, "error.csv").unwrap();
    let script = std::fs::read_to_string(&py).unwrap();
    assert!(script.contains("\"error.csv\"") && script.contains("savefig"));
    assert!(homogenization_error(&m, &h, &[0.5], 0.02, &[], &opts, &SeedSequence::new(6)).is_err());
}

#[test]
fn two_dimensional_limit() {
    let h = HomogenizedModel::exact(&[0.1, -0.2], 0.0, StableMeasureSpec::standard(1.5, 2, 64, 1.0));
    let u0 = FourierField::cos_mode(&[1, 0], 1.0);
    let xs = uniform_points(2, 3);
    let t = 0.01;
    let v = solve_limit_spectral(&h, &u0, t, &xs).unwrap();
    // ψ of the isotropic measure at |ξ| = 2π in two dimensions
    let s = (2.0 * PI).powf(1.5) * PI * gamma(0.25) / (1.5 * 2f64.sqrt() * gamma(1.75));
    for (x, u) in xs.iter().zip(v) {
        let exact = (-t * s).exp() * (2.0 * PI * (x[0] + 0.1 * t)).cos();
        assert!((u - exact).abs() < 1e-3 * (-t * s).exp(), "{u} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_limit_matches_closed_form(
        t in 0.0f64..0.2,
        x in 0.0f64..1.0,
        c in -1.0f64..1.0,
        e in -1.0f64..1.0,
        k in 0.2f64..2.0,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
    ) {
        let u0 = FourierField::cos_mode(&[1], a).plus(FourierField::sin_mode(&[2], b));
        let v = solve_limit_spectral(&hom(c, e, k), &u0, t, &[[x, 0.0]]).unwrap()[0];
        let y = x + c * t;
        let exact = (e * t).exp()
            * (a * (-t * k * psi_1d(2.0 * PI)).exp() * (2.0 * PI * y).cos()
                + b * (-t * k * psi_1d(4.0 * PI)).exp() * (4.0 * PI * y).sin());
        prop_assert!((v - exact).abs() < 1e-9, "{} vs {}", v, exact);
    }
}
