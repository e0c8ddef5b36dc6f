//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `ACCEPTANCE_ONLY=1,5 cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use levy_homog::cli::{run, Command, RunConfig};
use levy_homog::ergodic::{
    compare_measures, ergodic_error, estimate_invariant_measure, invariance_fixed_point, EmpiricalMeasure,
    InvariantOptions,
};
use levy_homog::grid::GridField;
use levy_homog::homogenize::{
    compute_homogenized, fclt_diagnostics, FcltOptions, Homogenization, HomogenizeOptions, HomogenizedModel, RadialIndicator,
};
use levy_homog::levy::{isotropic_stable_increment, jump_rate, sample_jump_stream, StableMeasureSpec};
use levy_homog::model::presets;
use levy_homog::nonlocal::{
    assemble_generator, compute_corrector, resolvent_mc, solve_resolvent_with, CorrectorKind, SolverOptions,
    Variant,
};
use levy_homog::pde::{homogenization_error, solve_limit_spectral, solve_u_eps_mc, uniform_points, FeynmanKacOptions};
use levy_homog::rng::SeedSequence;
use levy_homog::sde::{simulate_x_eps, Integrator, SimOptions};
use levy_homog::stats::{ks_two_sample, median, non_increasing_within, tail_index, Estimate};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

const SWEEP: [f64; 3] = [0.5, 0.25, 0.125];

/// Criteria known to be out of reach; they print FAIL without failing the run.
const KNOWN_RED: [u32; 0] = [];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> levy_homog::Result<Outcome>;

fn seq(tag: u64) -> SeedSequence {
    SeedSequence::new(20_240_601).derive(tag)
}

/// `∫₀^∞ (1 − cos s) s^{−1−α} ds` by composite Simpson on `s = v²` up to
/// `S = (2πK)²`, plus the non-oscillating part of the tail.
fn half_line_symbol(alpha: f64) -> f64 {
    let vmax = (2.0 * PI * 400.0).sqrt();
    let n = 2_000_000usize;
    let h = vmax / n as f64;
    let f = |v: f64| {
        if v == 0.0 {
            1.0
        } else {
            let s = v * v;
            4.0 * (0.5 * s).sin().powi(2) * v.powf(-1.0 - 2.0 * alpha)
        }
    };
    let mut acc = f(0.0) + f(vmax);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let s_max = vmax * vmax;
    // ∫_S^∞ s^{−1−α} ds minus the leading term of ∫_S^∞ cos s · s^{−1−α} ds (sin S = 0)
    acc * h / 3.0 + s_max.powf(-alpha) / alpha - (1.0 + alpha) * s_max.powf(-2.0 - alpha)
}

/// `ψ(ξ) = ∫ (1 − cos ξy) |y|^{−1−α} dy` in one dimension.
fn psi_1d(alpha: f64, xi: f64) -> f64 {
    2.0 * half_line_symbol(alpha) * xi.abs().powf(alpha)
}

fn drift_mu() -> &'static EmpiricalMeasure {
    static MU: OnceLock<EmpiricalMeasure> = OnceLock::new();
    MU.get_or_init(|| {
        estimate_invariant_measure(&presets::drift(), 0.0, 400_000, None, 0.1, 64, &seq(100), &InvariantOptions::default())
            .expect("drift invariant measure")
    })
}

fn modulated_hom() -> &'static (EmpiricalMeasure, Homogenization) {
    static H: OnceLock<(EmpiricalMeasure, Homogenization)> = OnceLock::new();
    H.get_or_init(|| {
        let m = presets::modulated();
        let mu = estimate_invariant_measure(&m, 0.0, 400_000, None, 0.1, 64, &seq(101), &InvariantOptions::default())
            .expect("modulated invariant measure");
        let h = compute_homogenized(&m, &mu, &HomogenizeOptions::for_dim(1), &seq(102)).expect("modulated homogenization");
        (mu, h)
    })
}

fn drift_hom() -> &'static Homogenization {
    static H: OnceLock<Homogenization> = OnceLock::new();
    H.get_or_init(|| {
        compute_homogenized(&presets::drift(), drift_mu(), &HomogenizeOptions::for_dim(1), &seq(103))
            .expect("drift homogenization")
    })
}

fn constant_exact() -> HomogenizedModel {
    HomogenizedModel::exact(&[0.3], 0.2, StableMeasureSpec::standard(1.5, 1, 2, 1.0))
}

fn c01_constant_end_to_end() -> levy_homog::Result<Outcome> {
    let m = presets::constant();
    let psi = psi_1d(1.5, 2.0 * PI);
    let closed = -2.0 * gamma(-1.5) * (0.75 * PI).cos() * (2.0 * PI).powf(1.5);
    let hom = constant_exact();
    let xs = uniform_points(1, 16);
    let mut detail = format!("psi(2pi)={psi:.6} (closed form {closed:.6})");
    let mut pass = (psi - closed).abs() < 1e-6 * closed;
    for &(t, n_paths) in &[(1.0, 100_000usize), (0.05, 100_000)] {
        let lim = solve_limit_spectral(&hom, &m.u0, t, &xs)?;
        let oracle: Vec<f64> = xs
            .iter()
            .map(|x| (0.2 * t).exp() * (-psi * t).exp() * (2.0 * PI * (x[0] + 0.3 * t)).cos())
            .collect();
        let spec_err = lim.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let opts = FeynmanKacOptions {
            n_paths,
            dt: 0.25 * 0.1f64.powf(1.5),
            ..Default::default()
        };
        let sol = solve_u_eps_mc(&m, 0.1, t, &xs, None, &opts, &seq(1))?;
        let mut worst_z: f64 = 0.0;
        let mut worst_abs: f64 = 0.0;
        for (v, o) in sol.values.iter().zip(&oracle) {
            worst_abs = worst_abs.max((v.value - o).abs());
            worst_z = worst_z.max((v.value - o).abs() / v.stderr.max(1e-300));
        }
        let ok = spec_err < 1e-8 * oracle.iter().fold(1e-300f64, |a, b| a.max(b.abs())) + 1e-15
            && worst_z <= 3.0
            && worst_abs <= 0.05;
        pass &= ok;
        detail += &format!("; t={t}: spectral err {spec_err:.1e}, MC max |err| {worst_abs:.2e}, max z {worst_z:.2}");
    }
    Ok(outcome(pass, detail))
}

fn c02_homogenization_trend() -> levy_homog::Result<Outcome> {
    let xs = uniform_points(1, 16);
    let t = 0.05;
    let opts = FeynmanKacOptions {
        n_paths: 20_000,
        dt: 1e-3,
        ..Default::default()
    };
    let constant = homogenization_error(&presets::constant(), &constant_exact(), &SWEEP, t, &xs, &opts, &seq(2))?;
    let (_, mh) = modulated_hom();
    let modulated = homogenization_error(&presets::modulated(), &mh.model, &SWEEP, t, &xs, &opts, &seq(3))?;
    let fmt = |tab: &levy_homog::pde::ErrorTable| {
        tab.rows
            .iter()
            .map(|r| format!("{:.4}±{:.4}", r.sup_error.value, r.sup_error.stderr))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let pass = constant.non_increasing(2.0) && modulated.non_increasing(2.0);
    Ok(outcome(
        pass,
        format!("t={t}; constant sup err [{}]; modulated sup err [{}]", fmt(&constant), fmt(&modulated)),
    ))
}

fn random_trig(rng: &mut ChaCha8Rng, n: usize) -> GridField {
    let modes: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=6))
        .map(|_| {
            (
                rng.random_range(1..=8) as f64,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let c0: f64 = rng.random_range(-1.0..1.0);
    GridField::from_fn(1, n, |x| {
        c0 + modes
            .iter()
            .map(|(k, a, b)| a * (2.0 * PI * k * x[0]).cos() + b * (2.0 * PI * k * x[0]).sin())
            .sum::<f64>()
    })
}

fn c03_maximum_principle() -> levy_homog::Result<Outcome> {
    let m = presets::drift();
    let opts = SolverOptions::for_dim(1);
    let gen = assemble_generator(&m, opts.grid_n, Variant::Limit, &opts.quadrature)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_trig(&mut rng, opts.grid_n);
        for kappa in [0.5, 1.0, 2.0] {
            total += 1;
            let mut loose = opts;
            loose.max_principle_tol = f64::INFINITY;
            let sol = solve_resolvent_with(kappa, &f, &gen, &m, &loose)?;
            worst = worst.max(sol.max_principle_ratio);
            if sol.max_principle_ratio <= 1.02 {
                ok += 1;
            }
        }
    }
    Ok(outcome(ok == total, format!("{ok}/{total} solves, worst κ‖u‖/‖f‖ = {worst:.5}")))
}

fn c04_corrector_residual() -> levy_homog::Result<Outcome> {
    let m = presets::drift();
    let mu = drift_mu();
    let mut res = BTreeMap::new();
    for n in [64usize, 128, 256] {
        let mut opts = SolverOptions::for_dim(1);
        opts.grid_n = n;
        let c = compute_corrector(CorrectorKind::BHat, &m, mu, &opts)?;
        res.insert(n, c.residual());
    }
    let r256 = res[&256];
    let pass = r256 <= 1e-3 && res[&64] >= 2.0 * res[&128] && res[&128] >= 2.0 * r256;
    Ok(outcome(
        pass,
        format!("residual n=64 {:.2e}, n=128 {:.2e}, n=256 {:.2e}", res[&64], res[&128], r256),
    ))
}

fn c05_resolvent_cross_method() -> levy_homog::Result<Outcome> {
    let m = presets::constant();
    let opts = SolverOptions::for_dim(1);
    let f = GridField::from_fn(1, opts.grid_n, |x| (2.0 * PI * x[0]).cos() + 0.5 * (4.0 * PI * x[0]).sin() + 0.3);
    let gen = assemble_generator(&m, opts.grid_n, Variant::Limit, &opts.quadrature)?;
    let sol = solve_resolvent_with(1.0, &f, &gen, &m, &opts)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for j in 0..5 {
        let x = [j as f64 / 5.0 + 0.03, 0.0];
        let col = sol.u.interpolate(&x, 0);
        let mc = resolvent_mc(1.0, &f, &x, &m, 8_000, 16.0, 0.005, &seq(5).derive(j))?;
        let z = (col - mc.value).abs() / (mc.stderr + mc.bias + sol.error_estimate);
        worst = worst.max(z);
        parts.push(format!("{col:.4}/{:.4}±{:.4}", mc.value, mc.stderr));
    }
    Ok(outcome(worst <= 3.0, format!("max z {worst:.2}; {}", parts.join(" "))))
}

fn c06_invariant_measure() -> levy_homog::Result<Outcome> {
    let m = presets::constant();
    let mu = estimate_invariant_measure(&m, 0.0, 1_000_000, None, 0.1, 64, &seq(6), &InvariantOptions::default())?;
    let d = compare_measures(&mu, &EmpiricalMeasure::uniform(1, 64)?)?;
    let fp = invariance_fixed_point(&m, &mu, 200_000, 1.0, 0.05, &seq(60))?;
    Ok(outcome(
        d.tv <= 0.02 && fp.passed,
        format!("TV(mu_hat, uniform) = {:.4}; push-forward TV {:.4} vs envelope {:.4}", d.tv, fp.tv, fp.envelope),
    ))
}

fn c07_mu_eps_convergence() -> levy_homog::Result<Outcome> {
    let m = presets::drift();
    let opts = InvariantOptions::default();
    let mu0 = estimate_invariant_measure(&m, 0.0, 2_000_000, None, 0.1, 16, &seq(7), &opts)?;
    let mut vals = Vec::new();
    for (i, &eps) in SWEEP.iter().enumerate() {
        let mu = estimate_invariant_measure(&m, eps, 2_000_000, None, 0.1, 16, &seq(70 + i as u64), &opts)?;
        let tv = compare_measures(&mu, &mu0)?.tv;
        vals.push(Estimate::new(tv, mu.tv_noise(mu0.ess)));
    }
    let pass = non_increasing_within(&vals, 2.0);
    let s: Vec<String> = vals.iter().map(|e| format!("{:.4}±{:.4}", e.value, e.stderr)).collect();
    Ok(outcome(pass, format!("TV(mu_eps, mu_0) over eps sweep [{}]", s.join(" "))))
}

fn c08_ergodic_theorem() -> levy_homog::Result<Outcome> {
    let m = presets::constant();
    let f = GridField::from_fn(1, 256, |x| (2.0 * PI * x[0]).cos());
    let uniform = EmpiricalMeasure::uniform(1, 64)?;
    let n_paths = 100;
    let mut meds = Vec::new();
    for (i, &eps) in SWEEP.iter().enumerate() {
        let s = seq(8).derive(i as u64);
        let errs: Vec<f64> = (0..n_paths)
            .map(|p| {
                let path = simulate_x_eps(&m, eps, &[0.0, 0.0], 1.0, 1e-3, &SimOptions::default(), &s, p)?;
                Ok(ergodic_error(&f, &path, &uniform))
            })
            .collect::<levy_homog::Result<_>>()?;
        let e = Estimate::from_samples(&errs);
        meds.push(Estimate::new(median(&errs), 1.2533 * e.stderr));
    }
    let decreasing = meds.windows(2).all(|w| w[1].value < w[0].value);
    let last = meds.last().unwrap().value;
    let s: Vec<String> = meds.iter().map(|e| format!("{:.4}", e.value)).collect();
    Ok(outcome(decreasing && last <= 0.05, format!("median |time average - mean| [{}]", s.join(" "))))
}

fn c09_noise_law() -> levy_homog::Result<Outcome> {
    let alpha = 1.5;
    let delta = 0.05;
    let rate = jump_rate(alpha, 1, delta);
    let horizon = 100_000.0 / rate;
    let stream = sample_jump_stream(alpha, 1, delta, horizon, &seq(9), 0)?;
    let count = stream.events.len() as f64;
    let oracle = 2.0 * delta.powf(-alpha) / alpha;
    let rate_rel = (count / horizon - oracle).abs() / oracle;

    let m = presets::pure_stable(1);
    let eps = 0.1f64;
    let integ = Integrator::for_x_eps(&m, eps, 1e-3, &SimOptions::default())?;
    let ss = seq(90);
    let n = 10_000;
    let scaled: Vec<f64> = (0..n)
        .map(|i| {
            let (z, _) = integ.run([0.0, 0.0], 1.0, ss.stream(1, i), &mut ())?;
            Ok(z[0] * integ.space_scale() / eps)
        })
        .collect::<levy_homog::Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let exact: Vec<f64> = (0..n)
        .map(|_| isotropic_stable_increment(alpha, 1, 1.0, &mut rng).map(|p| p[0]))
        .collect::<levy_homog::Result<_>>()?;
    let (_, p_value) = ks_two_sample(&scaled, &exact);

    let sizes: Vec<f64> = stream.events.iter().map(|e| e.y[0].abs()).collect();
    let fit = tail_index(&sizes, delta, 16, 50).expect("enough exceedances");
    let pass = rate_rel <= 0.02 && p_value > 0.01 && (fit.alpha_hat - alpha).abs() <= 0.05;
    Ok(outcome(
        pass,
        format!(
            "rate rel err {rate_rel:.4} over {count} events; KS p = {p_value:.3}; tail index {:.4}±{:.4}",
            fit.alpha_hat, fit.stderr
        ),
    ))
}

fn c10_jump_measure() -> levy_homog::Result<Outcome> {
    let m = presets::modulated();
    let (mu, h) = modulated_hom();
    let alpha = m.alpha;
    // direct ∫ σ₀^α dμ̂ over bins, each bin averaged with 16 midpoints
    let s0 = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let per_bin: Vec<f64> = (0..mu.num_bins())
        .map(|j| {
            let a = j as f64 / mu.bins as f64;
            (0..16)
                .map(|q| s0(a + (q as f64 + 0.5) / (16.0 * mu.bins as f64)).powf(alpha))
                .sum::<f64>()
                / 16.0
        })
        .collect();
    let (k_direct, k_se) = mu.integrate_binned(&per_bin);
    let k_hat = h.model.pi_spec.density[0];
    let k_hat_se = h.model.pi_stderr[0];
    let k_mc = h.jump_measure.mc_spec.density[0];
    let k_mc_se = h.jump_measure.mc_stderr[0];
    let ok_k = (k_hat - k_direct).abs() <= 3.0 * (k_hat_se + k_se + 1e-4)
        && (k_hat - k_mc).abs() <= 3.0 * (k_hat_se + k_mc_se).hypot(0.0);
    // density ∝ σ₀^{−α} for a drift-free one-dimensional stable SDE
    let norm: f64 = (0..100_000).map(|i| s0((i as f64 + 0.5) / 1e5).powf(-alpha)).sum::<f64>() / 1e5;
    let k_stationary = 1.0 / norm;

    let opts = FcltOptions {
        test: RadialIndicator { rho: 0.05 },
        n_paths: 200,
        ..Default::default()
    };
    let rep = fclt_diagnostics(&m, &h.model, &h.b_hat, &SWEEP, 1.0, &opts, &seq(10))?;
    let lim = rep.nu34_limit;
    let last = rep.rows.iter().min_by(|a, b| a.epsilon.total_cmp(&b.epsilon)).unwrap();
    let comp_ok = (last.nu34.value - lim.value).abs() <= 3.0 * (last.nu34.stderr + lim.stderr + lim.bias + 1e-12);
    let count_ok = (last.nu34_count.value - lim.value).abs() <= 3.0 * (last.nu34_count.stderr + lim.stderr + lim.bias);
    let pass = ok_k && comp_ok && count_ok;
    Ok(outcome(
        pass,
        format!(
            "k_hat {k_hat:.5}±{k_hat_se:.5}, direct {k_direct:.5}±{k_se:.5}, MC {k_mc:.5}±{k_mc_se:.5}, stationary density {k_stationary:.5}; \
             eps={}: compensator {:.4}±{:.4}, count {:.3}±{:.3}, limit t∫f dΠ {:.4}±{:.4}",
            last.epsilon, last.nu34.value, last.nu34.stderr, last.nu34_count.value, last.nu34_count.stderr, lim.value, lim.stderr
        ),
    ))
}

fn c11_fclt_small_terms() -> levy_homog::Result<Outcome> {
    let opts = FcltOptions::default();
    let (_, mh) = modulated_hom();
    let zero = fclt_diagnostics(&presets::modulated(), &mh.model, &mh.b_hat, &SWEEP, 1.0, &opts, &seq(11))?;
    let h = drift_hom();
    let drift = fclt_diagnostics(&presets::drift(), &h.model, &h.b_hat, &SWEEP, 1.0, &opts, &seq(12))?;
    let vanish = zero.small_terms_vanish();
    let b2 = drift.b2_trend(2.0);
    let nu2 = drift.nu2_trend(2.0);
    let s: Vec<String> = drift
        .rows
        .iter()
        .map(|r| {
            format!(
                "eps={} B2 {:.2e} |Xi|^2 {:.2e} nu2 {:.2e}",
                r.epsilon, r.b2_sup.value, r.xi_square.value, r.nu2.value
            )
        })
        .collect();
    Ok(outcome(
        vanish && b2 && nu2,
        format!("b=0 vanish: {vanish}; drift preset: {}", s.join(", ")),
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable output dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).expect("readable artifact"));
            }
        }
    }
    out
}

fn c12_determinism() -> levy_homog::Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut cfg = RunConfig::from_toml_str(
        "preset = \"drift\"\nseed = 9\ncache = false\n\
         [invariant]\nn_samples = 20000\n\
         [homogenize]\nmc_samples = 5000\n\
         [simulate]\nn_paths = 2\nt = 0.1\n\
         [solve]\nn_paths = 300\nlimit_mc_paths = 2000\nx_points = 4\n\
         [study]\nn_paths = 200\nx_points = 4\nfclt_paths = 10\n",
    )?;
    let mut snaps = Vec::new();
    for (run_ix, threads) in [1usize, 8, 8].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{run_ix}"));
        cfg.output_dir = out.clone();
        cfg.threads = Some(threads);
        for cmd in [Command::Simulate, Command::Solve, Command::Study, Command::Report] {
            run(cmd, &cfg)?;
        }
        snaps.push(snapshot(&out));
    }
    let files = snaps[0].len();
    let identical = snaps.windows(2).all(|w| w[0] == w[1]);
    let differing: Vec<&String> = snaps[0]
        .iter()
        .filter(|(k, v)| snaps[1].get(*k) != Some(*v))
        .map(|(k, _)| k)
        .collect();
    Ok(outcome(
        identical && files > 0,
        format!("{files} artifacts compared across 1, 8, 8 threads; differing: {differing:?}"),
    ))
}

fn main() {
    let criteria: [(u32, &str, Check); 12] = [
        (1, "constant-coefficient end-to-end", c01_constant_end_to_end),
        (2, "homogenization trend", c02_homogenization_trend),
        (3, "maximum principle", c03_maximum_principle),
        (4, "corrector residual", c04_corrector_residual),
        (5, "resolvent cross-method", c05_resolvent_cross_method),
        (6, "invariant measure", c06_invariant_measure),
        (7, "mu_eps -> mu", c07_mu_eps_convergence),
        (8, "ergodic theorem", c08_ergodic_theorem),
        (9, "noise law", c09_noise_law),
        (10, "jump measure diagnostics", c10_jump_measure),
        (11, "FCLT small terms", c11_fclt_small_terms),
        (12, "determinism", c12_determinism),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {id:>2} {name} ({secs:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
