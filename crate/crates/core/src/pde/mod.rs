//! Feynman–Kac Monte Carlo for the oscillating parabolic problem, the
//! spectral solution of its homogenized limit, and the error table between
//! the two.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::GridField;
use crate::homogenize::HomogenizedModel;
use crate::levy::{io as levy_io, sample_limit_process};
use crate::model::{CoefficientModel, FourierField, FourierTerm};
use crate::rng::{domain, SeedSequence};
use crate::sde::{Integrator, SchemeInfo, SimOptions};
use crate::stats::{non_increasing_within, Estimate, RunningStats};
use crate::{Point, MAX_DIM};

/// `n` points per axis on `[0, 1)^d`.
pub fn uniform_points(dim: usize, n: usize) -> Vec<Point> {
    match dim {
        1 => (0..n).map(|i| [i as f64 / n as f64, 0.0]).collect(),
        _ => (0..n * n)
            .map(|k| [(k % n) as f64 / n as f64, (k / n) as f64 / n as f64])
            .collect(),
    }
}

fn wavevector(term: &FourierTerm) -> Point {
    let mut w = [0.0; MAX_DIM];
    for (a, &k) in term.mode.iter().enumerate().take(MAX_DIM) {
        w[a] = 2.0 * std::f64::consts::PI * k as f64;
    }
    w
}

/// Fourier table of the limit solution at time `t`: every mode is damped by
/// `e^{Ēt − tψ_Π(2πk)}` and shifted by `C̄t`.
pub fn evolve_fourier(hom: &HomogenizedModel, u0: &FourierField, t: f64) -> Result<FourierField> {
    hom.pi_spec.check_symmetric(1e-9)?;
    if !(t >= 0.0) {
        return Err(invalid("t must be nonnegative"));
    }
    let c_bar = hom.c_bar_point();
    let e_bar = hom.e_bar.value;
    let terms = u0
        .terms
        .iter()
        .map(|term| {
            let xi = wavevector(term);
            let phase: f64 = (0..hom.dim).map(|a| xi[a] * c_bar[a]).sum::<f64>() * t;
            let damp = (t * (e_bar - hom.pi_spec.symbol(&xi))).exp();
            let (s, c) = phase.sin_cos();
            FourierTerm {
                mode: term.mode.clone(),
                cos: damp * (term.cos * c + term.sin * s),
                sin: damp * (term.sin * c - term.cos * s),
            }
        })
        .collect();
    Ok(FourierField { terms })
}

/// `u(t, x) = e^{Ēt} Σ_k û₀(k) e^{2πik·(x + C̄t)} e^{−tψ_Π(2πk)}` at `x_points`.
pub fn solve_limit_spectral(hom: &HomogenizedModel, u0: &FourierField, t: f64, x_points: &[Point]) -> Result<Vec<f64>> {
    let ut = evolve_fourier(hom, u0, t)?;
    Ok(x_points.iter().map(|x| ut.eval(x)).collect())
}

/// Truncation level of the LePage series used by [`solve_limit_mc`].
pub const LIMIT_TRUNCATION: f64 = 256.0;

/// `e^{Ēt} E[u₀(x + C̄t + L_t)]` with `L_t` drawn by the LePage sampler; the
/// same samples serve every `x`.
pub fn solve_limit_mc(
    hom: &HomogenizedModel,
    u0: &FourierField,
    t: f64,
    x_points: &[Point],
    n_paths: usize,
    seq: &SeedSequence,
) -> Result<Vec<Estimate>> {
    if n_paths < 2 {
        return Err(invalid("at least two paths are needed"));
    }
    let samples = sample_limit_process(&hom.pi_spec, t, n_paths, LIMIT_TRUNCATION, seq)?;
    let c_bar = hom.c_bar_point();
    let growth = (hom.e_bar.value * t).exp();
    Ok(x_points
        .iter()
        .map(|x| {
            let mut s = RunningStats::default();
            for l in &samples.samples {
                let mut p = *x;
                for a in 0..hom.dim {
                    p[a] += c_bar[a] * t + l[a];
                }
                s.push(growth * u0.eval(&p));
            }
            Estimate::new(s.mean, s.stderr())
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeynmanKacOptions {
    pub n_paths: usize,
    /// Physical time step.
    pub dt: f64,
    pub sim: SimOptions,
}

impl Default for FeynmanKacOptions {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            dt: 1e-3,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeynmanKacSolution {
    pub epsilon: f64,
    pub t: f64,
    pub x_points: Vec<Point>,
    /// `u^ε(t, x) = E[u₀(X_t) e^{Y_t}]`.
    pub values: Vec<Estimate>,
    /// `û^ε(t, x) = E[u₀(X_t) e^{Ŷ_t}]` when `ê` is supplied.
    pub hat_values: Option<Vec<Estimate>>,
    /// Paths on which `e^{Ŷ−Y}` left `[e^{−2ε‖ê‖}, e^{2ε‖ê‖}]`.
    pub hat_bound_violations: usize,
    pub scheme: SchemeInfo,
}

/// Feynman–Kac estimate of `u^ε(t, x)` on independent paths per `x`.
///
/// With `e_hat`, also returns `û^ε` built from `Ŷ = Y + ε(ê(X_t/ε) − ê(x/ε))`.
/// A path whose `|Y|` exceeds the configured cap aborts the solve.
pub fn solve_u_eps_mc(
    model: &CoefficientModel,
    epsilon: f64,
    t: f64,
    x_points: &[Point],
    e_hat: Option<&GridField>,
    opts: &FeynmanKacOptions,
    seq: &SeedSequence,
) -> Result<FeynmanKacSolution> {
    if !(t > 0.0) {
        return Err(invalid("t must be positive"));
    }
    if opts.n_paths < 2 {
        return Err(invalid("at least two paths are needed"));
    }
    let d = model.dim;
    if let Some(f) = e_hat {
        if f.dim != d || f.components != 1 {
            return Err(invalid("ê must be a scalar field on the model torus"));
        }
    }
    let integ = Integrator::for_x_eps(model, epsilon, opts.dt, &opts.sim)?;
    let horizon = t / epsilon.powf(model.alpha);
    let e_sup = e_hat.map_or(0.0, |f| f.sup_norm());
    let log_bound = 2.0 * epsilon * e_sup * 1.05 + 1e-12;
    let sub = seq.derive(epsilon.to_bits());
    let mut values = Vec::with_capacity(x_points.len());
    let mut hats = Vec::with_capacity(x_points.len());
    let mut violations = 0;
    for (ix, x) in x_points.iter().enumerate() {
        let z0 = [x[0] / epsilon, x[1] / epsilon];
        let z0s = crate::wrap_torus(&z0, d);
        let stream = sub.derive(ix as u64);
        let out: Vec<(f64, f64, bool)> = (0..opts.n_paths)
            .into_par_iter()
            .map(|i| {
                let (z, y) = integ
                    .run(z0, horizon, stream.stream(domain::PATHS, i as u64), &mut ())
                    .map_err(|e| crate::Error::PathAborted {
                        time: t,
                        detail: format!("x = {:?}, path {i}: {e}", &x[..d]),
                    })?;
                let u = model.u0.eval(&[epsilon * z[0], epsilon * z[1]]);
                let plain = u * y.exp();
                Ok(match e_hat {
                    Some(f) => {
                        let zs = crate::wrap_torus(&z, d);
                        let shift = epsilon * (f.interpolate(&zs, 0) - f.interpolate(&z0s, 0));
                        (plain, u * (y + shift).exp(), shift.abs() <= log_bound)
                    }
                    None => (plain, plain, true),
                })
            })
            .collect::<Result<_>>()?;
        let (mut s, mut h) = (RunningStats::default(), RunningStats::default());
        for &(p, q, ok) in &out {
            s.push(p);
            h.push(q);
            violations += usize::from(!ok);
        }
        values.push(Estimate::new(s.mean, s.stderr()));
        hats.push(Estimate::new(h.mean, h.stderr()));
    }
    Ok(FeynmanKacSolution {
        epsilon,
        t,
        x_points: x_points.to_vec(),
        values,
        hat_values: e_hat.map(|_| hats),
        hat_bound_violations: violations,
        scheme: integ.scheme(),
    })
}

/// One `ε` row of the homogenization error table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub epsilon: f64,
    pub u_eps: Vec<Estimate>,
    pub abs_err: Vec<f64>,
    /// `sup_x |u^ε − u|`: stderr is the largest pointwise MC stderr, bias the
    /// limit-solution uncertainty.
    pub sup_error: Estimate,
    /// Expected sup of pure MC noise over the grid, `stderr·√(2 ln N)`.
    pub noise_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub dim: usize,
    pub t: f64,
    pub x_points: Vec<Point>,
    pub u_limit: Vec<f64>,
    /// Pointwise bound on `|u_limit|` errors induced by the `C̄`, `Ē` error bars.
    pub limit_uncertainty: f64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Sup errors ordered by decreasing `ε` are non-increasing within `k`
    /// combined standard errors.
    pub fn non_increasing(&self, k: f64) -> bool {
        let mut rows: Vec<&ErrorRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let v: Vec<Estimate> = rows
            .iter()
            .map(|r| Estimate {
                value: r.sup_error.value,
                stderr: r.sup_error.stderr.max(r.noise_floor),
                bias: r.sup_error.bias,
            })
            .collect();
        non_increasing_within(&v, k)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let d = self.dim;
        let mut cols = vec!["epsilon", "x"];
        if d == 2 {
            cols.push("x2");
        }
        cols.extend(["u_eps", "stderr", "u_limit", "abs_err"]);
        let mut rows = Vec::new();
        for r in &self.rows {
            for (i, x) in self.x_points.iter().enumerate() {
                let mut row = vec![r.epsilon];
                row.extend_from_slice(&x[..d]);
                row.extend([r.u_eps[i].value, r.u_eps[i].stderr, self.u_limit[i], r.abs_err[i]]);
                rows.push(row);
            }
        }
        levy_io::write_csv(path, &cols, &rows)
    }

    /// Writes a matplotlib script drawing `u^ε` per `ε` against the limit.
    pub fn write_plot_script(&self, path: &Path, csv_name: &str) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(
            f,
            r#"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
rows = list(csv.DictReader(open(src)))
by_eps = defaultdict(list)
limit = {{}}
for r in rows:
    by_eps[float(r["epsilon"])].append((float(r["x"]), float(r["u_eps"]), float(r["stderr"])))
    limit[float(r["x"])] = float(r["u_limit"])

fig, ax = plt.subplots()
xs = sorted(limit)
ax.plot(xs, [limit[x] for x in xs], "k-", label="limit")
for eps in sorted(by_eps, reverse=True):
    pts = sorted(by_eps[eps])
    ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[3 * p[2] for p in pts],
                marker="o", linestyle="--", capsize=2, label=f"eps = {{eps:g}}")
ax.set_xlabel("x")
ax.set_ylabel("u(t, x)")
ax.legend()
fig.savefig(src.rsplit(".", 1)[0] + ".png", dpi=150)
"#
        )?;
        Ok(())
    }
}

/// Sup-norm distance between `u^ε` (Feynman–Kac) and the spectral limit on
/// `x_points` for each `ε`.
pub fn homogenization_error(
    model: &CoefficientModel,
    hom: &HomogenizedModel,
    epsilons: &[f64],
    t: f64,
    x_points: &[Point],
    opts: &FeynmanKacOptions,
    seq: &SeedSequence,
) -> Result<ErrorTable> {
    if x_points.is_empty() {
        return Err(invalid("need at least one x point"));
    }
    let u_limit = solve_limit_spectral(hom, &model.u0, t, x_points)?;
    let limit_uncertainty = limit_sensitivity(hom, &model.u0, t, x_points)?;
    let log_n = (2.0 * (x_points.len().max(2) as f64).ln()).sqrt();
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let sol = solve_u_eps_mc(model, eps, t, x_points, None, opts, seq)?;
        let abs_err: Vec<f64> = sol.values.iter().zip(&u_limit).map(|(e, u)| (e.value - u).abs()).collect();
        let sup = abs_err.iter().copied().fold(0.0, f64::max);
        let se = sol.values.iter().map(|e| e.stderr).fold(0.0, f64::max);
        log::info!("homogenization error at ε = {eps}: {sup:.4e} (stderr {se:.2e})");
        rows.push(ErrorRow {
            epsilon: eps,
            u_eps: sol.values,
            abs_err,
            sup_error: Estimate {
                value: sup,
                stderr: se,
                bias: limit_uncertainty,
            },
            noise_floor: se * log_n,
        });
    }
    Ok(ErrorTable {
        dim: model.dim,
        t,
        x_points: x_points.to_vec(),
        u_limit,
        limit_uncertainty,
        rows,
    })
}

/// Largest change of the limit solution when `C̄` and `Ē` move by two of
/// their combined error bars.
fn limit_sensitivity(hom: &HomogenizedModel, u0: &FourierField, t: f64, x_points: &[Point]) -> Result<f64> {
    let base = solve_limit_spectral(hom, u0, t, x_points)?;
    let mut worst: f64 = 0.0;
    let spread = |e: &Estimate| 2.0 * (e.stderr + e.bias);
    for a in 0..hom.dim {
        for sign in [-1.0, 1.0] {
            let mut h = hom.clone();
            h.c_bar[a].value += sign * spread(&hom.c_bar[a]);
            let v = solve_limit_spectral(&h, u0, t, x_points)?;
            worst = worst.max(v.iter().zip(&base).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
        }
    }
    let growth = (t * spread(&hom.e_bar)).exp_m1();
    let sup = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(worst + growth * sup)
}
