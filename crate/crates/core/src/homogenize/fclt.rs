//! Characteristics of the corrected process `X̂^ε = X^ε + ε b̂(X^ε/ε)` along
//! simulated paths.
//!
//! A jump of `X^ε` from `x` with mark `y` moves the corrector term by
//! `Ξ = ε[b̂(x/ε + σ(x/ε, y)/ε) − b̂(x/ε)]`. After the substitution
//! `q = |σ(x/ε, y)|/ε` the compensator of any functional of `Ξ` per unit fast
//! time is `Σ_θ w_θ ρ_θ^α ∫ F(Ξ(q)) q^{−1−α} dq`, with `ρ_θ = |σ(z, θ)|`.
//! These integrals depend on the fast state only, so they are tabulated on
//! the corrector grid and integrated along paths.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HomogenizedModel;
use crate::error::{invalid, Result};
use crate::grid::GridField;
use crate::levy::io as levy_io;
use crate::model::CoefficientModel;
use crate::nonlocal::Corrector;
use crate::quadrature::SphereNodes;
use crate::rng::{domain, SeedSequence};
use crate::sde::{Integrator, PathObserver, SchemeInfo, SimOptions};
use crate::stats::{median, non_increasing_within, tail_index, Estimate, TailFit};
use crate::{norm, wrap_torus, Point, MAX_DIM};

/// Test function `f(z) = 1_{|z| > ρ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialIndicator {
    pub rho: f64,
}

impl RadialIndicator {
    pub fn eval(&self, z: &Point, dim: usize) -> f64 {
        if norm(z, dim) > self.rho {
            1.0
        } else {
            0.0
        }
    }

    /// `∫₀^∞ f(r) r^{−1−α} dr`.
    pub fn radial_mass(&self, alpha: f64) -> f64 {
        self.rho.powf(-alpha) / alpha
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcltOptions {
    pub test: RadialIndicator,
    pub n_paths: usize,
    /// Physical time step.
    pub dt: f64,
    /// Radial midpoint cells per unit of `q` (1D).
    pub radial_cells: usize,
    /// Radial midpoint cells per unit of `q` (2D).
    pub radial_cells_2d: usize,
    /// Outer radius of the 2D radial quadrature; beyond it the torus mean is used.
    pub outer_radius: f64,
    pub sphere_nodes: usize,
    pub sim: SimOptions,
}

impl Default for FcltOptions {
    fn default() -> Self {
        Self {
            test: RadialIndicator { rho: 0.05 },
            n_paths: 200,
            dt: 1e-4,
            radial_cells: 2048,
            radial_cells_2d: 256,
            outer_radius: 4.0,
            sphere_nodes: 32,
            sim: SimOptions::default(),
        }
    }
}

/// Per-node compensator densities of the corrector jumps at one `ε`.
#[derive(Clone, Debug)]
pub struct CorrectorJumpTables {
    /// Components: `B₂` rate (d), `ν₂` rate, `∫|Ξ|²` rate, `∫1_{|Ξ|>1}` rate.
    pub field: GridField,
    pub b2_zero: bool,
    pub nu2_zero: bool,
}

fn directions(dim: usize, m: usize) -> Vec<(Point, f64)> {
    match dim {
        1 => vec![([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)],
        _ => {
            let m = m.max(4);
            (0..m)
                .map(|j| {
                    let a = PI * (2 * j + 1) as f64 / m as f64;
                    ([a.cos(), a.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
    }
}

/// `Σ_{j≥1} (q + j)^{−1−α}`.
fn folded_remainder(q: f64, alpha: f64) -> f64 {
    const J: usize = 64;
    let direct: f64 = (1..=J).map(|j| (q + j as f64).powf(-1.0 - alpha)).sum();
    direct + (q + J as f64 + 0.5).powf(-alpha) / alpha
}

/// Cell weights `(∫ K, ∫ q² K / q_mid²)` over `[lo, lo + h]`: the singular
/// part `q^{−1−α}` is integrated exactly, the folded remainder by the midpoint rule.
fn cell_weights(lo: f64, h: f64, alpha: f64, folded: bool) -> (f64, f64) {
    let hi = lo + h;
    let mid = lo + 0.5 * h;
    let smooth = if folded { folded_remainder(mid, alpha) * h } else { 0.0 };
    let w0 = if lo > 0.0 {
        (lo.powf(-alpha) - hi.powf(-alpha)) / alpha
    } else {
        mid.powf(-1.0 - alpha) * h
    };
    let w2 = (hi.powf(2.0 - alpha) - lo.powf(2.0 - alpha)) / (2.0 - alpha) / (mid * mid);
    (w0 + smooth, w2 + smooth)
}

/// Tabulates the corrector-jump compensators on the grid of `b_hat`.
pub fn corrector_jump_tables(
    model: &CoefficientModel,
    b_hat: &GridField,
    epsilon: f64,
    test: &RadialIndicator,
    opts: &FcltOptions,
) -> Result<CorrectorJumpTables> {
    let d = model.dim;
    if b_hat.dim != d || b_hat.components != d {
        return Err(invalid("b̂ must be a d-component field on the model torus"));
    }
    let comps = d + 3;
    let nodes = b_hat.num_nodes();
    let b_sup = (0..nodes)
        .map(|k| {
            let mut v = [0.0; MAX_DIM];
            for a in 0..d {
                v[a] = b_hat.get(k, a);
            }
            norm(&v, d)
        })
        .fold(0.0, f64::max);
    let osc = 2.2 * epsilon * b_sup;
    let b2_zero = osc <= 1.0;
    let nu2_zero = osc <= test.rho;
    let mut field = GridField::zeros(d, b_hat.n, comps);
    if b_sup == 0.0 {
        return Ok(CorrectorJumpTables {
            field,
            b2_zero,
            nu2_zero,
        });
    }
    let alpha = model.alpha;
    let dirs = directions(d, opts.sphere_nodes);
    let (q_max, per_unit) = if d == 1 {
        (1.0, opts.radial_cells)
    } else {
        (opts.outer_radius, opts.radial_cells_2d)
    };
    let cells = ((q_max * per_unit as f64).round() as usize).max(1);
    let h = q_max / cells as f64;
    let kernel: Vec<(f64, f64)> = (0..cells)
        .map(|i| cell_weights(i as f64 * h, h, alpha, d == 1))
        .collect();
    let b_at = |x: &Point| -> Point {
        let mut v = [0.0; MAX_DIM];
        for a in 0..d {
            v[a] = b_hat.interpolate(x, a);
        }
        v
    };
    let rows: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let z = b_hat.node(k);
            let mut bz = [0.0; MAX_DIM];
            for a in 0..d {
                bz[a] = b_hat.get(k, a);
            }
            let mut acc = vec![0.0; comps];
            let add = |xi: &Point, wt: f64, wt2: f64, acc: &mut Vec<f64>| {
                let r = norm(xi, d);
                if !b2_zero && r > 1.0 {
                    for a in 0..d {
                        acc[a] -= wt * xi[a];
                    }
                    acc[d + 2] += wt;
                }
                if !nu2_zero && r > test.rho {
                    acc[d] += wt;
                }
                acc[d + 1] += wt2 * r * r;
            };
            let mut sigma_weight = 0.0;
            for (th, w) in &dirs {
                let s = model.sigma(&z, th);
                let rho = norm(&s, d);
                if rho == 0.0 {
                    continue;
                }
                let wr = w * rho.powf(alpha);
                sigma_weight += wr;
                for (i, (k0, k2)) in kernel.iter().enumerate() {
                    let q = (i as f64 + 0.5) * h;
                    let mut p = z;
                    for a in 0..d {
                        p[a] += q * s[a] / rho;
                    }
                    let bp = b_at(&p);
                    let mut xi = [0.0; MAX_DIM];
                    for a in 0..d {
                        xi[a] = epsilon * (bp[a] - bz[a]);
                    }
                    add(&xi, wr * k0, wr * k2, &mut acc);
                }
            }
            if d == 2 && sigma_weight > 0.0 {
                let tail = sigma_weight * q_max.powf(-alpha) / alpha / nodes as f64;
                for j in 0..nodes {
                    let mut xi = [0.0; MAX_DIM];
                    for a in 0..d {
                        xi[a] = epsilon * (b_hat.get(j, a) - bz[a]);
                    }
                    add(&xi, tail, tail, &mut acc);
                }
            }
            acc
        })
        .collect();
    for (k, row) in rows.iter().enumerate() {
        field.values[k * comps..(k + 1) * comps].copy_from_slice(row);
    }
    Ok(CorrectorJumpTables {
        field,
        b2_zero,
        nu2_zero,
    })
}

struct FcltObserver<'a> {
    dim: usize,
    epsilon: f64,
    eps_alpha: f64,
    drift: &'a GridField,
    weight: &'a GridField,
    tables: Option<&'a GridField>,
    c_bar: Point,
    rho: f64,
    lambda1: Point,
    drift_sup: f64,
    b2: Point,
    b2_sup: f64,
    nu2: f64,
    j1: f64,
    j2: f64,
    w34: f64,
    count: u64,
}

impl PathObserver for FcltObserver<'_> {
    fn segment(&mut self, tau0: f64, tau1: f64, z: &Point, _y: f64) {
        let d = self.dim;
        let zt = wrap_torus(z, d);
        let dtau = tau1 - tau0;
        let s = tau1 * self.eps_alpha;
        let mut dev = [0.0; MAX_DIM];
        for a in 0..d {
            self.lambda1[a] += self.eps_alpha * dtau * self.drift.interpolate(&zt, a);
            dev[a] = self.lambda1[a] - self.c_bar[a] * s;
        }
        self.drift_sup = self.drift_sup.max(norm(&dev, d));
        self.w34 += dtau * self.weight.interpolate_linear(&zt, 0);
        if let Some(tab) = self.tables {
            for a in 0..d {
                self.b2[a] += dtau * tab.interpolate_linear(&zt, a);
            }
            self.b2_sup = self.b2_sup.max(norm(&self.b2, d));
            self.nu2 += dtau * tab.interpolate_linear(&zt, d);
            self.j1 += dtau * tab.interpolate_linear(&zt, d + 1);
            self.j2 += dtau * tab.interpolate_linear(&zt, d + 2);
        }
    }

    fn jump(&mut self, _tau: f64, _z: &Point, dz: &Point) {
        if self.epsilon * norm(dz, self.dim) > self.rho {
            self.count += 1;
        }
    }
}

/// One row of the `ε` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcltRow {
    pub epsilon: f64,
    pub n_paths: usize,
    pub failed_paths: usize,
    /// Item (i): `sup_s |Λ₁^ε(c)_s − C̄ s|`.
    pub drift_sup: Estimate,
    pub drift_sup_median: Estimate,
    /// `Λ₁^ε(c)_t / t`, an ergodic-average estimate of `C̄`.
    pub c_bar_path: Vec<Estimate>,
    /// Item (ii): `sup_s |B₂^ε(s)|`.
    pub b2_sup: Estimate,
    pub b2_identically_zero: bool,
    /// `∫₀^t∫|Ξ|² dν ds`, the square of the Cauchy–Schwarz factor bounding item (ii).
    pub xi_square: Estimate,
    /// `√(∫∫|Ξ|²)·√(∫∫1_{|Ξ|>1})`.
    pub b2_bound: Estimate,
    /// Item (iii): `∫∫ f dν₂^ε`.
    pub nu2: Estimate,
    pub nu2_identically_zero: bool,
    /// Item (iv): compensator `∫∫ f dν₃₊₄^ε`.
    pub nu34: Estimate,
    /// Item (iv): number of path jumps with `|ΔX| > ρ`.
    pub nu34_count: Estimate,
    /// Whether every jump above `ρ` is simulated exactly (not by the small-jump correction).
    pub count_resolved: bool,
    pub scheme: SchemeInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcltReport {
    pub alpha: f64,
    pub dim: usize,
    pub t: f64,
    pub test: RadialIndicator,
    pub c_bar: Vec<Estimate>,
    /// `t ∫ f dΠ`.
    pub nu34_limit: Estimate,
    pub rows: Vec<FcltRow>,
}

impl FcltReport {
    /// Rows ordered by decreasing `ε`.
    fn ordered(&self) -> Vec<&FcltRow> {
        let mut r: Vec<&FcltRow> = self.rows.iter().collect();
        r.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        r
    }

    pub fn drift_trend(&self, k: f64) -> bool {
        let v: Vec<Estimate> = self.ordered().iter().map(|r| r.drift_sup_median).collect();
        non_increasing_within(&v, k)
    }

    pub fn b2_trend(&self, k: f64) -> bool {
        let rows = self.ordered();
        let sup: Vec<Estimate> = rows.iter().map(|r| r.b2_sup).collect();
        let sq: Vec<Estimate> = rows.iter().map(|r| r.xi_square).collect();
        non_increasing_within(&sup, k) && non_increasing_within(&sq, k)
    }

    pub fn nu2_trend(&self, k: f64) -> bool {
        let v: Vec<Estimate> = self.ordered().iter().map(|r| r.nu2).collect();
        non_increasing_within(&v, k)
    }

    pub fn small_terms_vanish(&self) -> bool {
        self.rows.iter().all(|r| {
            r.b2_identically_zero && r.nu2_identically_zero && r.b2_sup.value == 0.0 && r.nu2.value == 0.0
        })
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let cols = [
            "epsilon",
            "drift_sup",
            "drift_sup_se",
            "drift_sup_median",
            "b2_sup",
            "b2_sup_se",
            "xi_square",
            "xi_square_se",
            "nu2",
            "nu2_se",
            "nu34",
            "nu34_se",
            "nu34_count",
            "nu34_count_se",
            "nu34_limit",
        ];
        let rows: Vec<Vec<f64>> = self
            .ordered()
            .iter()
            .map(|r| {
                vec![
                    r.epsilon,
                    r.drift_sup.value,
                    r.drift_sup.stderr,
                    r.drift_sup_median.value,
                    r.b2_sup.value,
                    r.b2_sup.stderr,
                    r.xi_square.value,
                    r.xi_square.stderr,
                    r.nu2.value,
                    r.nu2.stderr,
                    r.nu34.value,
                    r.nu34.stderr,
                    r.nu34_count.value,
                    r.nu34_count.stderr,
                    self.nu34_limit.value,
                ]
            })
            .collect();
        levy_io::write_csv(path, &cols, &rows)
    }
}

/// `sup |σ(z, θ)|` over a grid of the torus and the unit sphere.
fn sigma_sup(model: &CoefficientModel, m: usize) -> f64 {
    let d = model.dim;
    let n = if d == 1 { 256 } else { 48 };
    let dirs = directions(d, m);
    let probe = GridField::zeros(d, n, 1);
    (0..probe.num_nodes())
        .map(|k| {
            let z = probe.node(k);
            dirs.iter().map(|(th, _)| norm(&model.sigma(&z, th), d)).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

struct PathOutcome {
    drift_sup: f64,
    lambda1: Point,
    b2_sup: f64,
    nu2: f64,
    j1: f64,
    j2: f64,
    w34: f64,
    count: u64,
}

fn median_estimate(xs: &[f64]) -> Estimate {
    let e = Estimate::from_samples(xs);
    Estimate::new(median(xs), 1.2533 * e.stderr)
}

/// Items (i)–(iv) of the functional limit theorem along the `ε` sweep.
#[allow(clippy::too_many_arguments)]
pub fn fclt_diagnostics(
    model: &CoefficientModel,
    hom: &HomogenizedModel,
    b_hat: &Corrector,
    epsilons: &[f64],
    t: f64,
    opts: &FcltOptions,
    seq: &SeedSequence,
) -> Result<FcltReport> {
    let d = model.dim;
    if !(t > 0.0) {
        return Err(invalid("t must be positive"));
    }
    if !(opts.test.rho > 0.0) {
        return Err(invalid("the test function must vanish on a ball of positive radius"));
    }
    if opts.n_paths < 2 {
        return Err(invalid("at least two paths are needed"));
    }
    let field = &b_hat.field;
    let n = field.n;
    let grad = &b_hat.gradient;
    let drift = GridField::from_vec_fn(d, n, d, |x, out| {
        let c = model.c.eval(x);
        out[..d].copy_from_slice(&c[..d]);
    });
    let mut integrand = GridField::zeros(d, n, d);
    for k in 0..drift.num_nodes() {
        for a in 0..d {
            let mut v = drift.get(k, a);
            for b in 0..d {
                v += grad.get(k, a * d + b) * drift.get(k, b);
            }
            integrand.values[k * d + a] = v;
        }
    }
    let sphere = SphereNodes::new(d, opts.sphere_nodes);
    let weight = GridField::from_fn(d, n.max(64), |x| model.jump_weight(x, &sphere));
    let f_mass = opts.test.radial_mass(model.alpha);
    let lambda_total = hom.pi_spec.total_mass();
    let nodes = hom.pi_spec.nodes();
    let lambda_se: f64 = hom.pi_stderr.iter().zip(&nodes.weights).map(|(s, w)| s * w).sum();
    let nu34_limit = Estimate::new(t * f_mass * lambda_total, t * f_mass * lambda_se);
    let c_bar = hom.c_bar_point();
    let rho_sup = sigma_sup(model, opts.sphere_nodes);

    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let integ = Integrator::for_x_eps(model, eps, opts.dt, &opts.sim)?;
        let tables = corrector_jump_tables(model, field, eps, &opts.test, opts)?;
        let has_b = !field.values.iter().all(|&v| v == 0.0);
        let ea = eps.powf(model.alpha);
        let horizon = t / ea;
        let sub = seq.derive(eps.to_bits());
        let outcomes: Vec<Option<PathOutcome>> = (0..opts.n_paths)
            .into_par_iter()
            .map(|i| {
                let mut obs = FcltObserver {
                    dim: d,
                    epsilon: eps,
                    eps_alpha: ea,
                    drift: &integrand,
                    weight: &weight,
                    tables: has_b.then_some(&tables.field),
                    c_bar,
                    rho: opts.test.rho,
                    lambda1: [0.0; MAX_DIM],
                    drift_sup: 0.0,
                    b2: [0.0; MAX_DIM],
                    b2_sup: 0.0,
                    nu2: 0.0,
                    j1: 0.0,
                    j2: 0.0,
                    w34: 0.0,
                    count: 0,
                };
                match integ.run([0.0; MAX_DIM], horizon, sub.stream(domain::FCLT, i as u64), &mut obs) {
                    Ok(_) => Some(PathOutcome {
                        drift_sup: obs.drift_sup,
                        lambda1: obs.lambda1,
                        b2_sup: obs.b2_sup,
                        nu2: obs.nu2,
                        j1: obs.j1,
                        j2: obs.j2,
                        w34: obs.w34,
                        count: obs.count,
                    }),
                    Err(e) => {
                        log::warn!("fclt path {i} at ε = {eps} aborted: {e}");
                        None
                    }
                }
            })
            .collect();
        let ok: Vec<&PathOutcome> = outcomes.iter().flatten().collect();
        if ok.len() < 2 {
            return Err(invalid(format!("fewer than two paths survived at ε = {eps}")));
        }
        let col = |f: &dyn Fn(&PathOutcome) -> f64| -> Vec<f64> { ok.iter().map(|o| f(o)).collect() };
        let drift_sup = col(&|o| o.drift_sup);
        let bound = col(&|o| o.j1.sqrt() * o.j2.sqrt());
        rows.push(FcltRow {
            epsilon: eps,
            n_paths: ok.len(),
            failed_paths: opts.n_paths - ok.len(),
            drift_sup: Estimate::from_samples(&drift_sup),
            drift_sup_median: median_estimate(&drift_sup),
            c_bar_path: (0..d).map(|a| Estimate::from_samples(&col(&|o| o.lambda1[a] / t))).collect(),
            b2_sup: Estimate::from_samples(&col(&|o| o.b2_sup)),
            b2_identically_zero: !has_b || tables.b2_zero,
            xi_square: Estimate::from_samples(&col(&|o| o.j1)),
            b2_bound: Estimate::from_samples(&bound),
            nu2: Estimate::from_samples(&col(&|o| o.nu2)),
            nu2_identically_zero: !has_b || tables.nu2_zero,
            nu34: Estimate::from_samples(&col(&|o| ea * o.w34 * f_mass)),
            nu34_count: Estimate::from_samples(&col(&|o| o.count as f64)),
            count_resolved: eps * integ.delta() * rho_sup < opts.test.rho,
            scheme: integ.scheme(),
        });
    }
    Ok(FcltReport {
        alpha: model.alpha,
        dim: d,
        t,
        test: opts.test,
        c_bar: hom.c_bar.clone(),
        nu34_limit,
        rows,
    })
}

/// Collects jumps `|ΔX^ε|` and regresses their survival function.
struct JumpSizes {
    epsilon: f64,
    dim: usize,
    sizes: Vec<f64>,
}

impl PathObserver for JumpSizes {
    fn jump(&mut self, _tau: f64, _z: &Point, dz: &Point) {
        self.sizes.push(self.epsilon * norm(dz, self.dim));
    }
}

/// Tail index of the simulated jump sizes of `X^ε` over `[0, t]`.
///
/// Only jumps whose mark exceeds the simulation cutoff are recorded, so the
/// regression starts at `ε δ sup|σ|`, above which the size law is an exact
/// mixture of Pareto laws with index `α`.
#[allow(clippy::too_many_arguments)]
pub fn path_jump_tail_index(
    model: &CoefficientModel,
    epsilon: f64,
    t: f64,
    dt: f64,
    n_paths: usize,
    sim: &SimOptions,
    seq: &SeedSequence,
) -> Result<TailFit> {
    let integ = Integrator::for_x_eps(model, epsilon, dt, sim)?;
    let d = model.dim;
    let horizon = t / epsilon.powf(model.alpha);
    let sub = seq.derive(epsilon.to_bits() ^ 0x7a11);
    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut obs = JumpSizes {
                epsilon,
                dim: d,
                sizes: Vec::new(),
            };
            match integ.run([0.0; MAX_DIM], horizon, sub.stream(domain::FCLT, i as u64), &mut obs) {
                Ok(_) => obs.sizes,
                Err(_) => Vec::new(),
            }
        })
        .collect();
    let sizes: Vec<f64> = per_path.into_iter().flatten().collect();
    let x_min = 1.01 * epsilon * integ.delta() * sigma_sup(model, 64);
    tail_index(&sizes, x_min, 30, 100)
        .ok_or_else(|| invalid(format!("only {} jumps recorded; too few for a tail fit", sizes.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn folded_remainder_matches_direct_sum() {
        let q: f64 = 0.3;
        let direct: f64 = (1..400_000).map(|j| (q + j as f64).powf(-2.5)).sum();
        assert!((folded_remainder(q, 1.5) - direct).abs() < 1e-7);
    }

    #[test]
    fn zero_corrector_gives_zero_tables() {
        let m = presets::constant();
        let b = GridField::zeros(1, 64, 1);
        let t = corrector_jump_tables(&m, &b, 0.5, &RadialIndicator { rho: 0.05 }, &FcltOptions::default()).unwrap();
        assert!(t.b2_zero && t.nu2_zero);
        assert!(t.field.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn square_table_matches_closed_form() {
        // b̂ = a sin 2πz, σ = identity, z = 0: Ξ(q) = ±εa sin 2πq.
        let m = presets::pure_stable(1);
        let a = 0.2;
        let b = GridField::from_fn(1, 256, |x| a * (2.0 * PI * x[0]).sin());
        let eps = 0.25;
        let tab = corrector_jump_tables(&m, &b, eps, &RadialIndicator { rho: 0.05 }, &FcltOptions::default()).unwrap();
        let alpha = m.alpha;
        let c = crate::quadrature::stable_symbol_constant(alpha);
        let exact = 2.0 * eps * eps * a * a * 0.5 * c * (4.0 * PI).powf(alpha);
        let got = tab.field.get(0, 2);
        assert!((got - exact).abs() < 2e-3 * exact, "{got} vs {exact}");
    }
}
