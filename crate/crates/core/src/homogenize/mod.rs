//! Homogenized coefficients `C̄`, `Ē`, the limiting jump measure `Π`, and
//! path diagnostics for the characteristics of the corrected process.

mod fclt;

pub use fclt::*;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ergodic::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::levy::StableMeasureSpec;
use crate::model::CoefficientModel;
use crate::nonlocal::{compute_corrector, Corrector, CorrectorKind, SolverOptions};
use crate::quadrature::SphereNodes;
use crate::rng::{domain, SeedSequence};
use crate::stats::Estimate;
use crate::{norm, Point, MAX_DIM};

/// Where a homogenized model came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_hash: String,
    pub mu_hat_hash: String,
    pub mu_hat_samples: u64,
    pub grid_n: usize,
    pub b_hat_residual: f64,
    pub e_hat_residual: f64,
    pub sphere_nodes: usize,
    pub jump_measure_mc_samples: usize,
}

/// Constant-coefficient limit: drift `C̄`, potential `Ē` and jump measure `Π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedModel {
    pub alpha: f64,
    pub dim: usize,
    pub c_bar: Vec<Estimate>,
    pub e_bar: Estimate,
    pub pi_spec: StableMeasureSpec,
    /// Standard errors of the spectral density entries.
    pub pi_stderr: Vec<f64>,
    pub provenance: Provenance,
}

impl HomogenizedModel {
    /// Model with the given coefficients and no sampling error.
    pub fn exact(c_bar: &[f64], e_bar: f64, pi_spec: StableMeasureSpec) -> Self {
        Self {
            alpha: pi_spec.alpha,
            dim: pi_spec.dim,
            c_bar: c_bar.iter().map(|&v| Estimate::new(v, 0.0)).collect(),
            e_bar: Estimate::new(e_bar, 0.0),
            pi_stderr: vec![0.0; pi_spec.density.len()],
            pi_spec,
            provenance: Provenance {
                model_hash: String::new(),
                mu_hat_hash: String::new(),
                mu_hat_samples: 0,
                grid_n: 0,
                b_hat_residual: 0.0,
                e_hat_residual: 0.0,
                sphere_nodes: 0,
                jump_measure_mc_samples: 0,
            },
        }
    }

    pub fn c_bar_point(&self) -> Point {
        let mut p = [0.0; MAX_DIM];
        for (a, e) in self.c_bar.iter().enumerate() {
            p[a] = e.value;
        }
        p
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn measure_hash(mu: &EmpiricalMeasure) -> String {
    let json = serde_json::to_string(mu).expect("measure serialises");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn check_same_grid(fields: &[&GridField], dim: usize) -> Result<()> {
    let f0 = fields[0];
    for f in fields {
        if f.dim != dim || f.n != f0.n {
            return Err(Error::GridMismatch(format!(
                "fields on grids (d={}, n={}) and (d={}, n={})",
                f0.dim, f0.n, f.dim, f.n
            )));
        }
    }
    Ok(())
}

/// `C̄ = ∫(I + ∇b̂) c dμ̂`, one estimate per component.
pub fn effective_drift(mu_hat: &EmpiricalMeasure, c: &GridField, grad_b_hat: &GridField) -> Result<Vec<Estimate>> {
    let d = mu_hat.dim;
    check_same_grid(&[c, grad_b_hat], d)?;
    if c.components != d || grad_b_hat.components != d * d {
        return Err(Error::GridMismatch("c needs d components and ∇b̂ needs d·d".into()));
    }
    let mut integrand = GridField::zeros(d, c.n, d);
    for k in 0..c.num_nodes() {
        for a in 0..d {
            let mut v = c.get(k, a);
            for b in 0..d {
                v += grad_b_hat.get(k, a * d + b) * c.get(k, b);
            }
            integrand.values[k * d + a] = v;
        }
    }
    Ok((0..d)
        .map(|a| {
            let (v, se) = mu_hat.integrate_binned(&mu_hat.bin_averages_of(&integrand, a));
            Estimate::new(v, se)
        })
        .collect())
}

/// `Ē = ∫(g + ∇ê·c) dμ̂`.
pub fn effective_potential(
    mu_hat: &EmpiricalMeasure,
    g: &GridField,
    c: &GridField,
    grad_e_hat: &GridField,
) -> Result<Estimate> {
    let d = mu_hat.dim;
    check_same_grid(&[g, c, grad_e_hat], d)?;
    if g.components != 1 || c.components != d || grad_e_hat.components != d {
        return Err(Error::GridMismatch("g scalar, c and ∇ê need d components".into()));
    }
    let mut integrand = GridField::zeros(d, g.n, 1);
    for k in 0..g.num_nodes() {
        let mut v = g.get(k, 0);
        for b in 0..d {
            v += grad_e_hat.get(k, b) * c.get(k, b);
        }
        integrand.values[k] = v;
    }
    let (v, se) = mu_hat.integrate_binned(&mu_hat.bin_averages_of(&integrand, 0));
    Ok(Estimate::new(v, se))
}

/// Quadrature value of `Π` with its MC cross-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpMeasureEstimate {
    pub spec: StableMeasureSpec,
    pub stderr: Vec<f64>,
    pub mc_spec: StableMeasureSpec,
    pub mc_stderr: Vec<f64>,
    /// Largest `|quadrature − MC| / combined stderr` over the table.
    pub mc_discrepancy: f64,
}

/// Spectral table entry receiving direction `s` (linear split between the two
/// nearest angles in two dimensions).
fn deposit(table: &mut [f64], s: &Point, dim: usize, mass: f64) {
    if dim == 1 {
        if s[0] > 0.0 {
            table[0] += mass;
        } else if s[0] < 0.0 {
            table[1] += mass;
        }
    } else {
        let m = table.len();
        let phi = s[1].atan2(s[0]).rem_euclid(2.0 * PI);
        let f = phi / (2.0 * PI / m as f64);
        let j0 = f.floor();
        let t = f - j0;
        let j0 = j0 as usize % m;
        table[j0] += mass * (1.0 - t);
        table[(j0 + 1) % m] += mass * t;
    }
}

/// Per-direction contributions `w_θ |σ(x,θ)|^α` of a single point `x`.
fn point_deposits(model: &CoefficientModel, x: &Point, nodes: &SphereNodes, table_len: usize) -> Vec<f64> {
    let d = model.dim;
    let mut t = vec![0.0; table_len];
    for (th, w) in nodes.points.iter().zip(&nodes.weights) {
        let s = model.sigma(x, th);
        let r = norm(&s, d);
        if r > 0.0 {
            deposit(&mut t, &s, d, w * r.powf(model.alpha));
        }
    }
    t
}

/// Spectral measure of `Π(A) = ∫∫ 1_A(σ(x,y)) μ̂(dx) ν^α(dy)` by quadrature
/// over bins × sphere nodes, checked against `mc_n` Monte Carlo samples.
pub fn effective_jump_measure(
    model: &CoefficientModel,
    mu_hat: &EmpiricalMeasure,
    sphere_n: usize,
    mc_n: usize,
    seq: &SeedSequence,
) -> Result<JumpMeasureEstimate> {
    let d = model.dim;
    if mu_hat.dim != d {
        return Err(Error::GridMismatch("measure and model dimensions differ".into()));
    }
    if !model.sigma.is_homogeneous() {
        return Err(Error::AssumptionViolation {
            assumption: "scaling".into(),
            detail: "Π has a spectral representation only for homogeneous jump maps".into(),
        });
    }
    let len = if d == 1 { 2 } else { sphere_n.max(4) & !1 };
    let nodes = SphereNodes::new(d, len);
    let spec_nodes = nodes.clone();
    // bin-averaged deposits
    let per_bin: Vec<Vec<f64>> = (0..mu_hat.num_bins())
        .into_par_iter()
        .map(|b| {
            mu_hat.bin_average_vec(b, len, &|x| point_deposits(model, x, &nodes, len))
        })
        .collect();
    let mut mass = vec![0.0; len];
    let mut stderr = vec![0.0; len];
    for j in 0..len {
        let vals: Vec<f64> = per_bin.iter().map(|v| v[j]).collect();
        let (v, se) = mu_hat.integrate_binned(&vals);
        mass[j] = v / spec_nodes.weights[j];
        stderr[j] = se / spec_nodes.weights[j];
    }
    let spec = StableMeasureSpec {
        alpha: model.alpha,
        dim: d,
        density: mass,
    };
    spec.check_symmetric(1e-6)?;
    // MC cross-check: x ~ μ̂, θ uniform on the sphere
    let area = nodes.area();
    let samples: Vec<Vec<f64>> = (0..mc_n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seq.stream(domain::JUMP_MEASURE, i as u64);
            let x = mu_hat.sample(&mut rng);
            let th = if d == 1 {
                [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0]
            } else {
                let a = 2.0 * PI * rng.random::<f64>();
                [a.cos(), a.sin()]
            };
            let s = model.sigma(&x, &th);
            let r = norm(&s, d);
            let mut t = vec![0.0; len];
            if r > 0.0 {
                deposit(&mut t, &s, d, area * r.powf(model.alpha));
            }
            t
        })
        .collect();
    let mut mc = vec![0.0; len];
    let mut mc_se = vec![0.0; len];
    let mut disc: f64 = 0.0;
    if mc_n >= 2 {
        for j in 0..len {
            let col: Vec<f64> = samples.iter().map(|v| v[j]).collect();
            let e = Estimate::from_samples(&col);
            mc[j] = e.value / spec_nodes.weights[j];
            mc_se[j] = e.stderr / spec_nodes.weights[j];
            let comb = (mc_se[j].powi(2) + stderr[j].powi(2)).sqrt();
            if comb > 0.0 {
                disc = disc.max((mc[j] - spec.density[j]).abs() / comb);
            }
        }
    }
    Ok(JumpMeasureEstimate {
        spec,
        stderr,
        mc_spec: StableMeasureSpec {
            alpha: model.alpha,
            dim: d,
            density: mc,
        },
        mc_stderr: mc_se,
        mc_discrepancy: disc,
    })
}

/// `Π(C × [r₀, r₁))` for the cone `C` spanned by the listed table entries.
pub fn cone_annulus_mass(spec: &StableMeasureSpec, entries: &[usize], r0: f64, r1: f64) -> f64 {
    let nodes = spec.nodes();
    let radial = (r0.powf(-spec.alpha) - r1.powf(-spec.alpha)) / spec.alpha;
    entries.iter().map(|&j| spec.density[j] * nodes.weights[j]).sum::<f64>() * radial
}

/// Controls for [`compute_homogenized`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizeOptions {
    pub solver: SolverOptions,
    pub sphere_nodes: usize,
    pub mc_samples: usize,
}

impl HomogenizeOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            solver: SolverOptions::for_dim(dim),
            sphere_nodes: 64,
            mc_samples: 100_000,
        }
    }
}

/// Homogenized model together with the correctors it was built from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Homogenization {
    pub model: HomogenizedModel,
    pub b_hat: Corrector,
    pub e_hat: Corrector,
    pub jump_measure: JumpMeasureEstimate,
}

/// Correctors, `C̄`, `Ē` and `Π` from an invariant-measure estimate.
pub fn compute_homogenized(
    model: &CoefficientModel,
    mu_hat: &EmpiricalMeasure,
    opts: &HomogenizeOptions,
    seq: &SeedSequence,
) -> Result<Homogenization> {
    let d = model.dim;
    let n = opts.solver.grid_n;
    let b_hat = compute_corrector(CorrectorKind::BHat, model, mu_hat, &opts.solver)?;
    let e_hat = compute_corrector(CorrectorKind::EHat, model, mu_hat, &opts.solver)?;
    let c = GridField::from_vec_fn(d, n, d, |x, out| {
        let v = model.c.eval(x);
        out.copy_from_slice(&v[..d]);
    });
    let g = GridField::from_fn(d, n, |x| model.g.eval(x));
    let c_sup = c.sup_norm();
    let mut c_bar = effective_drift(mu_hat, &c, &b_hat.gradient)?;
    for e in c_bar.iter_mut() {
        e.bias = b_hat.residual() * c_sup;
    }
    let mut e_bar = effective_potential(mu_hat, &g, &c, &e_hat.gradient)?;
    e_bar.bias = e_hat.residual() * c_sup;
    let jm = effective_jump_measure(model, mu_hat, opts.sphere_nodes, opts.mc_samples, seq)?;
    let hm = HomogenizedModel {
        alpha: model.alpha,
        dim: d,
        c_bar,
        e_bar,
        pi_spec: jm.spec.clone(),
        pi_stderr: jm.stderr.clone(),
        provenance: Provenance {
            model_hash: model.hash(),
            mu_hat_hash: measure_hash(mu_hat),
            mu_hat_samples: mu_hat.n_samples,
            grid_n: n,
            b_hat_residual: b_hat.residual(),
            e_hat_residual: e_hat.residual(),
            sphere_nodes: jm.spec.density.len(),
            jump_measure_mc_samples: opts.mc_samples,
        },
    };
    Ok(Homogenization {
        model: hm,
        b_hat,
        e_hat,
        jump_measure: jm,
    })
}
