use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble_generator, symbol_apply, GeneratorMatrix, QuadratureOptions, Variant};
use crate::ergodic::EmpiricalMeasure;
use crate::error::{invalid, Error, Result};
use crate::grid::GridField;
use crate::model::CoefficientModel;
use crate::rng::{domain, SeedSequence};
use crate::sde::{Integrator, PathObserver, SimOptions};
use crate::stats::Estimate;
use crate::{wrap_torus, Point, MAX_DIM};

/// Grid size, quadrature and tolerances shared by the solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub grid_n: usize,
    pub quadrature: QuadratureOptions,
    /// Relative slack in `κ‖u‖∞ ≤ (1 + tol)‖f‖∞`.
    pub max_principle_tol: f64,
    /// Bound on the symbol-route residual, relative to `max(‖f‖∞, 1)`.
    pub residual_tol: f64,
    pub centering_tol: f64,
}

impl SolverOptions {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self {
                grid_n: 256,
                quadrature: QuadratureOptions::default(),
                max_principle_tol: 0.02,
                residual_tol: 1e-3,
                centering_tol: 1e-3,
            }
        } else {
            Self {
                grid_n: 32,
                quadrature: QuadratureOptions::default(),
                max_principle_tol: 0.02,
                residual_tol: 5e-2,
                centering_tol: 1e-3,
            }
        }
    }
}

fn components_vec(f: &GridField, c: usize) -> DVector<f64> {
    DVector::from_iterator(f.num_nodes(), (0..f.num_nodes()).map(|k| f.get(k, c)))
}

fn sup_diff(a: &GridField, b: &GridField, sign: f64) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x + sign * y).abs())
        .fold(0.0, f64::max)
}

/// Solution of `κu − Lu = f` with diagnostics.
#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub u: GridField,
    pub kappa: f64,
    /// `κ‖u‖∞ / ‖f‖∞`.
    pub max_principle_ratio: f64,
    /// `‖κu − Lu − f‖∞` with the symbol-route operator.
    pub consistency_residual: f64,
    /// `2·consistency_residual/κ`, an a-posteriori bound via the maximum principle.
    pub error_estimate: f64,
}

/// `κu − L^α u = f` for the limit generator.
pub fn solve_resolvent(
    kappa: f64,
    f: &GridField,
    model: &CoefficientModel,
    opts: &SolverOptions,
) -> Result<ResolventSolution> {
    let gen = assemble_generator(model, f.n, Variant::Limit, &opts.quadrature)?;
    solve_resolvent_with(kappa, f, &gen, model, opts)
}

/// Resolvent solve with a prebuilt generator.
pub fn solve_resolvent_with(
    kappa: f64,
    f: &GridField,
    gen: &GeneratorMatrix,
    model: &CoefficientModel,
    opts: &SolverOptions,
) -> Result<ResolventSolution> {
    if !(kappa > 0.0) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if f.dim != gen.dim || f.n != gen.n || f.components != 1 {
        return Err(Error::GridMismatch("resolvent data must be a scalar field on the generator grid".into()));
    }
    if !f.is_finite() {
        return Err(invalid("non-finite resolvent data"));
    }
    let m = gen.num_nodes();
    let a = DMatrix::identity(m, m) * kappa - &gen.matrix;
    let sol = a
        .lu()
        .solve(&components_vec(f, 0))
        .ok_or_else(|| Error::SolveFailed("singular resolvent matrix".into()))?;
    let u = GridField {
        dim: f.dim,
        n: f.n,
        components: 1,
        values: sol.iter().copied().collect(),
    };
    let fs = f.sup_norm();
    let us = u.sup_norm();
    let ratio = if fs > 0.0 { kappa * us / fs } else if us == 0.0 { 0.0 } else { f64::INFINITY };
    if kappa * us > (1.0 + opts.max_principle_tol) * fs + 1e-14 {
        return Err(Error::MaximumPrinciple {
            lhs: kappa * us,
            rhs: (1.0 + opts.max_principle_tol) * fs,
        });
    }
    let lu = symbol_apply(&u, model, gen.variant)?;
    let mut r = u.clone();
    for (k, v) in r.values.iter_mut().enumerate() {
        *v = kappa * u.values[k] - lu.values[k] - f.values[k];
    }
    let res = r.sup_norm();
    Ok(ResolventSolution {
        u,
        kappa,
        max_principle_ratio: ratio,
        consistency_residual: res,
        error_estimate: 2.0 * res / kappa,
    })
}

struct DiscountObserver<'f> {
    f: &'f GridField,
    kappa: f64,
    acc: f64,
}

impl PathObserver for DiscountObserver<'_> {
    fn segment(&mut self, tau0: f64, tau1: f64, z: &Point, _y: f64) {
        let v = self.f.interpolate(&wrap_torus(z, self.f.dim), 0);
        self.acc += v * ((-self.kappa * tau0).exp() - (-self.kappa * tau1).exp()) / self.kappa;
    }
}

/// Monte Carlo value of `∫₀^{t_max} e^{−κt} f(X̃_t^x) dt` along limit paths
/// with time step `dt`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_mc(
    kappa: f64,
    f: &GridField,
    x: &Point,
    model: &CoefficientModel,
    n_paths: usize,
    t_max: f64,
    dt: f64,
    seq: &SeedSequence,
) -> Result<Estimate> {
    if !(kappa > 0.0) || n_paths < 2 || !(t_max > 0.0) {
        return Err(invalid("need kappa > 0, t_max > 0 and at least two paths"));
    }
    if (-kappa * t_max).exp() > 1e-6 {
        log::warn!("e^(-κ t_max) = {:e} leaves a truncation bias above 1e-6", (-kappa * t_max).exp());
    }
    let integ = Integrator::for_x_tilde(model, 0.0, dt, &SimOptions::default())?;
    let vals: Vec<Result<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut obs = DiscountObserver { f, kappa, acc: 0.0 };
            integ.run(*x, t_max, seq.stream(domain::RESOLVENT, i as u64), &mut obs)?;
            Ok(obs.acc)
        })
        .collect();
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let mut est = Estimate::from_samples(&vals);
    est.bias = f.sup_norm() * (-kappa * t_max).exp() / kappa;
    Ok(est)
}

/// Grid weights of a binned measure: each bin's mass is split between the
/// grid nodes around its centre by linear interpolation.
pub fn grid_weights(mu: &EmpiricalMeasure, n: usize) -> Result<Vec<f64>> {
    let d = mu.dim;
    let nn = n.pow(d as u32);
    let mut w = vec![0.0; nn];
    for (j, &p) in mu.probabilities.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let c = mu.bin_center(j);
        let mut base = [0usize; MAX_DIM];
        let mut t = [0.0; MAX_DIM];
        for a in 0..d {
            let f = c[a] * n as f64;
            let fl = f.floor();
            base[a] = fl as usize % n;
            t[a] = f - fl;
        }
        if d == 1 {
            w[base[0]] += p * (1.0 - t[0]);
            w[(base[0] + 1) % n] += p * t[0];
        } else {
            for (s1, f1) in [(0, 1.0 - t[1]), (1, t[1])] {
                for (s0, f0) in [(0, 1.0 - t[0]), (1, t[0])] {
                    let k = (base[0] + s0) % n + n * ((base[1] + s1) % n);
                    w[k] += p * f0 * f1;
                }
            }
        }
    }
    Ok(w)
}

/// Solution of the centered Poisson equation `Lu + f = 0`, `∫u dμ̂ = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonSolution {
    pub u: GridField,
    /// `∫f dμ̂` per component (subtracted before solving).
    pub centering_defects: Vec<f64>,
    /// Standard errors of the centering defects.
    pub centering_stderr: Vec<f64>,
    pub centering_flagged: bool,
    /// Lagrange multiplier of the bordered system per component.
    pub multipliers: Vec<f64>,
    /// `‖G u + f̃‖∞` with the assembled matrix and centered data.
    pub discrete_residual: f64,
    /// `‖L u − G u‖∞`: symbol-route operator against the assembled matrix.
    pub consistency_residual: f64,
    /// `‖L u + f‖∞` with the symbol-route operator and the original data.
    pub raw_residual: f64,
}

pub fn solve_poisson_centered(
    f: &GridField,
    mu_hat: &EmpiricalMeasure,
    model: &CoefficientModel,
    opts: &SolverOptions,
) -> Result<PoissonSolution> {
    if mu_hat.dim != f.dim {
        return Err(Error::GridMismatch("measure and field dimensions differ".into()));
    }
    let gen = assemble_generator(model, f.n, Variant::Limit, &opts.quadrature)?;
    let w = grid_weights(mu_hat, f.n)?;
    let se: Vec<f64> = (0..f.components)
        .map(|c| mu_hat.integrate(|x| f.interpolate(x, c)).1)
        .collect();
    solve_poisson_with(f, &w, &se, &gen, model, opts)
}

/// Poisson solve with given grid weights (and defect standard errors) and a
/// prebuilt generator.
pub fn solve_poisson_with(
    f: &GridField,
    weights: &[f64],
    defect_stderr: &[f64],
    gen: &GeneratorMatrix,
    model: &CoefficientModel,
    opts: &SolverOptions,
) -> Result<PoissonSolution> {
    let m = gen.num_nodes();
    if f.dim != gen.dim || f.n != gen.n || weights.len() != m {
        return Err(Error::GridMismatch("Poisson data, weights and generator disagree".into()));
    }
    if !f.is_finite() {
        return Err(invalid("non-finite Poisson data"));
    }
    let mut b = DMatrix::zeros(m + 1, m + 1);
    b.view_mut((0, 0), (m, m)).copy_from(&gen.matrix);
    for k in 0..m {
        b[(k, m)] = 1.0;
        b[(m, k)] = weights[k];
    }
    let lu = b.lu();
    let mut u = GridField::zeros(f.dim, f.n, f.components);
    let mut centered = f.clone();
    let mut defects = Vec::new();
    let mut stderrs = Vec::new();
    let mut mults = Vec::new();
    let mut flagged = false;
    for c in 0..f.components {
        let fc = components_vec(f, c);
        let defect: f64 = fc.iter().zip(weights).map(|(a, b)| a * b).sum();
        let se = defect_stderr.get(c).copied().unwrap_or(0.0);
        if defect.abs() > opts.centering_tol.max(3.0 * se) {
            flagged = true;
            log::warn!("centering defect {defect:e} (stderr {se:e}) in component {c}");
        }
        let mut rhs = DVector::zeros(m + 1);
        for k in 0..m {
            rhs[k] = -(fc[k] - defect);
            centered.values[k * f.components + c] = fc[k] - defect;
        }
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SolveFailed("singular bordered Poisson system".into()))?;
        for k in 0..m {
            u.values[k * f.components + c] = sol[k];
        }
        defects.push(defect);
        stderrs.push(se);
        mults.push(sol[m]);
    }
    let gu = gen.apply(&u)?;
    let lu_sym = symbol_apply(&u, model, gen.variant)?;
    let discrete = sup_diff(&gu, &centered, 1.0);
    let consistency = sup_diff(&lu_sym, &gu, -1.0);
    let raw = sup_diff(&lu_sym, f, 1.0);
    let tol = opts.residual_tol * f.sup_norm().max(1.0);
    if consistency > tol {
        return Err(Error::Residual {
            residual: consistency,
            tolerance: tol,
        });
    }
    Ok(PoissonSolution {
        u,
        centering_defects: defects,
        centering_stderr: stderrs,
        centering_flagged: flagged,
        multipliers: mults,
        discrete_residual: discrete,
        consistency_residual: consistency,
        raw_residual: raw,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectorKind {
    /// `L b̂ + b = 0` (vector valued).
    BHat,
    /// `L ê + e = 0`.
    EHat,
}

/// Corrector field with its spectral gradient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Corrector {
    pub kind: CorrectorKind,
    pub field: GridField,
    /// Components ordered `(component, axis)`.
    pub gradient: GridField,
    pub solution: Option<PoissonSolution>,
}

impl Corrector {
    pub fn residual(&self) -> f64 {
        self.solution.as_ref().map_or(0.0, |s| s.raw_residual)
    }
}

/// Data field of a corrector problem on an `n^d` grid.
pub fn corrector_data(which: CorrectorKind, model: &CoefficientModel, n: usize) -> GridField {
    let d = model.dim;
    match which {
        CorrectorKind::BHat => GridField::from_vec_fn(d, n, d, |x, out| {
            let v = model.b.eval(x);
            out.copy_from_slice(&v[..d]);
        }),
        CorrectorKind::EHat => GridField::from_fn(d, n, |x| model.e.eval(x)),
    }
}

pub fn compute_corrector(
    which: CorrectorKind,
    model: &CoefficientModel,
    mu_hat: &EmpiricalMeasure,
    opts: &SolverOptions,
) -> Result<Corrector> {
    let data = corrector_data(which, model, opts.grid_n);
    let zero = match which {
        CorrectorKind::BHat => model.b.is_zero(),
        CorrectorKind::EHat => model.e.is_zero(),
    };
    if zero {
        let field = GridField::zeros(model.dim, opts.grid_n, data.components);
        let gradient = field.gradient();
        return Ok(Corrector {
            kind: which,
            field,
            gradient,
            solution: None,
        });
    }
    let sol = solve_poisson_centered(&data, mu_hat, model, opts)?;
    let gradient = sol.u.gradient();
    Ok(Corrector {
        kind: which,
        field: sol.u.clone(),
        gradient,
        solution: Some(sol),
    })
}
