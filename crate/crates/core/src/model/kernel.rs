//! Kernel density `h(x, z)` of the state-dependent jump measure and the
//! associated bounds.

use serde::{Deserialize, Serialize};

use super::sigma::{det, inverse};
use super::CoefficientModel;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::quadrature::SphereNodes;
use crate::{norm, Point, MAX_DIM};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_RTOL: f64 = 1e-12;
const BOUND_CAP: f64 = 1e8;

/// Evaluates `τ(x, ·) = σ(x, ·)^{−1}` and `h(x, z)` for one model, caching the
/// growth estimate `φ̂` used to seed Newton's method.
#[derive(Clone, Debug)]
pub struct KernelEvaluator<'a> {
    model: &'a CoefficientModel,
    phi_hat: f64,
}

/// Grid sup of `max(|σ(x,θ)|, 1/|σ(x,θ)|)` over nodes and unit directions.
pub fn estimate_phi(model: &CoefficientModel, grid_n: usize) -> f64 {
    let sphere = SphereNodes::new(model.dim, 64);
    let grid = GridField::zeros(model.dim, grid_n, 1);
    let mut phi: f64 = 1.0;
    for k in 0..grid.num_nodes() {
        let x = grid.node(k);
        for th in &sphere.points {
            let s = norm(&model.sigma(&x, th), model.dim);
            phi = phi.max(s).max(1.0 / s);
        }
    }
    phi
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(model: &'a CoefficientModel, grid_n: usize) -> Self {
        Self {
            model,
            phi_hat: estimate_phi(model, grid_n),
        }
    }

    pub fn phi_hat(&self) -> f64 {
        self.phi_hat
    }

    /// Solves `σ(x, y) = z` for `y` by damped Newton iteration.
    pub fn tau(&self, x: &Point, z: &Point) -> Result<Point> {
        let d = self.model.dim;
        let sig = &self.model.sigma;
        if let Some(m) = sig.linear_matrix(x) {
            let inv = inverse(&m, d).ok_or(Error::NewtonFailed {
                iterations: 0,
                residual: f64::INFINITY,
            })?;
            let mut y = [0.0; MAX_DIM];
            for a in 0..d {
                for b in 0..d {
                    y[a] += inv[a][b] * z[b];
                }
            }
            return Ok(y);
        }
        let zn = norm(z, d);
        let mut y = [0.0; MAX_DIM];
        let p2 = self.phi_hat * self.phi_hat;
        for a in 0..d {
            y[a] = z[a] / p2;
        }
        let resid = |y: &Point| -> (Point, f64) {
            let s = sig.eval(x, y, d);
            let mut r = [0.0; MAX_DIM];
            for a in 0..d {
                r[a] = s[a] - z[a];
            }
            let rn = norm(&r, d);
            (r, rn)
        };
        let (mut r, mut rn) = resid(&y);
        for it in 0..NEWTON_MAX_ITER {
            if rn <= NEWTON_RTOL * zn {
                return Ok(y);
            }
            let jac = sig.jacobian_y(x, &y, d);
            let inv = inverse(&jac, d).ok_or(Error::NewtonFailed {
                iterations: it,
                residual: rn,
            })?;
            let mut step = [0.0; MAX_DIM];
            for a in 0..d {
                for b in 0..d {
                    step[a] += inv[a][b] * r[b];
                }
            }
            let mut lambda = 1.0;
            loop {
                let mut trial = y;
                for a in 0..d {
                    trial[a] -= lambda * step[a];
                }
                let (rt, rtn) = resid(&trial);
                if rtn < rn || lambda < 1e-6 {
                    y = trial;
                    r = rt;
                    rn = rtn;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if rn <= NEWTON_RTOL * zn {
            Ok(y)
        } else {
            Err(Error::NewtonFailed {
                iterations: NEWTON_MAX_ITER,
                residual: rn / zn,
            })
        }
    }

    /// `h(x,z) = |det ∇_z τ(x,z)| |z|^{d+α} / |τ(x,z)|^{d+α}`.
    pub fn density(&self, x: &Point, z: &Point) -> Result<f64> {
        let d = self.model.dim;
        let zn = norm(z, d);
        if zn == 0.0 {
            return Err(Error::InvalidParameter("kernel density needs z ≠ 0".into()));
        }
        let t = self.tau(x, z)?;
        let jac_det = if let Some(m) = self.model.sigma.linear_matrix(x) {
            1.0 / det(&m, d)
        } else {
            let h = 1e-5 * zn;
            let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
            for b in 0..d {
                let mut zp = *z;
                let mut zm = *z;
                zp[b] += h;
                zm[b] -= h;
                let tp = self.tau(x, &zp)?;
                let tm = self.tau(x, &zm)?;
                for a in 0..d {
                    jac[a][b] = (tp[a] - tm[a]) / (2.0 * h);
                }
            }
            det(&jac, d)
        };
        let p = d as f64 + self.model.alpha;
        Ok(jac_det.abs() * (zn / norm(&t, d)).powf(p))
    }
}

/// `h(x, z)` for a single evaluation.
pub fn kernel_density(model: &CoefficientModel, x: &Point, z: &Point) -> Result<f64> {
    KernelEvaluator::new(model, 32).density(x, z)
}

/// Empirical kernel constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelBounds {
    /// Estimate of `‖φ‖_∞`.
    pub phi_sup: f64,
    /// Lipschitz constant of `h` in `x`.
    pub h0: f64,
    /// Two-sided bound `h₁^{−1} ≤ h ≤ h₁`.
    pub h1: f64,
    pub moment_gamma: f64,
    /// `sup_x ∫_{B∖{0}} |σ(x,y)|^γ ν^α(dy)`.
    pub moment_bound: f64,
}

pub fn kernel_bounds(model: &CoefficientModel, grid_n: usize) -> Result<KernelBounds> {
    model.check()?;
    if !model.sigma.is_homogeneous() {
        return Err(Error::AssumptionViolation {
            assumption: "scaling".into(),
            detail: "kernel bounds need a positively homogeneous jump map".into(),
        });
    }
    let d = model.dim;
    let ev = KernelEvaluator::new(model, grid_n);
    let sphere = SphereNodes::new(d, 32);
    let grid = GridField::zeros(d, grid_n, 1);
    let nn = grid.num_nodes();
    let mut hv = vec![0.0; nn * sphere.len()];
    for k in 0..nn {
        let x = grid.node(k);
        for (j, th) in sphere.points.iter().enumerate() {
            hv[k * sphere.len() + j] = ev.density(&x, th)?;
        }
    }
    let h1 = hv.iter().fold(1.0f64, |m, &h| m.max(h).max(1.0 / h));
    let mut h0: f64 = 0.0;
    let hx = grid.spacing();
    for k in 0..nn {
        for a in 0..d {
            let stride = grid_n.pow(a as u32);
            let coord = (k / stride) % grid_n;
            let nb = if coord + 1 == grid_n { k + stride - grid_n * stride } else { k + stride };
            for j in 0..sphere.len() {
                let diff = (hv[k * sphere.len() + j] - hv[nb * sphere.len() + j]).abs();
                h0 = h0.max(diff / hx);
            }
        }
    }
    let gamma = model.alpha + 0.1;
    let mut moment: f64 = 0.0;
    for k in 0..nn {
        let x = grid.node(k);
        let s: f64 = sphere
            .points
            .iter()
            .zip(&sphere.weights)
            .map(|(th, w)| w * norm(&model.sigma(&x, th), d).powf(gamma))
            .sum();
        moment = moment.max(s / (gamma - model.alpha));
    }
    let out = KernelBounds {
        phi_sup: ev.phi_hat(),
        h0,
        h1,
        moment_gamma: gamma,
        moment_bound: moment,
    };
    for (name, v) in [("phi", out.phi_sup), ("h1", out.h1), ("h0", out.h0), ("moment", out.moment_bound)] {
        if !v.is_finite() || v > BOUND_CAP {
            return Err(Error::AssumptionViolation {
                assumption: "sigma".into(),
                detail: format!("{name} estimate {v:e} exceeds cap {BOUND_CAP:e}"),
            });
        }
    }
    Ok(out)
}
