//! Numerical checks of the standing assumptions on a grid.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::kernel::estimate_phi;
use super::sigma::{det, inverse, op_norm};
use super::CoefficientModel;
use crate::ergodic::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::quadrature::SphereNodes;
use crate::{norm, Point, MAX_DIM};

const BOUND_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Deferred,
}

/// A sample point at which a check was evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub tolerance: f64,
    pub heuristic: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model_hash: String,
    pub grid_n: usize,
    pub phi_hat: f64,
    pub entries: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn entry(&self, name: &str) -> Option<&AssumptionCheck> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {} (grid {}, phi_hat {:.6})", &self.model_hash[..12], self.grid_n, self.phi_hat)?;
        for e in &self.entries {
            let st = match e.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Deferred => "deferred",
            };
            write!(f, "  {:<16} {:<8} measured {:.3e}  tol {:.1e}", e.name, st, e.measured, e.tolerance)?;
            if e.heuristic {
                write!(f, "  (heuristic)")?;
            }
            writeln!(f)?;
            for w in e.witnesses.iter().take(2) {
                writeln!(f, "      at x={:?} y={:?}: {}", w.x, w.y, w.detail)?;
            }
        }
        Ok(())
    }
}

fn pt(v: &Point, d: usize) -> Vec<f64> {
    v[..d].to_vec()
}

struct Tracker {
    name: &'static str,
    tol: f64,
    worst: f64,
    witnesses: Vec<Witness>,
    heuristic: bool,
}

impl Tracker {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            witnesses: Vec::new(),
            heuristic: false,
        }
    }

    fn observe(&mut self, value: f64, w: impl FnOnce() -> Witness) {
        let bad = !(value <= self.tol);
        if bad && self.witnesses.len() < 8 {
            self.witnesses.push(w());
        }
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
    }

    fn finish(self) -> AssumptionCheck {
        let status = if self.worst <= self.tol { CheckStatus::Pass } else { CheckStatus::Fail };
        AssumptionCheck {
            name: self.name.into(),
            status,
            measured: self.worst,
            tolerance: self.tol,
            heuristic: self.heuristic,
            witnesses: if status == CheckStatus::Fail { self.witnesses } else { Vec::new() },
        }
    }
}

/// Checks every assumption except centering, which is reported as deferred.
pub fn validate_assumptions(model: &CoefficientModel, grid_n: usize, tol: f64) -> Result<ValidationReport> {
    validate_inner(model, grid_n, tol, None)
}

/// As [`validate_assumptions`], with centering checked against `mu`.
pub fn validate_with_measure(
    model: &CoefficientModel,
    grid_n: usize,
    tol: f64,
    mu: &EmpiricalMeasure,
) -> Result<ValidationReport> {
    validate_inner(model, grid_n, tol, Some(mu))
}

fn validate_inner(
    model: &CoefficientModel,
    grid_n: usize,
    tol: f64,
    mu: Option<&EmpiricalMeasure>,
) -> Result<ValidationReport> {
    model.check()?;
    if grid_n < 16 {
        return Err(Error::InvalidParameter(format!("grid_n must be ≥ 16, got {grid_n}")));
    }
    let d = model.dim;
    let grid = GridField::zeros(d, grid_n, 1);
    let sphere = SphereNodes::new(d, 16);
    let radii = [0.05, 0.3, 1.0, 4.0];
    let ys: Vec<Point> = sphere
        .points
        .iter()
        .flat_map(|th| radii.iter().map(move |&r| [r * th[0], r * th[1]]))
        .collect();
    let phi = estimate_phi(model, grid_n);
    let mut entries = Vec::new();

    // periodicity of every field
    let mut per = Tracker::new("periodicity", 1e-9);
    let scalar_fields: Vec<(&str, &super::FourierField)> = [("e", &model.e), ("g", &model.g), ("u0", &model.u0)]
        .into_iter()
        .chain(model.b.components.iter().map(|f| ("b", f)))
        .chain(model.c.components.iter().map(|f| ("c", f)))
        .collect();
    for k in 0..grid.num_nodes() {
        let x0 = grid.node(k);
        let x = [x0[0] + 0.37 / grid_n as f64, x0[1] + 0.61 / grid_n as f64];
        for a in 0..d {
            let mut xs = x;
            xs[a] += 1.0;
            for (name, f) in &scalar_fields {
                let scale = 1.0 + f.coefficient_bound();
                let diff = (f.eval(&x) - f.eval(&xs)).abs() / scale;
                per.observe(diff, || Witness {
                    x: pt(&x, d),
                    y: vec![],
                    detail: format!("field {name} differs by {diff:e} under a unit shift"),
                });
            }
            for y in &ys {
                let s1 = model.sigma(&x, y);
                let s2 = model.sigma(&xs, y);
                let diff = (0..d).map(|i| (s1[i] - s2[i]).abs()).fold(0.0, f64::max) / (1.0 + norm(y, d) * phi);
                per.observe(diff, || Witness {
                    x: pt(&x, d),
                    y: pt(y, d),
                    detail: "sigma not periodic in x".into(),
                });
            }
        }
    }
    entries.push(per.finish());

    // β-Hölder seminorm proxy for b, c, e on grids n and 2n
    let beta = model.beta_target;
    let holder = |n: usize| -> f64 {
        let g = GridField::zeros(d, n, 1);
        let mut worst: f64 = 0.0;
        let max_off = (n / 4).max(1);
        let fields: Vec<&super::FourierField> = model
            .b
            .components
            .iter()
            .chain(model.c.components.iter())
            .chain(std::iter::once(&model.e))
            .collect();
        for k in 0..g.num_nodes() {
            let x = g.node(k);
            for a in 0..d {
                for off in 1..=max_off {
                    let mut x2 = x;
                    x2[a] += off as f64 / n as f64;
                    let dist = (off as f64 / n as f64).powf(beta);
                    for f in &fields {
                        worst = worst.max((f.eval(&x) - f.eval(&x2)).abs() / dist);
                    }
                }
            }
        }
        worst
    };
    let h_coarse = holder(grid_n);
    let h_fine = holder(2 * grid_n);
    let mut reg = Tracker::new("regularity", 0.1);
    reg.heuristic = true;
    let growth = if h_coarse > 0.0 { h_fine / h_coarse - 1.0 } else { 0.0 };
    reg.observe(growth, || Witness {
        x: vec![],
        y: vec![],
        detail: format!("Hölder seminorm grows from {h_coarse:.4} to {h_fine:.4} under refinement"),
    });
    let mut reg = reg.finish();
    reg.measured = h_fine;
    entries.push(reg);

    // oddness, scaling, growth, inverse Jacobian
    let mut odd = Tracker::new("oddness", tol);
    let mut scal = Tracker::new("scaling", tol);
    let mut grow = Tracker::new("growth", tol);
    let mut inv_jac = Tracker::new("inverse_jacobian", BOUND_CAP);
    let mut det_sign: Option<(f64, Point, Point)> = None;
    for k in 0..grid.num_nodes() {
        let x = grid.node(k);
        for y in &ys {
            let yn = norm(y, d);
            let s = model.sigma(&x, y);
            let mut my = [0.0; MAX_DIM];
            for a in 0..d {
                my[a] = -y[a];
            }
            let sm = model.sigma(&x, &my);
            let mut sum = [0.0; MAX_DIM];
            for a in 0..d {
                sum[a] = s[a] + sm[a];
            }
            let v = norm(&sum, d) / yn;
            odd.observe(v, || Witness {
                x: pt(&x, d),
                y: pt(y, d),
                detail: format!("σ(x,y) = {:?}, σ(x,−y) = {:?}", pt(&s, d), pt(&sm, d)),
            });
            for r in [0.5, 2.0, 10.0] {
                let mut ry = [0.0; MAX_DIM];
                for a in 0..d {
                    ry[a] = r * y[a];
                }
                let sr = model.sigma(&x, &ry);
                let mut diff = [0.0; MAX_DIM];
                for a in 0..d {
                    diff[a] = sr[a] - r * s[a];
                }
                let v = norm(&diff, d) / (r * yn);
                scal.observe(v, || Witness {
                    x: pt(&x, d),
                    y: pt(y, d),
                    detail: format!("r = {r}: |σ(x,ry) − rσ(x,y)|/(r|y|) = {v:e}"),
                });
            }
            let sn = norm(&s, d);
            let excess = (sn / yn - phi).max(1.0 / phi - sn / yn).max(0.0);
            grow.observe(excess, || Witness {
                x: pt(&x, d),
                y: pt(y, d),
                detail: format!("|σ|/|y| = {:.6} outside [1/φ̂, φ̂] = [{:.6}, {:.6}]", sn / yn, 1.0 / phi, phi),
            });
            let jac = model.sigma.jacobian_y(&x, y, d);
            let dj = det(&jac, d);
            if dj.abs() < 1e-12 || !dj.is_finite() {
                return Err(Error::AssumptionViolation {
                    assumption: "sigma".into(),
                    detail: format!(
                        "non-invertible Jacobian ∇_yσ at x={:?}, y={:?} (det {dj:e})",
                        pt(&x, d),
                        pt(y, d)
                    ),
                });
            }
            match det_sign {
                None => det_sign = Some((dj.signum(), x, *y)),
                Some((sg, x0, y0)) if sg != dj.signum() => {
                    return Err(Error::AssumptionViolation {
                        assumption: "sigma".into(),
                        detail: format!(
                            "det ∇_yσ changes sign between x={:?}, y={:?} and x={:?}, y={:?}",
                            pt(&x0, d),
                            pt(&y0, d),
                            pt(&x, d),
                            pt(y, d)
                        ),
                    });
                }
                _ => {}
            }
            let nrm = op_norm(&inverse(&jac, d).unwrap(), d);
            inv_jac.observe(nrm, || Witness {
                x: pt(&x, d),
                y: pt(y, d),
                detail: format!("|(∇_yσ)^-1| = {nrm:.6e} above cap"),
            });
        }
    }
    entries.push(odd.finish());
    entries.push(scal.finish());
    let mut g = grow.finish();
    g.measured = phi.max(g.measured);
    g.tolerance = tol;
    entries.push(g);
    entries.push(inv_jac.finish());

    // Lipschitz in x, scaled by |y|
    let mut lip = Tracker::new("lipschitz_x", BOUND_CAP);
    let h = grid.spacing();
    for k in 0..grid.num_nodes() {
        let x = grid.node(k);
        for a in 0..d {
            let mut x2 = x;
            x2[a] += h;
            for y in &ys {
                let s1 = model.sigma(&x, y);
                let s2 = model.sigma(&x2, y);
                let mut diff = [0.0; MAX_DIM];
                for i in 0..d {
                    diff[i] = s1[i] - s2[i];
                }
                let v = norm(&diff, d) / (h * norm(y, d));
                lip.observe(v, || Witness {
                    x: pt(&x, d),
                    y: pt(y, d),
                    detail: "Lipschitz quotient above cap".into(),
                });
            }
        }
    }
    entries.push(lip.finish());

    // centering against the supplied invariant measure
    match mu {
        None => entries.push(AssumptionCheck {
            name: "centering".into(),
            status: CheckStatus::Deferred,
            measured: f64::NAN,
            tolerance: tol,
            heuristic: false,
            witnesses: vec![],
        }),
        Some(mu) => {
            let mut worst: f64 = 0.0;
            let mut ctol: f64 = 0.0;
            let mut names = Vec::new();
            for (i, f) in model.b.components.iter().chain(std::iter::once(&model.e)).enumerate() {
                let (v, se) = mu.integrate(|x| f.eval(x));
                let t = tol.max(3.0 * se);
                if v.abs() > t {
                    names.push(if i < d { format!("b[{i}] mean {v:e}") } else { format!("e mean {v:e}") });
                }
                worst = worst.max(v.abs());
                ctol = ctol.max(t);
            }
            let status = if names.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail };
            entries.push(AssumptionCheck {
                name: "centering".into(),
                status,
                measured: worst,
                tolerance: ctol,
                heuristic: false,
                witnesses: names
                    .into_iter()
                    .map(|detail| Witness {
                        x: vec![],
                        y: vec![],
                        detail,
                    })
                    .collect(),
            });
        }
    }

    Ok(ValidationReport {
        model_hash: model.hash(),
        grid_n,
        phi_hat: phi,
        entries,
    })
}
