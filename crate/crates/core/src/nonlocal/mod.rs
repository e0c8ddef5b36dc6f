//! Discretised generator on a periodic grid: quadrature assembly, a
//! Fourier-symbol reference operator, and the linear solves built on them.

mod solve;

pub use solve::*;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{cubic_weights, fft_nd, spectral_stencil_1d, wavenumber, GridField};
use crate::model::CoefficientModel;
use crate::quadrature::{gauss_legendre, stable_symbol_constant, SphereNodes};
use crate::{norm, Point, MAX_DIM};

/// Which generator to discretise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `𝒜^σ + b·∇`.
    Limit,
    /// Torus generator at scale `ε`: drift `b + ε^{α−1} c`.
    Tilde(f64),
    /// Generator of `X^ε` on the torus: coefficients at `x/ε`, drift
    /// `ε^{1−α} b(x/ε) + c(x/ε)`. Needs `1/ε` to be an integer.
    Oscillating(f64),
}

impl Variant {
    fn check(&self) -> Result<()> {
        match *self {
            Variant::Limit => Ok(()),
            Variant::Tilde(e) if (0.0..=1.0).contains(&e) => Ok(()),
            Variant::Oscillating(e) if e > 0.0 && e <= 1.0 => {
                let inv = 1.0 / e;
                if (inv - inv.round()).abs() > 1e-9 * inv {
                    Err(invalid(format!("oscillating generator needs 1/ε integer, got ε = {e}")))
                } else {
                    Ok(())
                }
            }
            _ => Err(invalid(format!("epsilon out of range in {self:?}"))),
        }
    }

    /// Point at which the periodic coefficients are evaluated.
    fn coefficient_point(&self, x: &Point) -> Point {
        match *self {
            Variant::Oscillating(e) => [x[0] / e, x[1] / e],
            _ => *x,
        }
    }

    fn drift(&self, model: &CoefficientModel, x: &Point) -> Point {
        match *self {
            Variant::Limit => model.tilde_drift(x, 0.0),
            Variant::Tilde(e) => model.tilde_drift(x, e),
            Variant::Oscillating(e) => {
                let z = self.coefficient_point(x);
                let b = model.b.eval(&z);
                let c = model.c.eval(&z);
                let s = e.powf(1.0 - model.alpha);
                let mut v = [0.0; MAX_DIM];
                for a in 0..model.dim {
                    v[a] = s * b[a] + c[a];
                }
                v
            }
        }
    }
}

/// Treatment of the jump integral inside the Taylor radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerScheme {
    /// Second difference in one dimension, spectral in two.
    Auto,
    /// Spectral second and fourth derivatives (high order, signed weights).
    Spectral,
    /// Three-point second difference (one dimension; nonnegative weights).
    SecondDifference,
}

/// Quadrature parameters for the jump integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Direction nodes on the circle (two dimensions only; even).
    pub sphere_nodes: usize,
    /// Inner Taylor radius in mesh cells.
    pub inner_cells: usize,
    pub inner_scheme: InnerScheme,
    /// Gauss points per mesh-width radial panel.
    pub gauss_points: usize,
    /// Two dimensions: radial cutoff of the line quadrature, beyond which the
    /// torus mean replaces the integrand.
    pub far_radius: f64,
    /// Two dimensions: panel width (in cells) beyond radius one.
    pub far_panel_cells: usize,
    pub far_gauss_points: usize,
    /// Largest number of grid nodes for which a dense matrix is built.
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            sphere_nodes: 32,
            inner_cells: 2,
            inner_scheme: InnerScheme::Auto,
            gauss_points: 8,
            far_radius: 4.0,
            far_panel_cells: 4,
            far_gauss_points: 8,
            max_nodes: 4096,
        }
    }
}

/// Dense matrix of the discretised generator with quadrature metadata.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub dim: usize,
    pub n: usize,
    pub variant: Variant,
    pub matrix: DMatrix<f64>,
    /// Largest absolute row sum of the jump part before the diagonal is
    /// balanced (a measure of the quadrature's consistency on constants).
    pub jump_imbalance: f64,
    pub inner_radius: f64,
    pub far_radius: f64,
    pub radial_nodes: usize,
    pub sphere_nodes: usize,
    /// Off-diagonal jump entries below `−1e-12 · row max`.
    pub positivity_violations: usize,
    /// Most negative off-diagonal jump entry relative to the largest entry of its row.
    pub worst_negative_ratio: f64,
}

impl GeneratorMatrix {
    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn apply(&self, u: &GridField) -> Result<GridField> {
        if u.dim != self.dim || u.n != self.n {
            return Err(Error::GridMismatch(format!(
                "field on d={} n={}, generator on d={} n={}",
                u.dim, u.n, self.dim, self.n
            )));
        }
        let mut out = GridField::zeros(self.dim, self.n, u.components);
        for c in 0..u.components {
            let v = DVector::from_iterator(self.num_nodes(), (0..self.num_nodes()).map(|k| u.get(k, c)));
            let r = &self.matrix * v;
            for k in 0..self.num_nodes() {
                out.values[k * u.components + c] = r[k];
            }
        }
        Ok(out)
    }

    /// Largest absolute row sum of the full matrix.
    pub fn max_row_sum(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }

    /// Discrete stationary distribution `ℓ` (`ℓᵀG = 0`, `Σℓ = 1`).
    pub fn stationary_weights(&self) -> Result<Vec<f64>> {
        let m = self.num_nodes();
        let mut b = DMatrix::zeros(m + 1, m + 1);
        b.view_mut((0, 0), (m, m)).copy_from(&self.matrix.transpose());
        for k in 0..m {
            b[(k, m)] = 1.0;
            b[(m, k)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let sol = b
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolveFailed("singular bordered adjoint system".into()))?;
        Ok(sol.iter().take(m).copied().collect())
    }
}

/// `W₁(q) = Σ_{j≥1} (q + j)^{−1−α}` for `q ∈ [0, 1]`.
fn periodic_tail(q: f64, alpha: f64) -> f64 {
    const J: usize = 20;
    let mut s = 0.0;
    for j in 1..=J {
        s += (q + j as f64).powf(-1.0 - alpha);
    }
    let a = q + (J + 1) as f64;
    s + a.powf(-alpha) / alpha + 0.5 * a.powf(-1.0 - alpha) + (1.0 + alpha) * a.powf(-2.0 - alpha) / 12.0
        - (1.0 + alpha) * (2.0 + alpha) * (3.0 + alpha) * a.powf(-4.0 - alpha) / 720.0
}

/// Circulant weights `c` with `I u(x_i) ≈ Σ_m c[m] (u_{i+m} − u_i)` for
/// `I u(x) = ∫₀^∞ [u(x+r) + u(x−r) − 2u(x)] r^{−1−α} dr` on the unit circle.
pub fn line_stencil_1d(n: usize, alpha: f64, opts: &QuadratureOptions) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let r_in = opts.inner_cells as f64 * h;
    let mut c = vec![0.0; n];
    let k2 = r_in.powf(2.0 - alpha) / (2.0 - alpha);
    match opts.inner_scheme {
        InnerScheme::Spectral => {
            let d2 = spectral_stencil_1d(n, 2);
            let d4 = spectral_stencil_1d(n, 4);
            let k4 = r_in.powf(4.0 - alpha) / (12.0 * (4.0 - alpha));
            for m in 0..n {
                let j = (n - m) % n;
                c[m] += k2 * d2[j] + k4 * d4[j];
            }
        }
        InnerScheme::SecondDifference | InnerScheme::Auto => {
            c[1] += k2 / (h * h);
            c[n - 1] += k2 / (h * h);
        }
    }
    let (gx, gw) = gauss_legendre(opts.gauss_points);
    for p in 0..n {
        for (x, w) in gx.iter().zip(&gw) {
            let t = 0.5 * (x + 1.0);
            let r = (p as f64 + t) * h;
            let mut kern = periodic_tail(r, alpha);
            if p >= opts.inner_cells {
                kern += r.powf(-1.0 - alpha);
            }
            let wk = 0.5 * w * h * kern;
            let lw = cubic_weights(t);
            for (q, l) in lw.iter().enumerate() {
                let off = p as i64 - 1 + q as i64;
                let plus = off.rem_euclid(n as i64) as usize;
                let minus = (-off).rem_euclid(n as i64) as usize;
                c[plus] += wk * l;
                c[minus] += wk * l;
            }
        }
    }
    c[0] = 0.0;
    c
}

/// Half-sphere jump directions at `z`: `(w_θ |σ(z,θ)|^α, σ̂(z,θ))`, with
/// checks for the homogeneity and oddness the symmetric pairing relies on.
fn half_directions(model: &CoefficientModel, z: &Point, m: usize) -> Result<Vec<(f64, Point)>> {
    let d = model.dim;
    if !model.sigma.is_homogeneous() {
        return Err(Error::AssumptionViolation {
            assumption: "scaling".into(),
            detail: "the generator quadrature needs a positively homogeneous jump map".into(),
        });
    }
    let thetas: Vec<(Point, f64)> = if d == 1 {
        vec![([1.0, 0.0], 1.0)]
    } else {
        let m = m.max(4) & !1;
        (0..m / 2)
            .map(|j| {
                let a = PI * (2 * j + 1) as f64 / m as f64;
                ([a.cos(), a.sin()], 2.0 * PI / m as f64)
            })
            .collect()
    };
    let mut out = Vec::with_capacity(thetas.len());
    for (th, w) in thetas {
        let s = model.sigma(z, &th);
        let neg = model.sigma(z, &[-th[0], -th[1]]);
        let rho = norm(&s, d);
        let skew = norm(&[s[0] + neg[0], s[1] + neg[1]], d);
        if skew > 1e-9 * (1.0 + rho) {
            return Err(Error::AssumptionViolation {
                assumption: "oddness".into(),
                detail: format!("σ(x,θ) + σ(x,−θ) = {skew:e} at x = {:?}", &z[..d]),
            });
        }
        if rho > 0.0 {
            out.push((w * rho.powf(model.alpha), [s[0] / rho, s[1] / rho]));
        }
    }
    Ok(out)
}

fn node_index(i: &[usize; MAX_DIM], n: usize) -> usize {
    i[0] + n * i[1]
}

/// Scatters the tensor cubic interpolation weights of point `p` into `row`.
fn scatter_interp(row: &mut [f64], p: &Point, n: usize, dim: usize, scale: f64) {
    let mut base = [0i64; MAX_DIM];
    let mut w = [[0.0; 4]; MAX_DIM];
    for a in 0..dim {
        let f = p[a] * n as f64;
        let fl = f.floor();
        base[a] = fl as i64;
        w[a] = cubic_weights(f - fl);
    }
    let ni = n as i64;
    if dim == 1 {
        for q in 0..4 {
            let j = (base[0] - 1 + q as i64).rem_euclid(ni) as usize;
            row[j] += scale * w[0][q];
        }
    } else {
        for q1 in 0..4 {
            let j1 = (base[1] - 1 + q1 as i64).rem_euclid(ni) as usize;
            for q0 in 0..4 {
                let j0 = (base[0] - 1 + q0 as i64).rem_euclid(ni) as usize;
                row[j0 + n * j1] += scale * w[0][q0] * w[1][q1];
            }
        }
    }
}

const BINOM4: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// Jump-part row of node `i` in two dimensions.
fn jump_row_2d(
    i: usize,
    n: usize,
    alpha: f64,
    dirs: &[(f64, Point)],
    stencils: &[Vec<f64>],
    opts: &QuadratureOptions,
) -> Vec<f64> {
    let nn = n * n;
    let h = 1.0 / n as f64;
    let x = [(i % n) as f64 * h, (i / n) as f64 * h];
    let mut row = vec![0.0; nn];
    let r_in = opts.inner_cells as f64 * h;
    let k2 = r_in.powf(2.0 - alpha) / (2.0 - alpha);
    let k4 = r_in.powf(4.0 - alpha) / (12.0 * (4.0 - alpha));
    // coefficient of ∂₀^a ∂₁^b, indexed [a][b]
    let mut partial = [[0.0; 5]; 5];
    let (gx, gw) = gauss_legendre(opts.gauss_points);
    let (fx, fw) = gauss_legendre(opts.far_gauss_points);
    let far = opts.far_radius.max(1.0);
    let far_width = opts.far_panel_cells as f64 * h;
    let tail = 2.0 * far.powf(-alpha) / alpha / nn as f64;
    for &(wt, e) in dirs {
        partial[2][0] += wt * k2 * e[0] * e[0];
        partial[1][1] += wt * k2 * 2.0 * e[0] * e[1];
        partial[0][2] += wt * k2 * e[1] * e[1];
        for a in 0..5 {
            partial[a][4 - a] += wt * k4 * BINOM4[a] * e[0].powi(a as i32) * e[1].powi(4 - a as i32);
        }
        let mut panel = |r0: f64, r1: f64, xs: &[f64], ws: &[f64]| {
            for (q, w) in xs.iter().zip(ws) {
                let r = r0 + 0.5 * (q + 1.0) * (r1 - r0);
                let s = wt * 0.5 * w * (r1 - r0) * r.powf(-1.0 - alpha);
                scatter_interp(&mut row, &[x[0] + r * e[0], x[1] + r * e[1]], n, 2, s);
                scatter_interp(&mut row, &[x[0] - r * e[0], x[1] - r * e[1]], n, 2, s);
            }
        };
        let mut r = r_in;
        while r < 1.0 - 1e-12 {
            let r1 = (r + h).min(1.0);
            panel(r, r1, &gx, &gw);
            r = r1;
        }
        while r < far - 1e-12 {
            let r1 = (r + far_width).min(far);
            panel(r, r1, &fx, &fw);
            r = r1;
        }
        for v in row.iter_mut() {
            *v += wt * tail;
        }
    }
    let (i0, i1) = (i % n, i / n);
    for (a, pa) in partial.iter().enumerate() {
        for (b, &coef) in pa.iter().enumerate() {
            if coef == 0.0 || a + b == 0 {
                continue;
            }
            let (ga, gb) = (&stencils[a], &stencils[b]);
            for j1 in 0..n {
                let sb = gb[(i1 + n - j1) % n];
                if sb == 0.0 {
                    continue;
                }
                for j0 in 0..n {
                    row[j0 + n * j1] += coef * ga[(i0 + n - j0) % n] * sb;
                }
            }
        }
    }
    row
}

/// Count and worst relative size of negative off-diagonal weights in a row.
fn negative_weights(row: &[f64], i: usize) -> (usize, f64) {
    let top = row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .fold(0.0f64, |m, (_, v)| m.max(*v));
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for (j, &v) in row.iter().enumerate() {
        if j != i && v < -1e-12 * top {
            count += 1;
            if top > 0.0 {
                worst = worst.min(v / top);
            }
        }
    }
    (count, worst)
}

fn delta_stencil(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    v
}

/// Dense assembly of the discretised generator on an `n^d` grid.
pub fn assemble_generator(
    model: &CoefficientModel,
    n: usize,
    variant: Variant,
    opts: &QuadratureOptions,
) -> Result<GeneratorMatrix> {
    model.check()?;
    variant.check()?;
    let d = model.dim;
    if n < 8 {
        return Err(invalid(format!("grid needs at least 8 points per axis, got {n}")));
    }
    if d == 2 && opts.inner_scheme == InnerScheme::SecondDifference {
        return Err(invalid("the second-difference inner scheme is one-dimensional"));
    }
    let nn = n.pow(d as u32);
    if nn > opts.max_nodes {
        return Err(Error::Budget(format!(
            "{nn} grid nodes exceed the dense-matrix cap of {}",
            opts.max_nodes
        )));
    }
    let h = 1.0 / n as f64;
    let alpha = model.alpha;
    let sigma_zero = model.sigma.is_zero();
    let g1 = spectral_stencil_1d(n, 1);
    let stencils: Vec<Vec<f64>> = (0..5)
        .map(|k| if k == 0 { delta_stencil(n) } else { spectral_stencil_1d(n, k as u32) })
        .collect();
    let line = if d == 1 && !sigma_zero {
        line_stencil_1d(n, alpha, opts)
    } else {
        Vec::new()
    };
    let rows: Vec<Result<(Vec<f64>, f64, usize, f64)>> = (0..nn)
        .into_par_iter()
        .map(|i| {
            let idx = [i % n, if d == 2 { i / n } else { 0 }];
            let x = [idx[0] as f64 * h, idx[1] as f64 * h];
            let z = variant.coefficient_point(&x);
            let mut jump = if sigma_zero {
                vec![0.0; nn]
            } else {
                let dirs = half_directions(model, &z, opts.sphere_nodes)?;
                if d == 1 {
                    let wt: f64 = dirs.iter().map(|(w, _)| w).sum();
                    (0..n).map(|j| wt * line[(j + n - i) % n]).collect()
                } else {
                    jump_row_2d(i, n, alpha, &dirs, &stencils, opts)
                }
            };
            let s: f64 = jump.iter().sum();
            jump[i] -= s;
            let (neg, worst) = negative_weights(&jump, i);
            let mut full = jump;
            let v = variant.drift(model, &x);
            for a in 0..d {
                if v[a] == 0.0 {
                    continue;
                }
                for m in 0..n {
                    let mut jdx = idx;
                    jdx[a] = m;
                    full[node_index(&jdx, n)] += v[a] * g1[(idx[a] + n - m) % n];
                }
            }
            Ok((full, s.abs(), neg, worst))
        })
        .collect();
    let mut matrix = DMatrix::zeros(nn, nn);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    let mut imbalance: f64 = 0.0;
    for (i, r) in rows.into_iter().enumerate() {
        let (fr, s, neg, w) = r?;
        for (j, v) in fr.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
        violations += neg;
        worst = worst.min(w);
        imbalance = imbalance.max(s);
    }
    if violations > 0 {
        log::debug!("generator stencil has {violations} negative off-diagonal jump weights (worst ratio {worst:.3e})");
    }
    let radial_nodes = if d == 1 {
        n * opts.gauss_points
    } else {
        let near = ((1.0 - opts.inner_cells as f64 * h) / h).ceil() as usize * opts.gauss_points;
        let far = ((opts.far_radius - 1.0).max(0.0) / (opts.far_panel_cells as f64 * h)).ceil() as usize;
        near + far * opts.far_gauss_points
    };
    Ok(GeneratorMatrix {
        dim: d,
        n,
        variant,
        matrix,
        jump_imbalance: imbalance,
        inner_radius: opts.inner_cells as f64 * h,
        far_radius: if d == 1 { f64::INFINITY } else { opts.far_radius },
        radial_nodes,
        sphere_nodes: if d == 1 { 2 } else { opts.sphere_nodes },
        positivity_violations: violations,
        worst_negative_ratio: worst,
    })
}

/// Applies the discretised generator (assembled with default quadrature).
pub fn apply_generator(u: &GridField, model: &CoefficientModel, variant: Variant) -> Result<GridField> {
    if u.dim != model.dim {
        return Err(Error::GridMismatch(format!("field dim {} vs model dim {}", u.dim, model.dim)));
    }
    assemble_generator(model, u.n, variant, &QuadratureOptions::default())?.apply(u)
}

/// Generator applied through its pointwise Fourier symbol,
/// `−Σ_k û_k e^{2πik·x} ψ_x(2πk) + drift·∇u`, exact for the trigonometric
/// interpolant of `u`.
pub fn symbol_apply(u: &GridField, model: &CoefficientModel, variant: Variant) -> Result<GridField> {
    variant.check()?;
    if u.dim != model.dim {
        return Err(Error::GridMismatch(format!("field dim {} vs model dim {}", u.dim, model.dim)));
    }
    let d = model.dim;
    let n = u.n;
    let nn = u.num_nodes();
    let sphere = SphereNodes::new(d, 256);
    let cst = stable_symbol_constant(model.alpha);
    let kvec = |idx: usize| -> [i64; 2] { [wavenumber(idx % n, n), if d == 2 { wavenumber(idx / n, n) } else { 0 }] };
    let x_independent = model.sigma.is_x_independent();
    let grad = u.gradient();
    let mut out = GridField::zeros(d, n, u.components);
    for c in 0..u.components {
        let mut buf: Vec<Complex64> = (0..nn).map(|k| Complex64::new(u.get(k, c), 0.0)).collect();
        fft_nd(&mut buf, d, n, false);
        for v in buf.iter_mut() {
            *v /= nn as f64;
        }
        let psi_at = |z: &Point, k: [i64; 2]| -> f64 {
            let xi = [2.0 * PI * k[0] as f64, 2.0 * PI * k[1] as f64];
            let mut acc = 0.0;
            for (th, w) in sphere.points.iter().zip(&sphere.weights) {
                let s = model.sigma(z, th);
                let dot: f64 = (0..d).map(|a| xi[a] * s[a]).sum();
                acc += w * dot.abs().powf(model.alpha);
            }
            cst * acc
        };
        let jump: Vec<f64> = if model.sigma.is_zero() {
            vec![0.0; nn]
        } else if x_independent {
            let z0 = [0.0; MAX_DIM];
            let mut b = buf.clone();
            for (idx, v) in b.iter_mut().enumerate() {
                *v *= -psi_at(&z0, kvec(idx));
            }
            fft_nd(&mut b, d, n, true);
            b.iter().map(|v| v.re).collect()
        } else {
            (0..nn)
                .into_par_iter()
                .map(|i| {
                    let x = u.node(i);
                    let z = variant.coefficient_point(&x);
                    let mut acc = 0.0;
                    for (idx, v) in buf.iter().enumerate() {
                        if v.norm_sqr() < 1e-300 {
                            continue;
                        }
                        let k = kvec(idx);
                        let ph = 2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                        acc -= psi_at(&z, k) * (v.re * ph.cos() - v.im * ph.sin());
                    }
                    acc
                })
                .collect()
        };
        for i in 0..nn {
            let x = u.node(i);
            let v = variant.drift(model, &x);
            let mut val = jump[i];
            for a in 0..d {
                val += v[a] * grad.get(i, c * d + a);
            }
            out.values[i * u.components + c] = val;
        }
    }
    Ok(out)
}
