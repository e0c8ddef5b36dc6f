//! α-stable noise: Poisson jump streams with small-jump compensation,
//! symmetric stable samplers and the LePage series for the limit process.

pub mod io;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::CoefficientModel;
use crate::quadrature::{isotropic_symbol_constant, sphere_area, stable_symbol_constant, SphereNodes};
use crate::rng::{domain, PathRng, SeedSequence};
use crate::{Mat, Point, MAX_DIM};

fn check_alpha_dim(alpha: f64, dim: usize) -> Result<()> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (1, 2), got {alpha}")));
    }
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!("dim must be 1 or 2, got {dim}")));
    }
    Ok(())
}

/// How jumps with `|y| ≤ δ` are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompensationPolicy {
    Discard,
    GaussianCorrection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub t: f64,
    pub y: Point,
}

/// Time-ordered large jumps `|y| > δ` of the Poisson random measure on `(0, T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpStream {
    pub alpha: f64,
    pub dim: usize,
    pub delta: f64,
    pub horizon: f64,
    pub policy: CompensationPolicy,
    pub seed: u64,
    pub stream: u64,
    pub events: Vec<JumpEvent>,
}

/// `ν^α(B_δ^c) = λ(S^{d−1}) δ^{−α} / α`.
pub fn jump_rate(alpha: f64, dim: usize, delta: f64) -> f64 {
    sphere_area(dim) * delta.powf(-alpha) / alpha
}

/// Uniform direction on `S^{d−1}`.
pub fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
    if dim == 1 {
        if rng.random::<bool>() {
            [1.0, 0.0]
        } else {
            [-1.0, 0.0]
        }
    } else {
        let a = 2.0 * PI * rng.random::<f64>();
        [a.cos(), a.sin()]
    }
}

/// Pareto radius with `P(R > r) = (r/δ)^{−α}`.
fn pareto<R: Rng + ?Sized>(alpha: f64, delta: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    delta * u.powf(-1.0 / alpha)
}

/// Lazily generated Poisson jump events; used by the path integrator so that
/// long trajectories never materialise the whole stream.
pub struct PoissonJumps {
    alpha: f64,
    dim: usize,
    delta: f64,
    rate: f64,
    t: f64,
    rng: PathRng,
}

impl PoissonJumps {
    pub fn new(alpha: f64, dim: usize, delta: f64, rng: PathRng) -> Self {
        Self {
            alpha,
            dim,
            delta,
            rate: jump_rate(alpha, dim, delta),
            t: 0.0,
            rng,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn rng_mut(&mut self) -> &mut PathRng {
        &mut self.rng
    }

    pub fn next_event(&mut self) -> JumpEvent {
        let e: f64 = Exp1.sample(&mut self.rng);
        self.t += e / self.rate;
        let r = pareto(self.alpha, self.delta, &mut self.rng);
        let th = uniform_direction(self.dim, &mut self.rng);
        JumpEvent {
            t: self.t,
            y: [r * th[0], r * th[1]],
        }
    }
}

/// Jump stream on `(0, T]` for the stream `(seq, stream)`.
pub fn sample_jump_stream(
    alpha: f64,
    dim: usize,
    delta: f64,
    horizon: f64,
    seq: &SeedSequence,
    stream: u64,
) -> Result<JumpStream> {
    check_alpha_dim(alpha, dim)?;
    if !(delta > 0.0 && horizon > 0.0) {
        return Err(invalid("delta and T must be positive"));
    }
    let mut src = PoissonJumps::new(alpha, dim, delta, seq.stream(domain::JUMPS, stream));
    let mut events = Vec::new();
    loop {
        let ev = src.next_event();
        if ev.t > horizon {
            break;
        }
        events.push(ev);
    }
    Ok(JumpStream {
        alpha,
        dim,
        delta,
        horizon,
        policy: CompensationPolicy::GaussianCorrection,
        seed: seq.master,
        stream,
        events,
    })
}

impl JumpStream {
    /// The expected number of events `T ν^α(B_δ^c)`.
    pub fn expected_count(&self) -> f64 {
        self.horizon * jump_rate(self.alpha, self.dim, self.delta)
    }
}

/// `Σ(x, δ) = ∫_{0<|y|≤δ} σ(x,y) σ(x,y)ᵀ ν^α(dy)`.
pub fn small_jump_covariance(model: &CoefficientModel, x: &Point, delta: f64) -> Result<Mat> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !model.sigma.is_homogeneous() {
        return Err(Error::AssumptionViolation {
            assumption: "scaling".into(),
            detail: "small-jump covariance needs a homogeneous jump map".into(),
        });
    }
    let d = model.dim;
    let radial = delta.powf(2.0 - model.alpha) / (2.0 - model.alpha);
    let mut cov = [[0.0; MAX_DIM]; MAX_DIM];
    if let Some(m) = model.sigma.linear_matrix(x) {
        // ∫_S θθᵀ dθ = λ(S^{d−1})/d · I
        let s = sphere_area(d) / d as f64;
        for a in 0..d {
            for b in 0..d {
                cov[a][b] = radial * s * (0..d).map(|k| m[a][k] * m[b][k]).sum::<f64>();
            }
        }
        return Ok(cov);
    }
    let sphere = SphereNodes::new(d, 128);
    for (th, w) in sphere.points.iter().zip(&sphere.weights) {
        let s = model.sigma(x, th);
        for a in 0..d {
            for b in 0..d {
                cov[a][b] += radial * w * s[a] * s[b];
            }
        }
    }
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("small-jump covariance is not finite; malformed sigma table"));
    }
    Ok(cov)
}

/// Lower Cholesky factor of a symmetric positive semidefinite `d × d` matrix.
pub fn cholesky(m: &Mat, dim: usize) -> Mat {
    let mut l = [[0.0; MAX_DIM]; MAX_DIM];
    l[0][0] = m[0][0].max(0.0).sqrt();
    if dim == 2 {
        l[1][0] = if l[0][0] > 0.0 { m[1][0] / l[0][0] } else { 0.0 };
        l[1][1] = (m[1][1] - l[1][0] * l[1][0]).max(0.0).sqrt();
    }
    l
}

/// `L G` for a standard normal vector `G`.
pub fn correlated_normal<R: Rng + ?Sized>(l: &Mat, dim: usize, rng: &mut R) -> Point {
    let mut g = [0.0; MAX_DIM];
    for v in g.iter_mut().take(dim) {
        *v = StandardNormal.sample(rng);
    }
    let mut out = [0.0; MAX_DIM];
    for a in 0..dim {
        for b in 0..=a {
            out[a] += l[a][b] * g[b];
        }
    }
    out
}

/// Spectral description of a symmetric α-stable jump measure:
/// `Π(dr dθ) = r^{−1−α} dr Λ(dθ)` with `Λ = Σ_j density_j w_j δ_{θ_j}` on the
/// sphere nodes of [`SphereNodes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableMeasureSpec {
    pub alpha: f64,
    pub dim: usize,
    /// 1D: `[k₊, k₋]`; 2D: density at angles `2πj/M`.
    pub density: Vec<f64>,
}

impl StableMeasureSpec {
    /// The standard isotropic measure `ν^α` scaled by `k`.
    pub fn standard(alpha: f64, dim: usize, m: usize, k: f64) -> Self {
        let len = if dim == 1 { 2 } else { m };
        Self {
            alpha,
            dim,
            density: vec![k; len],
        }
    }

    pub fn nodes(&self) -> SphereNodes {
        SphereNodes::new(self.dim, self.density.len())
    }

    /// Total spectral mass `Λ(S^{d−1})`.
    pub fn total_mass(&self) -> f64 {
        let nodes = self.nodes();
        self.density.iter().zip(&nodes.weights).map(|(d, w)| d * w).sum()
    }

    pub fn check(&self) -> Result<()> {
        check_alpha_dim(self.alpha, self.dim)?;
        if self.dim == 1 && self.density.len() != 2 {
            return Err(invalid("1D spectral table needs exactly [k+, k-]"));
        }
        if self.dim == 2 && (self.density.len() < 2 || self.density.len() % 2 == 1) {
            return Err(invalid("2D spectral table needs an even number of angles"));
        }
        if self.density.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(invalid("spectral density must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Largest relative asymmetry `|Λ(θ) − Λ(−θ)| / max Λ`.
    pub fn asymmetry(&self) -> f64 {
        let nodes = self.nodes();
        let top = self.density.iter().fold(0.0f64, |m, &v| m.max(v));
        if top == 0.0 {
            return 0.0;
        }
        (0..self.density.len())
            .map(|j| (self.density[j] - self.density[nodes.antipode(j)]).abs())
            .fold(0.0, f64::max)
            / top
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        self.check()?;
        let a = self.asymmetry();
        if a > tol {
            return Err(Error::AssumptionViolation {
                assumption: "oddness".into(),
                detail: format!("spectral table asymmetric: relative defect {a:e} > {tol:e}"),
            });
        }
        Ok(())
    }

    /// `ψ_Π(ξ) = ∫(1 − cos ξ·z) Π(dz) = C(α) Σ_j w_j density_j |ξ·θ_j|^α`.
    pub fn symbol(&self, xi: &Point) -> f64 {
        let c = stable_symbol_constant(self.alpha);
        let nodes = self.nodes();
        let mut acc = 0.0;
        for ((th, w), dens) in nodes.points.iter().zip(&nodes.weights).zip(&self.density) {
            let dot: f64 = (0..self.dim).map(|a| xi[a] * th[a]).sum();
            acc += w * dens * dot.abs().powf(self.alpha);
        }
        c * acc
    }

    /// `Π(|z| > ρ) = Λ(S^{d−1}) ρ^{−α} / α`.
    pub fn tail_mass(&self, rho: f64) -> f64 {
        self.total_mass() * rho.powf(-self.alpha) / self.alpha
    }

    /// `∫ θθᵀ Λ(dθ)`.
    fn second_moment(&self) -> Mat {
        let nodes = self.nodes();
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for ((th, w), dens) in nodes.points.iter().zip(&nodes.weights).zip(&self.density) {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    m[a][b] += w * dens * th[a] * th[b];
                }
            }
        }
        m
    }
}

/// Output of the LePage sampler.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitSamples {
    pub t: f64,
    pub samples: Vec<Point>,
    /// Jumps smaller than this radius are replaced by a Gaussian.
    pub truncation_radius: f64,
    /// Expected number of series terms per sample.
    pub expected_terms: f64,
    /// Trace of the covariance of the discarded part, `t r^{2−α}/(2−α) Λ(S)`;
    /// the Gaussian substitute matches it exactly.
    pub truncated_variance: f64,
}

/// Samples `L_t` for the symmetric stable measure `spec` via the truncated
/// LePage series `Σ_{Γ_i ≤ level·t} (Γ_i α/(t m))^{−1/α} V_i` plus a Gaussian
/// with the covariance of the discarded small terms.
pub fn sample_limit_process(
    spec: &StableMeasureSpec,
    t: f64,
    n_paths: usize,
    truncation_level: f64,
    seq: &SeedSequence,
) -> Result<LimitSamples> {
    spec.check_symmetric(1e-9)?;
    if !(t >= 0.0 && truncation_level > 0.0) {
        return Err(invalid("t must be nonnegative and truncation_level positive"));
    }
    let d = spec.dim;
    let alpha = spec.alpha;
    let mass = spec.total_mass();
    if mass == 0.0 || t == 0.0 {
        return Ok(LimitSamples {
            t,
            samples: vec![[0.0; MAX_DIM]; n_paths],
            truncation_radius: 0.0,
            expected_terms: 0.0,
            truncated_variance: 0.0,
        });
    }
    let nodes = spec.nodes();
    let mut cdf = Vec::with_capacity(spec.density.len());
    let mut acc = 0.0;
    for (dens, w) in spec.density.iter().zip(&nodes.weights) {
        acc += dens * w;
        cdf.push(acc / mass);
    }
    let r_min = (truncation_level * alpha / mass).powf(-1.0 / alpha);
    let gamma_max = truncation_level * t;
    let m2 = spec.second_moment();
    let radial = t * r_min.powf(2.0 - alpha) / (2.0 - alpha);
    let mut cov = [[0.0; MAX_DIM]; MAX_DIM];
    for a in 0..d {
        for b in 0..d {
            cov[a][b] = radial * m2[a][b];
        }
    }
    let chol = cholesky(&cov, d);
    let samples: Vec<Point> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = seq.stream(domain::LIMIT, i as u64);
            let mut x = [0.0; MAX_DIM];
            let mut gamma = 0.0;
            loop {
                let e: f64 = Exp1.sample(&mut rng);
                gamma += e;
                if gamma > gamma_max {
                    break;
                }
                let r = (gamma * alpha / (t * mass)).powf(-1.0 / alpha);
                let u: f64 = rng.random();
                let j = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
                let th = nodes.points[j];
                for a in 0..d {
                    x[a] += r * th[a];
                }
            }
            let g = correlated_normal(&chol, d, &mut rng);
            for a in 0..d {
                x[a] += g[a];
            }
            x
        })
        .collect();
    Ok(LimitSamples {
        t,
        samples,
        truncation_radius: r_min,
        expected_terms: gamma_max,
        truncated_variance: radial * mass,
    })
}

/// Positive `(α/2)`-stable variable with Laplace transform `exp(−s^{α/2})`
/// (Kanter's representation).
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u = PI * (1.0 - rng.random::<f64>());
    let e: f64 = Exp1.sample(rng);
    let s = (a * u).sin() / u.sin().powf(1.0 / a);
    s * ((1.0 - a) * u).sin().powf((1.0 - a) / a) / e.powf((1.0 - a) / a)
}

/// One increment over `dt` of the standard isotropic α-stable process with
/// jump measure `dy/|y|^{d+α}`, sampled exactly as a Gaussian mixture.
pub fn isotropic_stable_increment<R: Rng + ?Sized>(alpha: f64, dim: usize, dt: f64, rng: &mut R) -> Result<Point> {
    check_alpha_dim(alpha, dim)?;
    if !(dt > 0.0) {
        return Err(invalid("dt must be positive"));
    }
    let c = isotropic_symbol_constant(alpha, dim);
    let a = positive_stable(0.5 * alpha, rng);
    let scale = (2.0 * a).sqrt() * (c * dt).powf(1.0 / alpha);
    let mut out = [0.0; MAX_DIM];
    for v in out.iter_mut().take(dim) {
        let g: f64 = StandardNormal.sample(rng);
        *v = scale * g;
    }
    Ok(out)
}
