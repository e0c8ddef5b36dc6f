//! Jump-adapted Euler integration of the oscillating SDE and of its rescaled
//! torus version.
//!
//! Every path is integrated in the fast variable `Z = X/ε` on the time scale
//! `τ = t/ε^α`, where the equation reads
//! `dZ = (b + ε^{α−1} c)(Z) dτ + σ(Z₋, dL̃)` and the potential accumulates at
//! rate `ε e(Z) + ε^α g(Z)`. Paths of `X^ε` are mapped back by `X = εZ`,
//! `t = ε^α τ`.

mod observer;

pub use observer::{PathObserver, Recorder};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridField;
use crate::levy::{cholesky, correlated_normal, io as levy_io, CompensationPolicy, JumpEvent, PoissonJumps};
use crate::model::CoefficientModel;
use crate::quadrature::{sphere_area, SphereNodes};
use crate::rng::{domain, PathRng, SeedSequence};
use crate::{norm, Mat, Point, MAX_DIM};

/// Integrator options.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub policy: CompensationPolicy,
    /// Largest step in the fast time `τ`.
    pub max_z_step: f64,
    /// Paths whose `|Y|` exceeds this are aborted.
    pub y_cap: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            policy: CompensationPolicy::GaussianCorrection,
            max_z_step: 0.25,
            y_cap: 700.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// `X^ε` in physical coordinates.
    Eps,
    /// The torus process `X̃` (fast coordinates).
    Tilde,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeInfo {
    pub z_step: f64,
    pub delta: f64,
    pub policy: CompensationPolicy,
    pub rescaled: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordedJump {
    pub t: f64,
    pub pre: Point,
    pub size: Point,
}

/// A simulated trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub kind: PathKind,
    pub epsilon: f64,
    pub dim: usize,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub ys: Vec<f64>,
    /// Jumps in the coordinates of `states`.
    pub jumps: Vec<RecordedJump>,
    pub scheme: SchemeInfo,
    pub seed: u64,
    pub stream: u64,
}

impl PathSample {
    /// `X mod 1` componentwise.
    pub fn torus(&self) -> Vec<Point> {
        self.states.iter().map(|x| crate::wrap_torus(x, self.dim)).collect()
    }

    /// The fast variable at record `i`: `X/ε` for `X^ε`, the state itself for `X̃`.
    pub fn fast(&self, i: usize) -> Point {
        let x = self.states[i];
        match self.kind {
            PathKind::Eps => [x[0] / self.epsilon, x[1] / self.epsilon],
            PathKind::Tilde => x,
        }
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn final_state(&self) -> Point {
        *self.states.last().expect("non-empty path")
    }

    pub fn final_y(&self) -> f64 {
        *self.ys.last().expect("non-empty path")
    }

    /// Left-endpoint quadrature of `∫₀^T f(fast(s)) ds` on the record grid.
    pub fn integrate_fast(&self, f: impl Fn(&Point) -> f64) -> f64 {
        (0..self.times.len().saturating_sub(1))
            .map(|i| f(&self.fast(i)) * (self.times[i + 1] - self.times[i]))
            .sum()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                let mut r = vec![self.times[i]];
                r.extend_from_slice(&self.states[i][..self.dim]);
                r.push(self.ys[i]);
                r
            })
            .collect()
    }

    pub fn write_binary(&self, path: &std::path::Path) -> Result<()> {
        let header = levy_io::RecordHeader {
            kind: 1,
            alpha: self.alpha,
            dim: self.dim as u32,
            delta: self.scheme.delta,
            horizon: self.horizon(),
            seed: self.seed,
            stream: self.stream,
            width: self.dim as u32 + 2,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        levy_io::write_records(&mut f, &header, &self.rows())
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let cols: Vec<&str> = match self.dim {
            1 => vec!["t", "x0", "Y"],
            _ => vec!["t", "x0", "x1", "Y"],
        };
        levy_io::write_csv(path, &cols, &self.rows())
    }
}

/// Checks by quadrature that the compensator drift
/// `∫_{δ<|y|≤1} σ(x,y) ν^α(dy)` vanishes, i.e. `∫_S σ(x,θ) dθ = 0`.
pub fn check_compensator(model: &CoefficientModel) -> Result<()> {
    let d = model.dim;
    let sphere = SphereNodes::new(d, 64);
    let grid = GridField::zeros(d, 16, 1);
    let radii = [0.1, 0.5, 1.0];
    for k in 0..grid.num_nodes() {
        let x = grid.node(k);
        for &r in &radii {
            let mut acc = [0.0; MAX_DIM];
            let mut scale = 0.0;
            for (th, w) in sphere.points.iter().zip(&sphere.weights) {
                let s = model.sigma(&x, &[r * th[0], r * th[1]]);
                for a in 0..d {
                    acc[a] += w * s[a];
                }
                scale += w * norm(&s, d);
            }
            if norm(&acc, d) > 1e-9 * scale.max(1e-300) {
                return Err(Error::AssumptionViolation {
                    assumption: "oddness".into(),
                    detail: format!(
                        "compensator drift ∫σ(x,y)ν(dy) over |y|={r} is {:?} at x={:?}",
                        &acc[..d],
                        &x[..d]
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Integrates the fast equation for one model and parameter choice.
#[derive(Clone, Debug)]
pub struct Integrator<'a> {
    model: &'a CoefficientModel,
    kind: PathKind,
    epsilon: f64,
    c_scale: f64,
    rate_e: f64,
    rate_g: f64,
    z_step: f64,
    delta: f64,
    policy: CompensationPolicy,
    y_cap: f64,
    sigma_zero: bool,
    b_zero: bool,
    c_zero: bool,
    rescaled: bool,
    warnings: Vec<String>,
}

impl<'a> Integrator<'a> {
    /// Integrator for `X^ε` with physical step `dt`.
    pub fn for_x_eps(model: &'a CoefficientModel, epsilon: f64, dt: f64, opts: &SimOptions) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        let ea = epsilon.powf(model.alpha);
        let rescaled = dt > ea;
        let z_step = (dt / ea).min(opts.max_z_step);
        let mut warnings = Vec::new();
        if rescaled {
            let msg = format!(
                "dt = {dt} exceeds ε^α = {ea:.4e}; singular drift integrated on the fast scale with step {z_step}"
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        Self::build(model, PathKind::Eps, epsilon, z_step, rescaled, warnings, opts)
    }

    /// Integrator for `X̃` (`ε = 0` selects the limit equation) with step `dt`.
    pub fn for_x_tilde(model: &'a CoefficientModel, epsilon: f64, dt: f64, opts: &SimOptions) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        if !(dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        Self::build(model, PathKind::Tilde, epsilon, dt, false, Vec::new(), opts)
    }

    fn build(
        model: &'a CoefficientModel,
        kind: PathKind,
        epsilon: f64,
        z_step: f64,
        rescaled: bool,
        warnings: Vec<String>,
        opts: &SimOptions,
    ) -> Result<Self> {
        model.check()?;
        check_compensator(model)?;
        let sigma_zero = model.sigma.is_zero();
        if opts.policy == CompensationPolicy::GaussianCorrection && !sigma_zero && !model.sigma.is_homogeneous() {
            return Err(Error::AssumptionViolation {
                assumption: "scaling".into(),
                detail: "Gaussian small-jump correction needs a homogeneous jump map".into(),
            });
        }
        let (c_scale, rate_e, rate_g) = if epsilon > 0.0 {
            (
                epsilon.powf(model.alpha - 1.0),
                epsilon,
                epsilon.powf(model.alpha),
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        Ok(Self {
            model,
            kind,
            epsilon,
            c_scale,
            rate_e,
            rate_g,
            z_step,
            delta: z_step.powf(1.0 / model.alpha),
            policy: opts.policy,
            y_cap: opts.y_cap,
            sigma_zero,
            b_zero: model.b.is_zero(),
            c_zero: model.c.is_zero(),
            rescaled,
            warnings,
        })
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn z_step(&self) -> f64 {
        self.z_step
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Physical time per unit of fast time.
    pub fn time_scale(&self) -> f64 {
        match self.kind {
            PathKind::Eps => self.epsilon.powf(self.model.alpha),
            PathKind::Tilde => 1.0,
        }
    }

    /// Physical length per unit of the fast variable.
    pub fn space_scale(&self) -> f64 {
        match self.kind {
            PathKind::Eps => self.epsilon,
            PathKind::Tilde => 1.0,
        }
    }

    pub fn scheme(&self) -> SchemeInfo {
        SchemeInfo {
            z_step: self.z_step,
            delta: self.delta,
            policy: self.policy,
            rescaled: self.rescaled,
            warnings: self.warnings.clone(),
        }
    }

    #[inline]
    fn drift(&self, z: &Point) -> Point {
        let mut v = if self.b_zero { [0.0; MAX_DIM] } else { self.model.b.eval(z) };
        if !self.c_zero && self.c_scale != 0.0 {
            let c = self.model.c.eval(z);
            for a in 0..self.model.dim {
                v[a] += self.c_scale * c[a];
            }
        }
        v
    }

    #[inline]
    fn y_rate(&self, z: &Point) -> f64 {
        let mut r = 0.0;
        if self.rate_e != 0.0 {
            r += self.rate_e * self.model.e.eval(z);
        }
        if self.rate_g != 0.0 {
            r += self.rate_g * self.model.g.eval(z);
        }
        r
    }

    fn small_jump_factor(&self, z: &Point, dt: f64) -> Mat {
        let d = self.model.dim;
        let alpha = self.model.alpha;
        let radial = dt * self.delta.powf(2.0 - alpha) / (2.0 - alpha);
        let mut cov = [[0.0; MAX_DIM]; MAX_DIM];
        if let Some(m) = self.model.sigma.linear_matrix(z) {
            let s = sphere_area(d) / d as f64;
            for a in 0..d {
                for b in 0..d {
                    cov[a][b] = radial * s * (0..d).map(|k| m[a][k] * m[b][k]).sum::<f64>();
                }
            }
        } else {
            let sphere = SphereNodes::new(d, 64);
            for (th, w) in sphere.points.iter().zip(&sphere.weights) {
                let s = self.model.sigma(z, th);
                for a in 0..d {
                    for b in 0..d {
                        cov[a][b] += radial * w * s[a] * s[b];
                    }
                }
            }
        }
        cholesky(&cov, d)
    }

    /// Integrates from `z0` over fast time `horizon`, reporting to `obs`.
    /// Returns the final fast state and potential.
    pub fn run<O: PathObserver + ?Sized>(
        &self,
        z0: Point,
        horizon: f64,
        rng: PathRng,
        obs: &mut O,
    ) -> Result<(Point, f64)> {
        let d = self.model.dim;
        let mut src = PoissonJumps::new(self.model.alpha, d, self.delta, rng);
        let mut next = if self.sigma_zero {
            JumpEvent {
                t: f64::INFINITY,
                y: [0.0; MAX_DIM],
            }
        } else {
            src.next_event()
        };
        let gaussian = self.policy == CompensationPolicy::GaussianCorrection && !self.sigma_zero;
        let mut z = z0;
        let mut y = 0.0;
        let mut tau = 0.0;
        obs.node(0.0, &z, y, true);
        let mut k: u64 = 0;
        while tau < horizon {
            let step_end = ((k + 1) as f64 * self.z_step).min(horizon);
            loop {
                let t_next = next.t.min(step_end);
                let ds = t_next - tau;
                if ds > 0.0 {
                    obs.segment(tau, t_next, &z, y);
                    let dr = self.drift(&z);
                    y += self.y_rate(&z) * ds;
                    // small jumps over the segment, scaled at its pre-jump state
                    let g = if gaussian {
                        correlated_normal(&self.small_jump_factor(&z, ds), d, src.rng_mut())
                    } else {
                        [0.0; MAX_DIM]
                    };
                    for a in 0..d {
                        z[a] += dr[a] * ds + g[a];
                    }
                }
                tau = t_next;
                if next.t <= step_end {
                    let dz = self.model.sigma(&z, &next.y);
                    obs.jump(tau, &z, &dz);
                    for a in 0..d {
                        z[a] += dz[a];
                    }
                    obs.node(tau, &z, y, false);
                    next = src.next_event();
                } else {
                    break;
                }
            }
            tau = step_end;
            if !z[..d].iter().all(|v| v.is_finite()) || !y.is_finite() {
                return Err(Error::PathAborted {
                    time: tau * self.time_scale(),
                    detail: format!("non-finite state {:?}, Y = {y}", &z[..d]),
                });
            }
            if y.abs() > self.y_cap {
                return Err(Error::PathAborted {
                    time: tau * self.time_scale(),
                    detail: format!("|Y| = {y:e} exceeds cap {}", self.y_cap),
                });
            }
            obs.node(tau, &z, y, true);
            k += 1;
        }
        Ok((z, y))
    }

    /// Records a full path from physical start `x0` over physical time `t`.
    pub fn sample(&self, x0: &Point, t: f64, seq: &SeedSequence, stream: u64) -> Result<PathSample> {
        if !(t > 0.0) {
            return Err(invalid("T must be positive"));
        }
        let s = self.space_scale();
        let z0 = [x0[0] / s, x0[1] / s];
        let mut rec = Recorder::new(self.time_scale(), s);
        self.run(z0, t / self.time_scale(), seq.stream(domain::PATHS, stream), &mut rec)?;
        Ok(PathSample {
            kind: self.kind,
            epsilon: self.epsilon,
            dim: self.model.dim,
            alpha: self.model.alpha,
            times: rec.times,
            states: rec.states,
            ys: rec.ys,
            jumps: rec.jumps,
            scheme: self.scheme(),
            seed: seq.master,
            stream,
        })
    }
}

/// One path of `X^ε` from `x0` over `[0, T]` with physical step `dt`.
pub fn simulate_x_eps(
    model: &CoefficientModel,
    epsilon: f64,
    x0: &Point,
    t: f64,
    dt: f64,
    opts: &SimOptions,
    seq: &SeedSequence,
    stream: u64,
) -> Result<PathSample> {
    Integrator::for_x_eps(model, epsilon, dt, opts)?.sample(x0, t, seq, stream)
}

/// One path of the torus process `X̃` (`ε = 0`: limit equation).
pub fn simulate_x_tilde(
    model: &CoefficientModel,
    epsilon: f64,
    z0: &Point,
    t: f64,
    dt: f64,
    opts: &SimOptions,
    seq: &SeedSequence,
    stream: u64,
) -> Result<PathSample> {
    Integrator::for_x_tilde(model, epsilon, dt, opts)?.sample(z0, t, seq, stream)
}

/// `X̂ = X + ε(b̂(X/ε) − b̂(x/ε))`, asserting `sup|X̂ − X| ≤ 2ε‖b̂‖∞`.
pub fn corrector_transform(path: &PathSample, b_hat: &GridField, epsilon: f64) -> Result<PathSample> {
    if b_hat.dim != path.dim || b_hat.components != path.dim {
        return Err(Error::GridMismatch(format!(
            "corrector has dim {} and {} components, path has dim {}",
            b_hat.dim, b_hat.components, path.dim
        )));
    }
    let d = path.dim;
    let z0 = crate::wrap_torus(&path.fast(0), d);
    let mut base = [0.0; MAX_DIM];
    for a in 0..d {
        base[a] = b_hat.interpolate(&z0, a);
    }
    let mut out = path.clone();
    let mut dev: f64 = 0.0;
    for i in 0..path.states.len() {
        let z = crate::wrap_torus(&path.fast(i), d);
        for a in 0..d {
            let shift = epsilon * (b_hat.interpolate(&z, a) - base[a]);
            out.states[i][a] += shift;
            dev = dev.max(shift.abs());
        }
    }
    let bound = 2.0 * epsilon * b_hat.sup_norm();
    if dev > bound * 1.01 + 1e-14 {
        return Err(Error::Residual {
            residual: dev,
            tolerance: bound,
        });
    }
    Ok(out)
}
