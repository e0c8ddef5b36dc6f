//! Invariant measures of the torus process, ergodic averages and mixing.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridField;
use crate::model::CoefficientModel;
use crate::quadrature::GaussRule;
use crate::rng::{domain, SeedSequence};
use crate::sde::{Integrator, PathObserver, PathSample, SimOptions};
use crate::stats::{effective_sample_size, linear_fit};
use crate::{wrap_torus, Point, MAX_DIM};

/// Binned probability measure on `T^d` with `bins` cells per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub dim: usize,
    pub bins: usize,
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
    pub epsilon: f64,
    /// Burn-in in fast time.
    pub burn_in: f64,
    pub ess: f64,
    pub n_chains: usize,
    pub between_chain_tv: f64,
    pub tv_threshold: f64,
    pub converged: bool,
}

fn check_bins(dim: usize, bins: usize) -> Result<()> {
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!("dim must be 1 or 2, got {dim}")));
    }
    if !bins.is_power_of_two() || bins < 2 {
        return Err(invalid(format!("bin count must be a power of two ≥ 2, got {bins}")));
    }
    Ok(())
}

impl EmpiricalMeasure {
    pub fn from_counts(dim: usize, bins: usize, counts: Vec<u64>) -> Result<Self> {
        check_bins(dim, bins)?;
        if counts.len() != bins.pow(dim as u32) {
            return Err(invalid("count vector has the wrong length"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(invalid("empty histogram"));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            dim,
            bins,
            probabilities,
            counts,
            n_samples: n,
            epsilon: 0.0,
            burn_in: 0.0,
            ess: n as f64,
            n_chains: 1,
            between_chain_tv: 0.0,
            tv_threshold: f64::INFINITY,
            converged: true,
        })
    }

    /// Exact measure with the given bin probabilities (no sampling error).
    pub fn from_probabilities(dim: usize, bins: usize, probabilities: Vec<f64>) -> Result<Self> {
        check_bins(dim, bins)?;
        if probabilities.len() != bins.pow(dim as u32) || probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("probabilities must be nonnegative with one entry per bin"));
        }
        let s: f64 = probabilities.iter().sum();
        let probabilities: Vec<f64> = probabilities.iter().map(|p| p / s).collect();
        Ok(Self {
            dim,
            bins,
            counts: vec![0; probabilities.len()],
            probabilities,
            n_samples: 0,
            epsilon: 0.0,
            burn_in: 0.0,
            ess: f64::INFINITY,
            n_chains: 0,
            between_chain_tv: 0.0,
            tv_threshold: f64::INFINITY,
            converged: true,
        })
    }

    pub fn uniform(dim: usize, bins: usize) -> Result<Self> {
        let m = bins.pow(dim as u32);
        Self::from_probabilities(dim, bins, vec![1.0; m])
    }

    /// Measure with density proportional to `w` (sampled by Gauss quadrature per bin).
    pub fn from_density(dim: usize, bins: usize, w: impl Fn(&Point) -> f64) -> Result<Self> {
        check_bins(dim, bins)?;
        let u = Self::uniform(dim, bins)?;
        let p = (0..u.num_bins()).map(|j| u.bin_average(j, &w)).collect();
        Self::from_probabilities(dim, bins, p)
    }

    pub fn num_bins(&self) -> usize {
        self.probabilities.len()
    }

    pub fn bin_of(&self, x: &Point) -> usize {
        let z = wrap_torus(x, self.dim);
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            let i = ((z[a] * self.bins as f64) as usize).min(self.bins - 1);
            idx += i * stride;
            stride *= self.bins;
        }
        idx
    }

    /// Lower-left corner of bin `j`.
    pub fn bin_corner(&self, j: usize) -> Point {
        let mut x = [0.0; MAX_DIM];
        let mut r = j;
        for xa in x.iter_mut().take(self.dim) {
            *xa = (r % self.bins) as f64 / self.bins as f64;
            r /= self.bins;
        }
        x
    }

    pub fn bin_center(&self, j: usize) -> Point {
        let mut x = self.bin_corner(j);
        for xa in x.iter_mut().take(self.dim) {
            *xa += 0.5 / self.bins as f64;
        }
        x
    }

    /// Average of `f` over bin `j` (3-point Gauss rule per axis).
    pub fn bin_average(&self, j: usize, f: &dyn Fn(&Point) -> f64) -> f64 {
        self.bin_average_vec(j, 1, &|x| vec![f(x)])[0]
    }

    /// Componentwise bin average of a vector-valued `f` with `len` entries.
    pub fn bin_average_vec(&self, j: usize, len: usize, f: &dyn Fn(&Point) -> Vec<f64>) -> Vec<f64> {
        let rule = GaussRule::new(3);
        let h = 1.0 / self.bins as f64;
        let c = self.bin_corner(j);
        let pts: Vec<(f64, f64)> = rule.on(0.0, h).collect();
        let mut acc = vec![0.0; len];
        let mut add = |x: &Point, w: f64| {
            for (a, v) in acc.iter_mut().zip(f(x)) {
                *a += w * v;
            }
        };
        if self.dim == 1 {
            for &(x, w) in &pts {
                add(&[c[0] + x, 0.0], w / h);
            }
        } else {
            for &(x, wx) in &pts {
                for &(y, wy) in &pts {
                    add(&[c[0] + x, c[1] + y], wx * wy / (h * h));
                }
            }
        }
        acc
    }

    /// `∫ f dμ̂` with piecewise-constant density, plus a binomial standard error
    /// based on the effective sample size.
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> (f64, f64) {
        let vals: Vec<f64> = (0..self.num_bins()).map(|j| self.bin_average(j, &f)).collect();
        self.integrate_binned(&vals)
    }

    /// As [`integrate`](Self::integrate) for precomputed bin averages.
    pub fn integrate_binned(&self, vals: &[f64]) -> (f64, f64) {
        let m: f64 = vals.iter().zip(&self.probabilities).map(|(v, p)| v * p).sum();
        let m2: f64 = vals.iter().zip(&self.probabilities).map(|(v, p)| v * v * p).sum();
        let se = if self.ess.is_finite() && self.ess > 0.0 {
            ((m2 - m * m).max(0.0) / self.ess).sqrt()
        } else {
            0.0
        };
        (m, se)
    }

    /// Bin averages of a grid field component (nodes falling inside each bin;
    /// interpolation when bins are finer than the grid).
    pub fn bin_averages_of(&self, field: &GridField, c: usize) -> Vec<f64> {
        if field.n >= self.bins {
            let mut sums = vec![0.0; self.num_bins()];
            let mut counts = vec![0usize; self.num_bins()];
            for k in 0..field.num_nodes() {
                let x = field.node(k);
                let mut xc = x;
                for a in 0..self.dim {
                    xc[a] += 0.5 / field.n as f64;
                }
                let j = self.bin_of(&xc);
                sums[j] += field.get(k, c);
                counts[j] += 1;
            }
            let mut out: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n.max(1) as f64).collect();
            // nodes are cell-centred only approximately; fall back to interpolation for empty bins
            for j in 0..out.len() {
                if counts[j] == 0 {
                    out[j] = self.bin_average(j, &|x| field.interpolate(x, c));
                }
            }
            out
        } else {
            (0..self.num_bins())
                .map(|j| self.bin_average(j, &|x| field.interpolate(x, c)))
                .collect()
        }
    }

    /// Density (w.r.t. Lebesgue) at `x`.
    pub fn density_at(&self, x: &Point) -> f64 {
        self.probabilities[self.bin_of(x)] * (self.bins as f64).powi(self.dim as i32)
    }

    /// Draws a point from the piecewise-constant density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut j = self.num_bins() - 1;
        for (i, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                j = i;
                break;
            }
        }
        let mut x = self.bin_corner(j);
        for xa in x.iter_mut().take(self.dim) {
            *xa += rng.random::<f64>() / self.bins as f64;
        }
        x
    }

    /// Expected TV distance between this measure and an independent
    /// histogram of `n` samples drawn from it.
    pub fn tv_noise(&self, n: f64) -> f64 {
        let inv = 1.0 / n + if self.ess.is_finite() { 1.0 / self.ess } else { 0.0 };
        0.5 * (2.0 / PI).sqrt()
            * self
                .probabilities
                .iter()
                .map(|&p| (p * (1.0 - p) * inv).sqrt())
                .sum::<f64>()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        if self.dim == 1 {
            writeln!(f, "x0,probability")?;
        } else {
            writeln!(f, "x0,x1,probability")?;
        }
        for j in 0..self.num_bins() {
            let c = self.bin_center(j);
            let coords: Vec<String> = c[..self.dim].iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(f, "{},{:.17e}", coords.join(","), self.probabilities[j])?;
        }
        Ok(())
    }
}

/// Sampling controls for [`estimate_invariant_measure`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantOptions {
    pub n_chains: usize,
    /// Integrator step in fast time (reduced so that `thin` is a multiple).
    pub dt: f64,
    /// Chains disagreeing by more than this multiple of the noise level flag
    /// the result as unconverged.
    pub tv_factor: f64,
    pub sim: SimOptions,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        Self {
            n_chains: 8,
            dt: 0.005,
            tv_factor: 2.0,
            sim: SimOptions::default(),
        }
    }
}

struct ChainObserver {
    bins: usize,
    dim: usize,
    thin_every: u64,
    burn_in: f64,
    grid_count: u64,
    counts: Vec<u64>,
    series: Vec<f64>,
    target: usize,
}

impl PathObserver for ChainObserver {
    fn node(&mut self, tau: f64, z: &Point, _y: f64, grid: bool) {
        if !grid || tau < self.burn_in || self.series.len() >= self.target {
            return;
        }
        self.grid_count += 1;
        if self.grid_count % self.thin_every != 0 {
            return;
        }
        let w = wrap_torus(z, self.dim);
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            idx += ((w[a] * self.bins as f64) as usize).min(self.bins - 1) * stride;
            stride *= self.bins;
        }
        self.counts[idx] += 1;
        self.series.push((2.0 * PI * w[0]).cos());
    }
}

/// Histogram of thinned post-burn-in samples of `X̃` (`ε = 0`: limit process),
/// merged over independent chains. `burn_in` and `thin` are in fast time;
/// `None` burn-in uses 10% of the chain length.
#[allow(clippy::too_many_arguments)]
pub fn estimate_invariant_measure(
    model: &CoefficientModel,
    epsilon: f64,
    n_samples: usize,
    burn_in: Option<f64>,
    thin: f64,
    bins: usize,
    seq: &SeedSequence,
    opts: &InvariantOptions,
) -> Result<EmpiricalMeasure> {
    check_bins(model.dim, bins)?;
    if n_samples == 0 || !(thin > 0.0) || opts.n_chains == 0 {
        return Err(invalid("need n_samples > 0, thin > 0 and at least one chain"));
    }
    let sub = (thin / opts.dt).ceil().max(1.0);
    let step = thin / sub;
    // chains only bin the state, so the potential integral is never capped
    let sim = SimOptions { y_cap: f64::INFINITY, ..opts.sim };
    let integ = Integrator::for_x_tilde(model, epsilon, step, &sim)?;
    let n_chains = opts.n_chains.min(n_samples);
    let per_chain: Vec<usize> = (0..n_chains)
        .map(|i| n_samples / n_chains + usize::from(i < n_samples % n_chains))
        .collect();
    let burn = burn_in.unwrap_or(0.1 * per_chain[0] as f64 * thin);
    let d = model.dim;
    let results: Vec<Result<ChainObserver>> = (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let target = per_chain[i];
            let mut obs = ChainObserver {
                bins,
                dim: d,
                thin_every: sub as u64,
                burn_in: burn,
                grid_count: 0,
                counts: vec![0; bins.pow(d as u32)],
                series: Vec::with_capacity(target),
                target,
            };
            let s = (i as f64 + 0.5) / n_chains as f64;
            let z0 = [s, if d == 2 { 1.0 - s } else { 0.0 }];
            let horizon = burn + (target as f64 + 0.5) * thin;
            integ.run(z0, horizon, seq.stream(domain::INVARIANT, i as u64), &mut obs)?;
            Ok(obs)
        })
        .collect();
    let chains: Vec<ChainObserver> = results.into_iter().collect::<Result<_>>()?;
    let mut counts = vec![0u64; bins.pow(d as u32)];
    let mut ess = 0.0;
    for c in &chains {
        for (a, b) in counts.iter_mut().zip(&c.counts) {
            *a += b;
        }
        ess += effective_sample_size(&c.series);
    }
    let mut mu = EmpiricalMeasure::from_counts(d, bins, counts)?;
    mu.epsilon = epsilon;
    mu.burn_in = burn;
    mu.ess = ess.max(1.0);
    mu.n_chains = n_chains;
    if n_chains > 1 {
        let mut worst: f64 = 0.0;
        let mut thresh: f64 = 0.0;
        for c in &chains {
            let chain = EmpiricalMeasure::from_counts(d, bins, c.counts.clone())?;
            let tv = compare_measures(&chain, &mu)?.tv;
            let ess_c = effective_sample_size(&c.series).max(1.0);
            let noise = 0.5
                * (2.0 / PI).sqrt()
                * mu.probabilities
                    .iter()
                    .map(|&p| (p * (1.0 - p) / ess_c).sqrt())
                    .sum::<f64>();
            worst = worst.max(tv);
            thresh = thresh.max(opts.tv_factor * noise);
        }
        mu.between_chain_tv = worst;
        mu.tv_threshold = thresh;
        mu.converged = worst <= thresh;
        if !mu.converged {
            log::warn!("invariant measure unconverged: between-chain TV {worst:.4} > {thresh:.4}");
        }
    }
    Ok(mu)
}

/// Distances between two binned measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDistance {
    pub tv: f64,
    pub w1: f64,
}

/// Circle 1-Wasserstein distance between two binned 1D measures.
fn circle_w1(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len();
    let h = 1.0 / n as f64;
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    for j in 0..n {
        acc += p[j] - q[j];
        cum.push(acc);
    }
    let mut sorted = cum.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let med = sorted[n / 2];
    cum.iter().map(|c| (c - med).abs()).sum::<f64>() * h
}

/// Total variation (half `L¹`) and binned torus `W₁`; in two dimensions
/// `W₁` is the larger of the two marginal circle distances.
pub fn compare_measures(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<MeasureDistance> {
    if a.dim != b.dim || a.bins != b.bins {
        return Err(Error::GridMismatch(format!(
            "measures on grids d={} bins={} and d={} bins={}",
            a.dim, a.bins, b.dim, b.bins
        )));
    }
    let tv = 0.5
        * a.probabilities
            .iter()
            .zip(&b.probabilities)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>();
    let w1 = if a.dim == 1 {
        circle_w1(&a.probabilities, &b.probabilities)
    } else {
        let n = a.bins;
        let marg = |m: &EmpiricalMeasure, axis: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (j, p) in m.probabilities.iter().enumerate() {
                let i = if axis == 0 { j % n } else { j / n };
                out[i] += p;
            }
            out
        };
        circle_w1(&marg(a, 0), &marg(b, 0)).max(circle_w1(&marg(a, 1), &marg(b, 1)))
    };
    Ok(MeasureDistance { tv, w1 })
}

/// `(1/t) ∫₀^t f(X_s/ε) ds` along a path, `f` given on a grid.
pub fn ergodic_average(f: &GridField, path: &PathSample) -> f64 {
    let d = path.dim;
    ergodic_average_fn(&|z: &Point| f.interpolate(&wrap_torus(z, d), 0), path)
}

pub fn ergodic_average_fn(f: &dyn Fn(&Point) -> f64, path: &PathSample) -> f64 {
    path.integrate_fast(f) / path.horizon()
}

/// `|time average − ∫ f dμ̂|`.
pub fn ergodic_error(f: &GridField, path: &PathSample, mu: &EmpiricalMeasure) -> f64 {
    let (m, _) = mu.integrate(|x| f.interpolate(x, 0));
    (ergodic_average(f, path) - m).abs()
}

/// Controls for [`mixing_diagnostic`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingOptions {
    /// Sampling interval (also the integrator step) in fast time.
    pub spacing: f64,
    /// Trajectory length in fast time after burn-in.
    pub length: f64,
    pub burn_in: f64,
    pub max_lag: usize,
    /// Lags are used while the autocorrelation exceeds this level.
    pub min_correlation: f64,
    pub sim: SimOptions,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            spacing: 0.002,
            length: 2000.0,
            burn_in: 1.0,
            max_lag: 200,
            min_correlation: 0.05,
            sim: SimOptions::default(),
        }
    }
}

/// Exponential fit `|Cov(f(X̃₀), f(X̃_τ))| ≈ ĉ e^{−ρ̂τ}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingFit {
    pub rho_hat: f64,
    pub rho_stderr: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub lags_used: usize,
    pub autocovariance: Vec<f64>,
    pub spacing: f64,
    pub degenerate: bool,
    pub failed: bool,
}

struct SeriesObserver<'f> {
    f: &'f dyn Fn(&Point) -> f64,
    dim: usize,
    burn_in: f64,
    out: Vec<f64>,
}

impl PathObserver for SeriesObserver<'_> {
    fn node(&mut self, tau: f64, z: &Point, _y: f64, grid: bool) {
        if grid && tau >= self.burn_in {
            self.out.push((self.f)(&wrap_torus(z, self.dim)));
        }
    }
}

pub fn mixing_diagnostic(
    model: &CoefficientModel,
    epsilon: f64,
    f: &dyn Fn(&Point) -> f64,
    seq: &SeedSequence,
    opts: &MixingOptions,
) -> Result<MixingFit> {
    let sim = SimOptions { y_cap: f64::INFINITY, ..opts.sim };
    let integ = Integrator::for_x_tilde(model, epsilon, opts.spacing, &sim)?;
    let mut obs = SeriesObserver {
        f,
        dim: model.dim,
        burn_in: opts.burn_in,
        out: Vec::new(),
    };
    integ.run([0.0; MAX_DIM], opts.burn_in + opts.length, seq.stream(domain::MIXING, 0), &mut obs)?;
    let xs = obs.out;
    let n = xs.len();
    let m = xs.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = xs.iter().map(|v| v - m).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut fit = MixingFit {
        rho_hat: f64::NAN,
        rho_stderr: f64::NAN,
        c_hat: f64::NAN,
        r_squared: f64::NAN,
        lags_used: 0,
        autocovariance: vec![c0],
        spacing: opts.spacing,
        degenerate: false,
        failed: false,
    };
    if c0 < 1e-14 {
        fit.degenerate = true;
        return Ok(fit);
    }
    let max_lag = opts.max_lag.min(n / 4);
    for lag in 1..=max_lag {
        let v = (0..n - lag).map(|i| c[i] * c[i + lag]).sum::<f64>() / n as f64;
        fit.autocovariance.push(v);
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (lag, &v) in fit.autocovariance.iter().enumerate().skip(1) {
        if v <= opts.min_correlation * c0 {
            break;
        }
        lx.push(lag as f64 * opts.spacing);
        ly.push(v.ln());
    }
    if lx.len() < 3 {
        fit.failed = true;
        return Ok(fit);
    }
    let lf = linear_fit(&lx, &ly);
    fit.rho_hat = -lf.slope;
    fit.rho_stderr = lf.slope_stderr;
    fit.c_hat = lf.intercept.exp();
    fit.r_squared = lf.r_squared;
    fit.lags_used = lx.len();
    fit.failed = !(fit.rho_hat > 0.0);
    Ok(fit)
}

/// Result of the push-forward invariance test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPointTest {
    pub tv: f64,
    pub envelope: f64,
    pub passed: bool,
}

/// Pushes `n` samples of `μ̂` through the torus dynamics for fast time `h`
/// and compares the resulting histogram with `μ̂`.
pub fn invariance_fixed_point(
    model: &CoefficientModel,
    mu: &EmpiricalMeasure,
    n: usize,
    h: f64,
    dt: f64,
    seq: &SeedSequence,
) -> Result<FixedPointTest> {
    let integ = Integrator::for_x_tilde(model, mu.epsilon, dt, &SimOptions::default())?;
    let ends: Vec<Result<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seq.stream(domain::PUSHFORWARD, i as u64);
            let x = mu.sample(&mut rng);
            let (z, _) = integ.run(x, h, rng, &mut ())?;
            Ok(mu.bin_of(&z))
        })
        .collect();
    let mut counts = vec![0u64; mu.num_bins()];
    for e in ends {
        counts[e?] += 1;
    }
    let pushed = EmpiricalMeasure::from_counts(mu.dim, mu.bins, counts)?;
    let tv = compare_measures(&pushed, mu)?.tv;
    let envelope = mu.tv_noise(n as f64);
    Ok(FixedPointTest {
        tv,
        envelope,
        passed: tv <= 1.5 * envelope,
    })
}
