//! Small statistics toolbox used by the diagnostics.

use serde::{Deserialize, Serialize};

/// Running mean and variance (Welford), mergeable across batches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::default();
        xs.iter().for_each(|&x| s.push(x));
        s
    }
}

/// Monte Carlo or quadrature estimate with its standard error and a bias
/// bound (zero when no bias term is known).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    #[serde(default)]
    pub bias: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr, bias: 0.0 }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let s = RunningStats::from_slice(xs);
        Self::new(s.mean, s.stderr())
    }

    /// `|value − target| ≤ k·stderr + bias`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr + self.bias
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolated empirical quantile.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - f) + v[i + 1] * f
    } else {
        v[i]
    }
}

/// Ordinary least squares fit `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len();
    assert!(n == y.len() && n >= 2);
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n,
    }
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let t = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += t;
        if t.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Effective sample size via Geyer's initial positive sequence estimator.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(xs);
    let c0: f64 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let acov = |k: usize| -> f64 {
        (0..n - k).map(|i| (xs[i] - m) * (xs[i + k] - m)).sum::<f64>() / n as f64
    };
    let mut tau = -1.0;
    let mut k = 0;
    let max_lag = n / 2;
    while 2 * k + 1 < max_lag {
        let pair = (acov(2 * k) + acov(2 * k + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 1;
    }
    (n as f64 / tau.max(1.0)).min(n as f64)
}

/// `true` when each entry exceeds its predecessor by at most `k` combined
/// standard errors plus both bias bounds.
pub fn non_increasing_within(values: &[Estimate], k: f64) -> bool {
    values.windows(2).all(|w| {
        let slack = k * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt() + w[0].bias + w[1].bias;
        w[1].value <= w[0].value + slack
    })
}

/// Power-law tail fit `P(S > x) ∝ x^{−α}` for `x ≥ x_min`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub n_tail: usize,
    pub x_min: f64,
}

/// Least-squares slope of log survival against log size on `points`
/// log-spaced thresholds from `x_min` up to the size exceeded by
/// `min_exceed` samples.
pub fn tail_index(sizes: &[f64], x_min: f64, points: usize, min_exceed: usize) -> Option<TailFit> {
    let mut v: Vec<f64> = sizes.iter().copied().filter(|&s| s >= x_min).collect();
    let n = v.len();
    if n <= min_exceed || points < 3 {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let x_max = v[n - min_exceed];
    if !(x_max > x_min) {
        return None;
    }
    let (mut lx, mut ly) = (Vec::with_capacity(points), Vec::with_capacity(points));
    for i in 0..points {
        let x = x_min * (x_max / x_min).powf(i as f64 / (points - 1) as f64);
        let above = n - v.partition_point(|&s| s <= x);
        if above == 0 {
            continue;
        }
        lx.push(x.ln());
        ly.push((above as f64 / n as f64).ln());
    }
    if lx.len() < 3 {
        return None;
    }
    let fit = linear_fit(&lx, &ly);
    Some(TailFit {
        alpha_hat: -fit.slope,
        stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        n_tail: n,
        x_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a = RunningStats::from_slice(&xs[..40]);
        a.merge(&RunningStats::from_slice(&xs[40..]));
        let b = RunningStats::from_slice(&xs);
        assert!((a.mean - b.mean).abs() < 1e-14);
        assert!((a.variance() - b.variance()).abs() < 1e-13);
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope + 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert!(d < 1e-12 && p > 0.99);
        let b: Vec<f64> = a.iter().map(|v| v + 0.3).collect();
        assert!(ks_two_sample(&a, &b).1 < 1e-6);
    }

    #[test]
    fn ess_of_independent_sequence_is_large() {
        let xs: Vec<f64> = (0..2000u64)
            .map(|i| ((i.wrapping_mul(2654435761) % 1000) as f64) / 1000.0)
            .collect();
        assert!(effective_sample_size(&xs) > 500.0);
    }

    #[test]
    fn tail_index_of_pareto() {
        let n = 100_000;
        let sizes: Vec<f64> = (0..n).map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-1.0 / 1.5)).collect();
        let fit = tail_index(&sizes, 1.0, 30, 100).unwrap();
        assert!((fit.alpha_hat - 1.5).abs() < 0.01, "{fit:?}");
    }

    #[test]
    fn monotone_within_errors() {
        let e = |v| Estimate::new(v, 0.1);
        assert!(non_increasing_within(&[e(1.0), e(1.1), e(0.5)], 3.0));
        assert!(!non_increasing_within(&[e(1.0), e(2.0)], 3.0));
    }
}
