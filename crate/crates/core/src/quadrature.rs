//! Gauss–Legendre rules, adaptive integration, unit-sphere nodes and the
//! stable symbol constant.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A Gauss–Legendre rule mapped onto arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterate `(x, w)` pairs of the rule on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Adaptive bisection with a 10/20-point Gauss–Legendre error estimate.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let lo = GaussRule::new(10);
    let hi = GaussRule::new(20);
    fn rec(f: &dyn Fn(f64) -> f64, lo: &GaussRule, hi: &GaussRule, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = lo.integrate(a, b, f);
        let h = hi.integrate(a, b, f);
        if (c - h).abs() <= tol.max(1e-14 * h.abs()) || depth == 0 {
            return h;
        }
        let m = 0.5 * (a + b);
        rec(f, lo, hi, a, m, 0.5 * tol, depth - 1) + rec(f, lo, hi, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, &lo, &hi, a, b, tol, 40)
}

/// `C(α) = ∫₀^∞ (1 − cos u) u^{−1−α} du`, computed once per α by quadrature.
///
/// The one-dimensional standard stable symbol is then `2 C(α) |ξ|^α`.
pub fn stable_symbol_constant(alpha: f64) -> f64 {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(u64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    let key = alpha.to_bits();
    if let Some(&(_, v)) = cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
        return v;
    }
    let v = symbol_constant_uncached(alpha);
    cache.lock().unwrap().push((key, v));
    v
}

fn symbol_constant_uncached(alpha: f64) -> f64 {
    let p = 1.0 + alpha;
    // [0, 1]: subtract the quadratic Taylor term, integrate it exactly
    let near = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let taylor = if u < 0.1 {
            let u2 = u * u;
            u2 * u2 * (-1.0 / 24.0 + u2 * (1.0 / 720.0 + u2 * (-1.0 / 40320.0 + u2 / 3628800.0)))
        } else {
            1.0 - u.cos() - 0.5 * u * u
        };
        taylor * u.powf(-p)
    };
    let head = adaptive(&near, 0.0, 1.0, 1e-13) + 0.5 / (2.0 - alpha);
    // [1, ∞): ∫ u^{-p} = 1/α minus the oscillatory cosine part
    let n_periods = 400usize;
    let upper = 2.0 * PI * n_periods as f64;
    let rule = GaussRule::new(16);
    let mut osc = rule.integrate(1.0, 2.0 * PI, |u| u.cos() * u.powf(-p));
    for k in 1..n_periods {
        let a = 2.0 * PI * k as f64;
        osc += rule.integrate(a, a + PI, |u| u.cos() * u.powf(-p));
        osc += rule.integrate(a + PI, a + 2.0 * PI, |u| u.cos() * u.powf(-p));
    }
    // integration by parts at a zero of sin: ∫_U^∞ cos u u^{-p} ≈ p U^{-p-1} - p(p+1)(p+2) U^{-p-3}
    osc += p * upper.powf(-p - 1.0) - p * (p + 1.0) * (p + 2.0) * upper.powf(-p - 3.0);
    head + 1.0 / alpha - osc
}

/// Quadrature nodes on the unit sphere `S^{d-1}` for `d ∈ {1, 2}`.
///
/// In one dimension the nodes are `±1` with unit weights. In two dimensions
/// they are `m` equally spaced angles `2πj/m` with weights `2π/m`; `m` must be
/// even so that antipodal nodes come in pairs.
#[derive(Clone, Debug)]
pub struct SphereNodes {
    pub dim: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl SphereNodes {
    pub fn new(dim: usize, m: usize) -> Self {
        match dim {
            1 => Self {
                dim,
                points: vec![[1.0, 0.0], [-1.0, 0.0]],
                weights: vec![1.0, 1.0],
            },
            2 => {
                let m = m.max(2) + m % 2;
                let points = (0..m)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / m as f64;
                        [a.cos(), a.sin()]
                    })
                    .collect();
                Self {
                    dim,
                    points,
                    weights: vec![2.0 * PI / m as f64; m],
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the antipodal node.
    pub fn antipode(&self, j: usize) -> usize {
        let m = self.len();
        (j + m / 2) % m
    }

    /// Surface measure `λ(S^{d-1})`.
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `λ(S^{d-1})` for `d ∈ {1, 2}`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Symbol constant of the standard isotropic stable generator in dimension
/// `d`: `ψ(ξ) = c_d |ξ|^α` with `c_d = C(α) ∫_{S^{d-1}} |θ₁|^α dθ`.
pub fn isotropic_symbol_constant(alpha: f64, dim: usize) -> f64 {
    let c = stable_symbol_constant(alpha);
    match dim {
        1 => 2.0 * c,
        2 => {
            let f = |phi: f64| phi.cos().abs().powf(alpha);
            4.0 * c * adaptive(&f, 0.0, 0.5 * PI, 1e-13)
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let r = GaussRule::new(5);
        let v = r.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
        let (_, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10);
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn sphere_antipodes() {
        let s = SphereNodes::new(2, 16);
        for j in 0..s.len() {
            let a = s.points[j];
            let b = s.points[s.antipode(j)];
            assert!((a[0] + b[0]).abs() < 1e-14 && (a[1] + b[1]).abs() < 1e-14);
        }
        assert!((s.area() - 2.0 * PI).abs() < 1e-13);
    }
}
