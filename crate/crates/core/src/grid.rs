//! Uniform periodic grids on the torus: field storage, off-grid cubic
//! interpolation and spectral differentiation.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Point, MAX_DIM};

/// Values of a scalar or vector field on the uniform grid `{i/n}^d`.
///
/// Node `(i₀, i₁)` has flat index `i₀ + n·i₁`; component `c` of node `k`
/// lives at `values[k * components + c]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub dim: usize,
    pub n: usize,
    pub components: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(dim: usize, n: usize, components: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim) && n >= 4 && components >= 1);
        Self {
            dim,
            n,
            components,
            values: vec![0.0; n.pow(dim as u32) * components],
        }
    }

    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&Point) -> f64) -> Self {
        let mut g = Self::zeros(dim, n, 1);
        for k in 0..g.num_nodes() {
            g.values[k] = f(&g.node(k));
        }
        g
    }

    pub fn from_vec_fn(dim: usize, n: usize, components: usize, f: impl Fn(&Point, &mut [f64])) -> Self {
        let mut g = Self::zeros(dim, n, components);
        for k in 0..g.num_nodes() {
            let x = g.node(k);
            f(&x, &mut g.values[k * components..(k + 1) * components]);
        }
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinates of node `k`.
    pub fn node(&self, k: usize) -> Point {
        let mut x = [0.0; MAX_DIM];
        let mut r = k;
        for xi in x.iter_mut().take(self.dim) {
            *xi = (r % self.n) as f64 / self.n as f64;
            r /= self.n;
        }
        x
    }

    pub fn get(&self, k: usize, c: usize) -> f64 {
        self.values[k * self.components + c]
    }

    /// Scalar field holding component `c`.
    pub fn component(&self, c: usize) -> GridField {
        let mut g = GridField::zeros(self.dim, self.n, 1);
        for k in 0..self.num_nodes() {
            g.values[k] = self.get(k, c);
        }
        g
    }

    pub fn same_grid(&self, other: &GridField) -> Result<()> {
        if self.dim != other.dim || self.n != other.n {
            return Err(Error::GridMismatch(format!(
                "d={} n={} vs d={} n={}",
                self.dim, self.n, other.dim, other.n
            )));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid average of component `c` (the Lebesgue integral for trig data).
    pub fn mean(&self, c: usize) -> f64 {
        (0..self.num_nodes()).map(|k| self.get(k, c)).sum::<f64>() / self.num_nodes() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Periodic cubic Lagrange interpolation of component `c` at `x`.
    pub fn interpolate(&self, x: &Point, c: usize) -> f64 {
        let n = self.n as i64;
        let mut base = [0i64; MAX_DIM];
        let mut w = [[0.0; 4]; MAX_DIM];
        for a in 0..self.dim {
            let s = x[a] * self.n as f64;
            let f = s.floor();
            base[a] = f as i64;
            w[a] = cubic_weights(s - f);
        }
        let idx = |i: i64| -> usize { i.rem_euclid(n) as usize };
        match self.dim {
            1 => (0..4)
                .map(|p| w[0][p] * self.get(idx(base[0] + p as i64 - 1), c))
                .sum(),
            _ => {
                let mut acc = 0.0;
                for q in 0..4 {
                    let row = idx(base[1] + q as i64 - 1) * self.n;
                    let mut inner = 0.0;
                    for p in 0..4 {
                        inner += w[0][p] * self.get(row + idx(base[0] + p as i64 - 1), c);
                    }
                    acc += w[1][q] * inner;
                }
                acc
            }
        }
    }

    /// Periodic (bi)linear interpolation of component `c` at `x`.
    pub fn interpolate_linear(&self, x: &Point, c: usize) -> f64 {
        let n = self.n as i64;
        let idx = |i: i64| -> usize { i.rem_euclid(n) as usize };
        let mut base = [0i64; MAX_DIM];
        let mut f = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let s = x[a] * self.n as f64;
            let fl = s.floor();
            base[a] = fl as i64;
            f[a] = s - fl;
        }
        match self.dim {
            1 => {
                let v0 = self.get(idx(base[0]), c);
                let v1 = self.get(idx(base[0] + 1), c);
                v0 + f[0] * (v1 - v0)
            }
            _ => {
                let (i0, i1) = (idx(base[0]), idx(base[0] + 1));
                let (r0, r1) = (idx(base[1]) * self.n, idx(base[1] + 1) * self.n);
                let lo = self.get(r0 + i0, c) * (1.0 - f[0]) + self.get(r0 + i1, c) * f[0];
                let hi = self.get(r1 + i0, c) * (1.0 - f[0]) + self.get(r1 + i1, c) * f[0];
                lo + f[1] * (hi - lo)
            }
        }
    }

    /// Spectral gradient; output has `components * dim` components ordered
    /// `(component, axis)`.
    pub fn gradient(&self) -> GridField {
        let mut out = GridField::zeros(self.dim, self.n, self.components * self.dim);
        for c in 0..self.components {
            let comp = self.component(c);
            for a in 0..self.dim {
                let d = spectral_apply(&comp.values, self.dim, self.n, |k| {
                    if is_nyquist(k[a], self.n) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, 2.0 * PI * k[a] as f64)
                    }
                });
                for (kk, v) in d.iter().enumerate() {
                    out.values[kk * out.components + c * self.dim + a] = *v;
                }
            }
        }
        out
    }

    /// Spectral Hessian of a scalar field; `dim * dim` components, row-major.
    pub fn hessian(&self) -> GridField {
        assert_eq!(self.components, 1);
        let d = self.dim;
        let mut out = GridField::zeros(d, self.n, d * d);
        for a in 0..d {
            for b in a..d {
                let h = spectral_apply(&self.values, d, self.n, |k| {
                    if a != b && (is_nyquist(k[a], self.n) || is_nyquist(k[b], self.n)) {
                        return Complex64::new(0.0, 0.0);
                    }
                    Complex64::new(-(2.0 * PI).powi(2) * (k[a] * k[b]) as f64, 0.0)
                });
                for (kk, v) in h.iter().enumerate() {
                    out.values[kk * d * d + a * d + b] = *v;
                    out.values[kk * d * d + b * d + a] = *v;
                }
            }
        }
        out
    }

    /// Writes `x₀[,x₁],value...` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let axes = ["x0", "x1"];
        let mut header: Vec<String> = axes[..self.dim].iter().map(|s| s.to_string()).collect();
        for c in 0..self.components {
            header.push(format!("v{c}"));
        }
        writeln!(f, "{}", header.join(","))?;
        for k in 0..self.num_nodes() {
            let x = self.node(k);
            let mut row: Vec<String> = x[..self.dim].iter().map(|v| format!("{v:.17e}")).collect();
            for c in 0..self.components {
                row.push(format!("{:.17e}", self.get(k, c)));
            }
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Weights of the 4-point Lagrange interpolant through nodes −1, 0, 1, 2 at
/// local coordinate `t ∈ [0, 1)`.
pub fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn is_nyquist(k: i64, n: usize) -> bool {
    n % 2 == 0 && k.unsigned_abs() as usize == n / 2
}

/// Signed wavenumber of FFT bin `j`.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Applies a Fourier multiplier to real grid data of dimension 1 or 2.
pub fn spectral_apply(values: &[f64], dim: usize, n: usize, mult: impl Fn([i64; 2]) -> Complex64) -> Vec<f64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, dim, n, false);
    for (idx, z) in buf.iter_mut().enumerate() {
        let k0 = wavenumber(idx % n, n);
        let k1 = if dim == 2 { wavenumber(idx / n, n) } else { 0 };
        *z *= mult([k0, k1]);
    }
    fft_nd(&mut buf, dim, n, true);
    let scale = 1.0 / values.len() as f64;
    buf.iter().map(|z| z.re * scale).collect()
}

/// Unnormalised forward or inverse FFT over all axes.
pub fn fft_nd(buf: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // axis 0 is contiguous
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    if dim == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for i0 in 0..n {
            for i1 in 0..n {
                col[i1] = buf[i0 + n * i1];
            }
            fft.process(&mut col);
            for i1 in 0..n {
                buf[i0 + n * i1] = col[i1];
            }
        }
    }
}

/// First column of a circulant spectral derivative matrix along axis 0 of a
/// 1D grid: `(D u)_i = Σ_j g[(i − j) mod n] u_j`.
pub fn spectral_stencil_1d(n: usize, order: u32) -> Vec<f64> {
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    spectral_apply(&e0, 1, n, |k| {
        let ik = Complex64::new(0.0, 2.0 * PI * k[0] as f64);
        if order % 2 == 1 && is_nyquist(k[0], n) {
            Complex64::new(0.0, 0.0)
        } else {
            ik.powu(order)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_derivatives_of_trig_polynomials_are_exact() {
        let g = GridField::from_fn(1, 32, |x| (2.0 * PI * 3.0 * x[0]).sin());
        let d = g.gradient();
        let h = g.hessian();
        for k in 0..32 {
            let x = g.node(k)[0];
            let w = 2.0 * PI * 3.0;
            assert!((d.get(k, 0) - w * (w * x).cos()).abs() < 1e-10);
            assert!((h.get(k, 0) + w * w * (w * x).sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn mixed_partials_in_two_dimensions() {
        let g = GridField::from_fn(2, 16, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let h = g.hessian();
        let w = 2.0 * PI;
        for k in 0..g.num_nodes() {
            let x = g.node(k);
            let exact = -w * w * (w * x[0]).cos() * (w * x[1]).sin();
            assert!((h.get(k, 1) - exact).abs() < 1e-9);
            assert!((h.get(k, 2) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics_locally() {
        let w = cubic_weights(0.3);
        let f = |s: f64| 1.0 + s - 2.0 * s * s + 0.5 * s * s * s;
        let v: f64 = (0..4).map(|p| w[p] * f(p as f64 - 1.0)).sum();
        assert!((v - f(0.3)).abs() < 1e-13);
        let g = GridField::from_fn(1, 64, |x| (2.0 * PI * x[0]).cos());
        let y = [0.123456, 0.0];
        assert!((g.interpolate(&y, 0) - (2.0 * PI * y[0]).cos()).abs() < 1e-5);
        let y = [-0.9, 0.0];
        assert!((g.interpolate(&y, 0) - (2.0 * PI * y[0]).cos()).abs() < 1e-5);
    }

    #[test]
    fn stencil_matches_gradient() {
        let n = 16;
        let g = GridField::from_fn(1, n, |x| (2.0 * PI * x[0]).sin() + 0.2 * (4.0 * PI * x[0]).cos());
        let s = spectral_stencil_1d(n, 1);
        let d = g.gradient();
        for i in 0..n {
            let v: f64 = (0..n).map(|j| s[(i + n - j) % n] * g.values[j]).sum();
            assert!((v - d.values[i]).abs() < 1e-10);
        }
    }
}
