//! Jump maps `σ(x, y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fourier::{FourierField, MatrixField};
use crate::{norm, Mat, Point, MAX_DIM};

/// A positively homogeneous map `η(y) = |y| η̂(y/|y|)` tabulated on the unit
/// sphere.
///
/// In one dimension `values = [η̂(+1), η̂(−1)]`. In two dimensions `values[j]`
/// is `η̂` at angle `2πj/M`, linearly interpolated in angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionTable {
    pub values: Vec<Vec<f64>>,
}

impl DirectionTable {
    pub fn identity(dim: usize, m: usize) -> Self {
        match dim {
            1 => Self {
                values: vec![vec![1.0], vec![-1.0]],
            },
            _ => Self {
                values: (0..m)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / m as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect(),
            },
        }
    }

    /// `η̂` on the unit sphere.
    pub fn unit(&self, theta: &Point, dim: usize) -> Point {
        let mut out = [0.0; MAX_DIM];
        if dim == 1 {
            let v = if theta[0] >= 0.0 { &self.values[0] } else { &self.values[1] };
            out[0] = v[0];
            return out;
        }
        let m = self.values.len();
        let mut a = theta[1].atan2(theta[0]);
        if a < 0.0 {
            a += 2.0 * PI;
        }
        let s = a / (2.0 * PI) * m as f64;
        let j = (s.floor() as usize) % m;
        let f = s - s.floor();
        let (p, q) = (&self.values[j], &self.values[(j + 1) % m]);
        for k in 0..dim {
            out[k] = (1.0 - f) * p[k] + f * q[k];
        }
        out
    }

    pub fn eval(&self, y: &Point, dim: usize) -> Point {
        let r = norm(y, dim);
        if r == 0.0 {
            return [0.0; MAX_DIM];
        }
        let mut th = [0.0; MAX_DIM];
        for k in 0..dim {
            th[k] = y[k] / r;
        }
        let u = self.unit(&th, dim);
        let mut out = [0.0; MAX_DIM];
        for k in 0..dim {
            out[k] = r * u[k];
        }
        out
    }

    fn well_formed(&self, dim: usize) -> bool {
        let len_ok = if dim == 1 {
            self.values.len() == 2
        } else {
            self.values.len() >= 4 && self.values.len() % 2 == 0
        };
        len_ok && self.values.iter().all(|v| v.len() == dim && v.iter().all(|a| a.is_finite()))
    }
}

/// The built-in jump-map families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SigmaFamily {
    /// `σ(x, y) = σ₀(x) y`.
    Linear { sigma0: MatrixField },
    /// `σ(x, y) = σ₀(x) η(y)`.
    SeparableHomogeneous { sigma0: MatrixField, eta: DirectionTable },
    /// `σ(x, y) = base(x, y) + amplitude · m(x) ζ(y) + offset`.
    Perturbed {
        base: Box<SigmaFamily>,
        amplitude: f64,
        modulation: FourierField,
        direction: DirectionTable,
        #[serde(default)]
        offset: Vec<f64>,
    },
}

fn mat_vec(m: &Mat, v: &Point, dim: usize) -> Point {
    let mut out = [0.0; MAX_DIM];
    for a in 0..dim {
        for b in 0..dim {
            out[a] += m[a][b] * v[b];
        }
    }
    out
}

impl SigmaFamily {
    pub fn identity(dim: usize) -> Self {
        SigmaFamily::Linear {
            sigma0: MatrixField::identity(dim),
        }
    }

    pub fn scalar_linear(dim: usize, s: FourierField) -> Self {
        SigmaFamily::Linear {
            sigma0: MatrixField::scalar(dim, s),
        }
    }

    pub fn eval(&self, x: &Point, y: &Point, dim: usize) -> Point {
        match self {
            SigmaFamily::Linear { sigma0 } => mat_vec(&sigma0.eval(x), y, dim),
            SigmaFamily::SeparableHomogeneous { sigma0, eta } => mat_vec(&sigma0.eval(x), &eta.eval(y, dim), dim),
            SigmaFamily::Perturbed {
                base,
                amplitude,
                modulation,
                direction,
                offset,
            } => {
                let mut v = base.eval(x, y, dim);
                let m = amplitude * modulation.eval(x);
                let z = direction.eval(y, dim);
                for k in 0..dim {
                    v[k] += m * z[k] + offset.get(k).copied().unwrap_or(0.0);
                }
                v
            }
        }
    }

    /// `σ₀(x)` when the map is linear in `y`.
    pub fn linear_matrix(&self, x: &Point) -> Option<Mat> {
        match self {
            SigmaFamily::Linear { sigma0 } => Some(sigma0.eval(x)),
            _ => None,
        }
    }

    /// Positive homogeneity of degree one holds by construction unless a
    /// constant offset is present.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            SigmaFamily::Perturbed { base, offset, .. } => base.is_homogeneous() && offset.iter().all(|&o| o == 0.0),
            _ => true,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            SigmaFamily::Linear { sigma0 } | SigmaFamily::SeparableHomogeneous { sigma0, .. } => sigma0.is_constant(),
            SigmaFamily::Perturbed { base, modulation, amplitude, .. } => {
                base.is_x_independent() && (modulation.is_constant() || *amplitude == 0.0)
            }
        }
    }

    /// True if `σ(x, y) = 0` for every `x` and `y`.
    pub fn is_zero(&self) -> bool {
        match self {
            SigmaFamily::Linear { sigma0 } | SigmaFamily::SeparableHomogeneous { sigma0, .. } => {
                sigma0.entries.iter().all(|e| e.is_zero())
            }
            SigmaFamily::Perturbed {
                base,
                amplitude,
                modulation,
                offset,
                ..
            } => base.is_zero() && (*amplitude == 0.0 || modulation.is_zero()) && offset.iter().all(|&o| o == 0.0),
        }
    }

    /// Jacobian `∇_y σ(x, y)`; analytic for linear maps, central
    /// differences otherwise.
    pub fn jacobian_y(&self, x: &Point, y: &Point, dim: usize) -> Mat {
        if let Some(m) = self.linear_matrix(x) {
            return m;
        }
        let h = 1e-6 * norm(y, dim).max(1e-12);
        let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
        for b in 0..dim {
            let mut yp = *y;
            let mut ym = *y;
            yp[b] += h;
            ym[b] -= h;
            let fp = self.eval(x, &yp, dim);
            let fm = self.eval(x, &ym, dim);
            for a in 0..dim {
                jac[a][b] = (fp[a] - fm[a]) / (2.0 * h);
            }
        }
        jac
    }

    pub fn translated(&self, a: &Point) -> SigmaFamily {
        match self {
            SigmaFamily::Linear { sigma0 } => SigmaFamily::Linear {
                sigma0: sigma0.translated(a),
            },
            SigmaFamily::SeparableHomogeneous { sigma0, eta } => SigmaFamily::SeparableHomogeneous {
                sigma0: sigma0.translated(a),
                eta: eta.clone(),
            },
            SigmaFamily::Perturbed {
                base,
                amplitude,
                modulation,
                direction,
                offset,
            } => SigmaFamily::Perturbed {
                base: Box::new(base.translated(a)),
                amplitude: *amplitude,
                modulation: modulation.translated(a),
                direction: direction.clone(),
                offset: offset.clone(),
            },
        }
    }

    pub(crate) fn well_formed(&self, dim: usize) -> bool {
        match self {
            SigmaFamily::Linear { sigma0 } => sigma0.dim() == dim && sigma0.entries.iter().all(|e| e.check_dim(dim)),
            SigmaFamily::SeparableHomogeneous { sigma0, eta } => {
                sigma0.dim() == dim && sigma0.entries.iter().all(|e| e.check_dim(dim)) && eta.well_formed(dim)
            }
            SigmaFamily::Perturbed {
                base,
                modulation,
                direction,
                offset,
                amplitude,
            } => {
                base.well_formed(dim)
                    && modulation.check_dim(dim)
                    && direction.well_formed(dim)
                    && offset.len() <= dim
                    && amplitude.is_finite()
            }
        }
    }
}

pub(crate) fn det(m: &Mat, dim: usize) -> f64 {
    if dim == 1 {
        m[0][0]
    } else {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

pub(crate) fn inverse(m: &Mat, dim: usize) -> Option<Mat> {
    let d = det(m, dim);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut inv = [[0.0; MAX_DIM]; MAX_DIM];
    if dim == 1 {
        inv[0][0] = 1.0 / d;
    } else {
        inv[0][0] = m[1][1] / d;
        inv[1][1] = m[0][0] / d;
        inv[0][1] = -m[0][1] / d;
        inv[1][0] = -m[1][0] / d;
    }
    Some(inv)
}

/// Spectral (largest singular value) norm of a `d × d` matrix.
pub(crate) fn op_norm(m: &Mat, dim: usize) -> f64 {
    if dim == 1 {
        return m[0][0].abs();
    }
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let q = ((a * a + b * b - c * c - d * d).powi(2) + 4.0 * (a * c + b * d).powi(2)).sqrt();
    (0.5 * (s + q)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_2d_is_homogeneous_and_odd_with_odd_table() {
        let mut eta = DirectionTable::identity(2, 16);
        for (j, v) in eta.values.iter_mut().enumerate() {
            let a = 2.0 * PI * j as f64 / 16.0;
            let s = 1.0 + 0.2 * (2.0 * a).cos();
            v[0] *= s;
            v[1] *= s;
        }
        let sig = SigmaFamily::SeparableHomogeneous {
            sigma0: MatrixField::identity(2),
            eta,
        };
        let x = [0.3, 0.4];
        let y = [0.7, -0.2];
        let a = sig.eval(&x, &y, 2);
        let b = sig.eval(&x, &[-0.7, 0.2], 2);
        let c = sig.eval(&x, &[2.1, -0.6], 2);
        assert!((a[0] + b[0]).abs() < 1e-12 && (a[1] + b[1]).abs() < 1e-12);
        assert!((3.0 * a[0] - c[0]).abs() < 1e-12 && (3.0 * a[1] - c[1]).abs() < 1e-12);
    }

    #[test]
    fn op_norm_of_rotation_is_one() {
        let t: f64 = 0.7;
        let m = [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        assert!((op_norm(&m, 2) - 1.0).abs() < 1e-14);
    }
}
