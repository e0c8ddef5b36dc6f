//! Trigonometric polynomials on the unit torus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Point, MAX_DIM};

/// One mode: `cos·cos(2π k·x) + sin·sin(2π k·x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub mode: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl FourierTerm {
    fn phase(&self, x: &Point) -> f64 {
        2.0 * PI
            * self
                .mode
                .iter()
                .zip(x.iter())
                .map(|(&k, &xi)| k as f64 * xi)
                .sum::<f64>()
    }

    fn wavevector(&self) -> Point {
        let mut w = [0.0; MAX_DIM];
        for (a, &k) in self.mode.iter().enumerate() {
            w[a] = 2.0 * PI * k as f64;
        }
        w
    }
}

/// A real trigonometric polynomial, exactly 1-periodic in every coordinate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    #[serde(default)]
    pub terms: Vec<FourierTerm>,
}

impl FourierField {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        if value == 0.0 {
            return Self::zero();
        }
        Self {
            terms: vec![FourierTerm {
                mode: vec![0; dim],
                cos: value,
                sin: 0.0,
            }],
        }
    }

    pub fn cos_mode(mode: &[i32], amplitude: f64) -> Self {
        Self {
            terms: vec![FourierTerm {
                mode: mode.to_vec(),
                cos: amplitude,
                sin: 0.0,
            }],
        }
    }

    pub fn sin_mode(mode: &[i32], amplitude: f64) -> Self {
        Self {
            terms: vec![FourierTerm {
                mode: mode.to_vec(),
                cos: 0.0,
                sin: amplitude,
            }],
        }
    }

    pub fn plus(mut self, other: FourierField) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.cos == 0.0 && t.sin == 0.0)
    }

    /// True if every term is the zero mode.
    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.mode.iter().all(|&k| k == 0) || (t.cos == 0.0 && t.sin == 0.0))
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let p = t.phase(x);
                t.cos * p.cos() + t.sin * p.sin()
            })
            .sum()
    }

    pub fn gradient(&self, x: &Point) -> Point {
        let mut g = [0.0; MAX_DIM];
        for t in &self.terms {
            let p = t.phase(x);
            let w = t.wavevector();
            let s = -t.cos * p.sin() + t.sin * p.cos();
            for a in 0..MAX_DIM {
                g[a] += w[a] * s;
            }
        }
        g
    }

    /// Zero-mode coefficient, i.e. the Lebesgue mean.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.mode.iter().all(|&k| k == 0))
            .map(|t| t.cos)
            .sum()
    }

    /// `sup |f|` bound from the coefficients.
    pub fn coefficient_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.cos.abs() + t.sin.abs()).sum()
    }

    /// Bound on `sup |∇f|` from the coefficients.
    pub fn gradient_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let w = t.wavevector();
                (w[0] * w[0] + w[1] * w[1]).sqrt() * (t.cos.abs() + t.sin.abs())
            })
            .sum()
    }

    /// Shift the argument: returns `x ↦ f(x + a)`.
    pub fn translated(&self, a: &Point) -> FourierField {
        FourierField {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let p = t.phase(a);
                    let (c, s) = (p.cos(), p.sin());
                    FourierTerm {
                        mode: t.mode.clone(),
                        cos: t.cos * c + t.sin * s,
                        sin: t.sin * c - t.cos * s,
                    }
                })
                .collect(),
        }
    }

    pub fn check_dim(&self, dim: usize) -> bool {
        self.terms.iter().all(|t| t.mode.len() == dim)
    }
}

/// A vector field with one trigonometric polynomial per component.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub components: Vec<FourierField>,
}

impl VectorField {
    pub fn zero(dim: usize) -> Self {
        Self {
            components: vec![FourierField::zero(); dim],
        }
    }

    pub fn constant(values: &[f64]) -> Self {
        let dim = values.len();
        Self {
            components: values.iter().map(|&v| FourierField::constant(dim, v)).collect(),
        }
    }

    pub fn from_scalar(f: FourierField) -> Self {
        Self { components: vec![f] }
    }

    pub fn eval(&self, x: &Point) -> Point {
        let mut v = [0.0; MAX_DIM];
        for (a, c) in self.components.iter().enumerate() {
            v[a] = c.eval(x);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn coefficient_bound(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.coefficient_bound().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn translated(&self, a: &Point) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.translated(a)).collect(),
        }
    }
}

/// A `d × d` matrix field stored row-major.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixField {
    pub entries: Vec<FourierField>,
}

impl MatrixField {
    pub fn dim(&self) -> usize {
        (self.entries.len() as f64).sqrt().round() as usize
    }

    /// `s(x) · I`.
    pub fn scalar(dim: usize, s: FourierField) -> Self {
        let mut entries = vec![FourierField::zero(); dim * dim];
        for a in 0..dim {
            entries[a * dim + a] = s.clone();
        }
        Self { entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, FourierField::constant(dim, 1.0))
    }

    pub fn eval(&self, x: &Point) -> [[f64; MAX_DIM]; MAX_DIM] {
        let d = self.dim();
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for a in 0..d {
            for b in 0..d {
                m[a][b] = self.entries[a * d + b].eval(x);
            }
        }
        m
    }

    pub fn translated(&self, a: &Point) -> MatrixField {
        MatrixField {
            entries: self.entries.iter().map(|c| c.translated(a)).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| e.is_constant())
    }
}
