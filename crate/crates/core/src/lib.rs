//! Numerical toolkit for periodic homogenization of nonlocal parabolic
//! equations whose generators come from SDEs driven by multiplicative
//! isotropic α-stable noise on the torus.
//!
//! The crate is organised along the pipeline it implements:
//!
//! - [`model`]: coefficient models (trigonometric-polynomial fields, jump maps),
//!   assumption checks and kernel diagnostics.
//! - [`levy`]: Poisson jump streams, small-jump corrections, symmetric stable
//!   samplers.
//! - [`sde`]: jump-adapted Euler integration of the oscillating SDE and its
//!   rescaled torus version.
//! - [`ergodic`]: invariant-measure histograms, ergodic averages, mixing fits.
//! - [`nonlocal`]: discretised generator, resolvent and centered Poisson solves,
//!   correctors.
//! - [`homogenize`]: effective drift, potential and jump measure; FCLT diagnostics.
//! - [`pde`]: Feynman–Kac Monte Carlo for the oscillating problem and the
//!   spectral limit solver.
//! - [`cli`]: run configuration, caching, manifests and the subcommand driver.

pub mod cli;
pub mod ergodic;
pub mod error;
pub mod grid;
pub mod homogenize;
pub mod levy;
pub mod model;
pub mod nonlocal;
pub mod pde;
pub mod quadrature;
pub mod rng;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// A point of `R^d` or `T^d`; components at index `>= dim` are kept at zero.
pub type Point = [f64; MAX_DIM];

/// A `d x d` matrix stored in the top-left block of a 2x2 array.
pub type Mat = [[f64; MAX_DIM]; MAX_DIM];

/// Componentwise reduction modulo 1 into `[0, 1)`.
pub fn wrap_torus(x: &Point, dim: usize) -> Point {
    let mut out = [0.0; MAX_DIM];
    for k in 0..dim {
        let r = x[k] - x[k].floor();
        out[k] = if r >= 1.0 { 0.0 } else { r };
    }
    out
}

pub(crate) fn norm(v: &Point, dim: usize) -> f64 {
    v[..dim].iter().map(|a| a * a).sum::<f64>().sqrt()
}
