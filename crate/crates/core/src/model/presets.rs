//! Ready-made models used by the CLI and the test suites.

use super::fourier::{FourierField, VectorField};
use super::sigma::SigmaFamily;
use super::CoefficientModel;

pub const PRESET_NAMES: [&str; 5] = ["constant", "modulated", "drift", "pure-stable", "pure-stable-2d"];

pub fn by_name(name: &str) -> Option<CoefficientModel> {
    match name {
        "constant" => Some(constant()),
        "modulated" => Some(modulated()),
        "drift" => Some(drift()),
        "pure-stable" => Some(pure_stable(1)),
        "pure-stable-2d" => Some(pure_stable(2)),
        _ => None,
    }
}

/// `d = 1, α = 1.5, σ(x,y) = y, b = e = 0, c = 0.3, g = 0.2, u₀ = cos 2πx`.
pub fn constant() -> CoefficientModel {
    CoefficientModel {
        name: "constant".into(),
        dim: 1,
        alpha: 1.5,
        beta_target: 0.6,
        b: VectorField::zero(1),
        c: VectorField::constant(&[0.3]),
        e: FourierField::zero(),
        g: FourierField::constant(1, 0.2),
        u0: FourierField::cos_mode(&[1], 1.0),
        sigma: SigmaFamily::identity(1),
    }
}

/// `σ(x,y) = (1 + 0.5 sin 2πx) y`, `b = c = e = 0`, `g = 0.2`.
pub fn modulated() -> CoefficientModel {
    CoefficientModel {
        name: "modulated".into(),
        c: VectorField::zero(1),
        sigma: SigmaFamily::scalar_linear(
            1,
            FourierField::constant(1, 1.0).plus(FourierField::sin_mode(&[1], 0.5)),
        ),
        ..constant()
    }
}

/// `σ(x,y) = y`, `b = 2 sin 2πx`, `c = 0.3`, `e = 0.2 sin 2πx`, `g = 0.2`.
///
/// `b` and `e` are odd about the origin and the generator commutes with the
/// reflection `x ↦ −x`, so the invariant measure is reflection symmetric and
/// both fields are exactly centered.
pub fn drift() -> CoefficientModel {
    CoefficientModel {
        name: "drift".into(),
        b: VectorField::from_scalar(FourierField::sin_mode(&[1], 2.0)),
        e: FourierField::sin_mode(&[1], 0.2),
        ..constant()
    }
}

/// Standard isotropic stable noise with all other coefficients zero.
pub fn pure_stable(dim: usize) -> CoefficientModel {
    CoefficientModel {
        name: if dim == 1 { "pure-stable".into() } else { "pure-stable-2d".into() },
        dim,
        alpha: 1.5,
        beta_target: 0.6,
        b: VectorField::zero(dim),
        c: VectorField::zero(dim),
        e: FourierField::zero(),
        g: FourierField::zero(),
        u0: FourierField::cos_mode(&vec![1; dim][..], 1.0),
        sigma: SigmaFamily::identity(dim),
    }
}

/// Deterministic model: `σ ≡ 0` with the given constant drift and potential.
pub fn deterministic(c: f64, g: f64) -> CoefficientModel {
    CoefficientModel {
        name: "deterministic".into(),
        c: VectorField::constant(&[c]),
        g: FourierField::constant(1, g),
        sigma: SigmaFamily::scalar_linear(1, FourierField::zero()),
        ..constant()
    }
}
