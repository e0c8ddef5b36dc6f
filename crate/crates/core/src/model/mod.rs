//! Coefficient models, assumption checks and kernel diagnostics.

pub mod fourier;
pub mod io;
pub mod kernel;
pub mod presets;
pub mod sigma;
pub mod validate;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use fourier::{FourierField, FourierTerm, MatrixField, VectorField};
pub use kernel::{kernel_bounds, kernel_density, KernelBounds, KernelEvaluator};
pub use sigma::{DirectionTable, SigmaFamily};
pub use validate::{validate_assumptions, validate_with_measure, AssumptionCheck, CheckStatus, ValidationReport, Witness};

use crate::error::{invalid, Result};
use crate::quadrature::{stable_symbol_constant, SphereNodes};
use crate::{norm, Point};

/// Full problem datum: dimension, stability index, periodic coefficients
/// `b, c, e, g`, initial value `u₀` and jump map `σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientModel {
    #[serde(default)]
    pub name: String,
    pub dim: usize,
    pub alpha: f64,
    pub beta_target: f64,
    pub b: VectorField,
    pub c: VectorField,
    pub e: FourierField,
    pub g: FourierField,
    pub u0: FourierField,
    pub sigma: SigmaFamily,
}

impl CoefficientModel {
    /// Structural checks: parameter ranges and table shapes.
    pub fn check(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(invalid(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (1, 2), got {}", self.alpha)));
        }
        let lo = 1.0 - 0.5 * self.alpha;
        if !(self.beta_target > lo && self.beta_target < 1.0) {
            return Err(invalid(format!(
                "beta_target must lie in ({lo}, 1), got {}",
                self.beta_target
            )));
        }
        let d = self.dim;
        let vec_ok = |v: &VectorField| v.components.len() == d && v.components.iter().all(|c| c.check_dim(d));
        if !vec_ok(&self.b) || !vec_ok(&self.c) {
            return Err(invalid("b and c need one component per dimension with matching mode lengths"));
        }
        for (name, f) in [("e", &self.e), ("g", &self.g), ("u0", &self.u0)] {
            if !f.check_dim(d) {
                return Err(invalid(format!("field {name} has modes of the wrong length")));
            }
        }
        if !self.sigma.well_formed(d) {
            return Err(invalid("sigma table is malformed for this dimension"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("model serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn sigma(&self, x: &Point, y: &Point) -> Point {
        self.sigma.eval(x, y, self.dim)
    }

    /// Drift of the torus process: `b + ε^{α−1} c` (`ε = 0` gives `b`).
    pub fn tilde_drift(&self, z: &Point, epsilon: f64) -> Point {
        let mut v = self.b.eval(z);
        if epsilon > 0.0 {
            let s = epsilon.powf(self.alpha - 1.0);
            let c = self.c.eval(z);
            for k in 0..self.dim {
                v[k] += s * c[k];
            }
        }
        v
    }

    /// Model with every coefficient shifted: `x ↦ f(x + a)`.
    pub fn translated(&self, a: &Point) -> CoefficientModel {
        CoefficientModel {
            name: self.name.clone(),
            dim: self.dim,
            alpha: self.alpha,
            beta_target: self.beta_target,
            b: self.b.translated(a),
            c: self.c.translated(a),
            e: self.e.translated(a),
            g: self.g.translated(a),
            u0: self.u0.translated(a),
            sigma: self.sigma.translated(a),
        }
    }

    /// Local symbol `ψ_x(ξ) = C(α) ∫_{S^{d−1}} |ξ·σ(x,θ)|^α dθ` of the jump
    /// part at frozen `x`; valid for homogeneous odd `σ`.
    pub fn local_symbol(&self, x: &Point, xi: &Point, sphere: &SphereNodes) -> f64 {
        let c = stable_symbol_constant(self.alpha);
        let mut acc = 0.0;
        for (th, w) in sphere.points.iter().zip(&sphere.weights) {
            let s = self.sigma(x, th);
            let dot: f64 = (0..self.dim).map(|k| xi[k] * s[k]).sum();
            acc += w * dot.abs().powf(self.alpha);
        }
        c * acc
    }

    /// `∫_{S^{d−1}} |σ(x,θ)|^α dθ`, the local jump intensity weight.
    pub fn jump_weight(&self, x: &Point, sphere: &SphereNodes) -> f64 {
        sphere
            .points
            .iter()
            .zip(&sphere.weights)
            .map(|(th, w)| w * norm(&self.sigma(x, th), self.dim).powf(self.alpha))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        let mut m = presets::constant();
        m.alpha = 2.0;
        assert!(m.check().is_err());
        let mut m = presets::constant();
        m.beta_target = 0.2;
        assert!(m.check().is_err());
        assert!(presets::constant().check().is_ok());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = presets::constant();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.alpha = 1.4;
        assert_ne!(a.hash(), b.hash());
    }
}
