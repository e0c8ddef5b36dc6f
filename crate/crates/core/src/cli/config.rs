use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::model::{self, presets, CoefficientModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateParams {
    pub grid_n: usize,
    pub tol: f64,
}

impl Default for ValidateParams {
    fn default() -> Self {
        Self { grid_n: 64, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub epsilon: f64,
    pub t: f64,
    pub dt: f64,
    pub x0: Vec<f64>,
    pub n_paths: usize,
    /// Simulate the torus process instead of `X^ε`.
    pub tilde: bool,
    pub binary: bool,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            t: 1.0,
            dt: 1e-3,
            x0: Vec::new(),
            n_paths: 4,
            tilde: false,
            binary: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantParams {
    /// `0` targets the limit measure `μ`.
    pub epsilon: f64,
    pub n_samples: usize,
    pub bins: usize,
    /// Fast time between retained samples.
    pub thin: f64,
    pub burn_in: Option<f64>,
    pub n_chains: usize,
    pub dt: f64,
}

impl Default for InvariantParams {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            n_samples: 200_000,
            bins: 64,
            thin: 0.1,
            burn_in: None,
            n_chains: 8,
            dt: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomogenizeParams {
    /// Generator grid; `0` picks the per-dimension default.
    pub grid_n: usize,
    pub sphere_nodes: usize,
    pub mc_samples: usize,
}

impl Default for HomogenizeParams {
    fn default() -> Self {
        Self {
            grid_n: 0,
            sphere_nodes: 64,
            mc_samples: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    pub epsilon: f64,
    pub t: f64,
    pub dt: f64,
    /// Evaluation points per axis.
    pub x_points: usize,
    pub n_paths: usize,
    pub limit_mc_paths: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            t: 0.05,
            dt: 1e-3,
            x_points: 16,
            n_paths: 10_000,
            limit_mc_paths: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyParams {
    pub epsilons: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub x_points: usize,
    pub n_paths: usize,
    /// Also run the characteristic diagnostics of the corrected process.
    pub fclt: bool,
    pub fclt_paths: usize,
    pub fclt_rho: f64,
    /// Physical step of the characteristic diagnostics.
    pub fclt_dt: f64,
}

impl Default for StudyParams {
    fn default() -> Self {
        Self {
            epsilons: vec![0.5, 0.25, 0.125],
            t: 0.05,
            dt: 1e-3,
            x_points: 16,
            n_paths: 4_000,
            fclt: true,
            fclt_paths: 200,
            fclt_rho: 0.05,
            fclt_dt: 1e-4,
        }
    }
}

/// Everything a pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Model file (TOML); takes precedence over `preset`.
    pub model: Option<PathBuf>,
    pub preset: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub cache: bool,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    pub validate: ValidateParams,
    pub simulate: SimulateParams,
    pub invariant: InvariantParams,
    pub homogenize: HomogenizeParams,
    pub solve: SolveParams,
    pub study: StudyParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            preset: "constant".into(),
            seed: 1,
            output_dir: PathBuf::from("out"),
            cache: true,
            threads: None,
            validate: ValidateParams::default(),
            simulate: SimulateParams::default(),
            invariant: InvariantParams::default(),
            homogenize: HomogenizeParams::default(),
            solve: SolveParams::default(),
            study: StudyParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load_model(&self) -> Result<CoefficientModel> {
        let m = match &self.model {
            Some(p) => model::io::load(p)?,
            None => presets::by_name(&self.preset).ok_or_else(|| {
                invalid(format!(
                    "unknown preset '{}'; expected one of {:?}",
                    self.preset,
                    presets::PRESET_NAMES
                ))
            })?,
        };
        m.check()?;
        Ok(m)
    }

    /// SHA-256 over the numeric content of the run: the model itself (not
    /// its path) and every parameter block. Output location, caching and
    /// thread count are excluded because they cannot change any number.
    pub fn hash(&self, model: &CoefficientModel) -> String {
        let mut c = self.clone();
        c.model = None;
        c.preset = String::new();
        c.output_dir = PathBuf::new();
        c.cache = false;
        c.threads = None;
        let json = serde_json::to_string(&c).expect("config serialises");
        let mut h = Sha256::new();
        h.update(model.hash().as_bytes());
        h.update(json.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Hash of a stage key built from serialisable parts.
pub(crate) fn key_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}
