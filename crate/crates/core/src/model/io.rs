//! TOML model files.
//!
//! ```toml
//! name = "modulated"
//! dim = 1
//! alpha = 1.5
//! beta_target = 0.6
//!
//! [[b.components]]
//! terms = []
//!
//! [[c.components]]
//! terms = []
//!
//! [e]
//! terms = []
//!
//! [g]
//! terms = [{ mode = [0], cos = 0.2 }]
//!
//! [u0]
//! terms = [{ mode = [1], cos = 1.0 }]
//!
//! [sigma]
//! family = "linear"
//! [[sigma.sigma0.entries]]
//! terms = [{ mode = [0], cos = 1.0 }, { mode = [1], sin = 0.5 }]
//! ```
//!
//! Each scalar field is a list of terms `cos·cos(2πk·x) + sin·sin(2πk·x)`.
//! `sigma.family` is one of `linear`, `separable_homogeneous` (adds an `eta`
//! direction table) or `perturbed` (adds `base`, `amplitude`, `modulation`,
//! `direction` and an optional `offset`).

use std::path::Path;

use super::CoefficientModel;
use crate::error::{Error, Result};

pub fn to_toml_string(model: &CoefficientModel) -> Result<String> {
    toml::to_string(model).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_toml_str(s: &str) -> Result<CoefficientModel> {
    let m: CoefficientModel = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    m.check()?;
    Ok(m)
}

pub fn load(path: &Path) -> Result<CoefficientModel> {
    from_toml_str(&std::fs::read_to_string(path)?)
}

pub fn save(model: &CoefficientModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_toml_string(model)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets;

    #[test]
    fn presets_round_trip() {
        for name in presets::PRESET_NAMES {
            let m = presets::by_name(name).unwrap();
            let s = to_toml_string(&m).unwrap();
            assert_eq!(from_toml_str(&s).unwrap(), m, "{name}");
        }
    }

    #[test]
    fn documented_example_parses() {
        let src = r#"
name = "modulated"
dim = 1
alpha = 1.5
beta_target = 0.6

[[b.components]]
terms = []

[[c.components]]
terms = []

[e]
terms = []

[g]
terms = [{ mode = [0], cos = 0.2 }]

[u0]
terms = [{ mode = [1], cos = 1.0 }]

[sigma]
family = "linear"
[[sigma.sigma0.entries]]
terms = [{ mode = [0], cos = 1.0 }, { mode = [1], sin = 0.5 }]
"#;
        let m = from_toml_str(src).unwrap();
        assert_eq!(m, presets::modulated());
    }
}
