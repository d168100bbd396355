use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::meanfield::SolverOptions;
use crate::model::BandProfile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ising,
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub n_sites: usize,
    pub j_zz: f64,
    pub h_z: f64,
    pub g_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DosKind {
    #[default]
    Flat,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub dim: usize,
    /// Support of a flat density, or center +- 4 widths of a Gaussian one.
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub dos: DosKind,
    pub band: BandProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub seed: u64,
    pub ising: Option<IsingConfig>,
    pub ensemble: Option<EnsembleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub enabled: bool,
    /// Energy shells of the mean-field problem; one channel per basis state when absent.
    pub n_shells: Option<usize>,
    pub options: SolverOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { enabled: true, n_shells: None, options: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzClass {
    Lorentz,
    Gauss,
    Lg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub classes: Vec<AnsatzClass>,
    /// Basis indices for the oracle outputs and the fits; the middle state when empty.
    pub states: Vec<usize>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { classes: vec![AnsatzClass::Lorentz, AnsatzClass::Gauss, AnsatzClass::Lg], states: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    /// Record wall-clock stage timings in the manifest (the only
    /// non-reproducible bytes of a run).
    pub timings: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json], timings: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    /// Broadenings for R(lambda - i eta) on the smoothing grid.
    pub eta: Vec<f64>,
    /// Smoothing window in mean level spacings.
    pub window_spacings: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { enabled: true, eta: vec![0.05, 0.02], window_spacings: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let c: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema_error(&path, e.into_inner().message().trim())
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| schema_error(".", &e.to_string()))
    }

    /// sha256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        let schema = |path: &str, msg: String| Err(schema_error(path, &msg));
        if self.schema_version != SCHEMA_VERSION {
            return schema("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        match self.model.kind {
            ModelKind::Ising if self.model.ising.is_none() => {
                return schema("model.ising", "required for kind = \"ising\"".into())
            }
            ModelKind::Ensemble => match &self.model.ensemble {
                None => return schema("model.ensemble", "required for kind = \"ensemble\"".into()),
                Some(e) if !(e.hi > e.lo) => {
                    return schema("model.ensemble.hi", format!("{} is not above lo = {}", e.hi, e.lo))
                }
                _ => {}
            },
            _ => {}
        }
        if self.solver.n_shells.is_some_and(|n| n < 2) {
            return schema("solver.n_shells", "at least 2 shells are needed".into());
        }
        self.solver.options.validate().or_else(|e| schema("solver.options", e.to_string()))?;
        if let Some(eta) = self.oracle.eta.iter().find(|e| !(**e > 0.0)) {
            return schema("oracle.eta", format!("broadening {eta} must be positive"));
        }
        if !(self.oracle.window_spacings > 0.0) {
            return schema("oracle.window_spacings", "must be positive".into());
        }
        if self.outputs.formats.is_empty() {
            return schema("outputs.formats", "select at least one of csv, json".into());
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.outputs.formats.contains(&f)
    }
}

pub(crate) fn schema_error(path: &str, message: &str) -> Error {
    Error::Schema { path: path.to_string(), message: message.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
schema_version = 1
[model]
kind = "ising"
seed = 3
[model.ising]
n_sites = 6
j_zz = 1.0
h_z = 0.5
g_x = 0.4
"#;

    #[test]
    fn minimal_config_round_trips() {
        let c = RunConfig::from_toml(MIN).unwrap();
        let again = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MIN.replace("g_x = 0.4", "g_x = 0.4\ngx = 1");
        match RunConfig::from_toml(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "model.ising.gx"),
            other => panic!("{other:?}"),
        }
        let bad = format!("{MIN}\n[solver]\ndampng = 0.2\n");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn missing_model_section_names_the_field() {
        let bad = MIN.replace("kind = \"ising\"", "kind = \"ensemble\"");
        match RunConfig::from_toml(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "model.ensemble"),
            other => panic!("{other:?}"),
        }
    }
}
