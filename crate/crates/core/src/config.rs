//! Run configuration shared by every command. Values come from built-in
//! defaults, then an optional TOML or JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boxmodel::{Hyperparams, ModelOptions, Tasks};
use crate::error::{Error, Result};
use crate::inference::InferenceOptions;
use crate::kgraph::GraphOptions;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub bins: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub hyper: Hyperparams,
    pub paths: Paths,
    pub use_cross_features: bool,
    pub project_columns_before_ds_intersection: bool,
    pub tasks: Tasks,
    pub containment_tol: f64,
    pub include_negative_booleans: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = ModelOptions::default();
        RunConfig {
            hyper: Hyperparams::default(),
            paths: Paths::default(),
            use_cross_features: m.use_cross_features,
            project_columns_before_ds_intersection: m.project_columns_before_ds_intersection,
            tasks: m.tasks,
            containment_tol: 0.0,
            include_negative_booleans: GraphOptions::default().include_negative_booleans,
        }
    }
}

impl RunConfig {
    /// Parses TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.containment_tol.is_nan() || self.containment_tol < 0.0 {
            return Err(Error::Config("containment_tol must be non-negative".into()));
        }
        Ok(())
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            use_cross_features: self.use_cross_features,
            project_columns_before_ds_intersection: self.project_columns_before_ds_intersection,
            tasks: self.tasks,
        }
    }

    pub fn inference_options(&self) -> InferenceOptions {
        InferenceOptions {
            containment_tol: self.containment_tol,
            use_cross_features: self.use_cross_features,
        }
    }

    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            include_negative_booleans: self.include_negative_booleans,
        }
    }
}
