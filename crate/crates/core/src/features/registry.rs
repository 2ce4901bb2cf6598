//! The canonical feature list with explanation metadata.
//!
//! Loaded from `data/features.json`, which is compiled in but can be
//! replaced at runtime with [`FeatureRegistry::from_path`] to edit phrases
//! without rebuilding.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGISTRY_SCHEMA: &str = "boxvis.features/1";
const BUILTIN: &str = include_str!("../../data/features.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Single,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueClass {
    Continuous,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phrase {
    /// What a continuous feature measures, e.g. "variance".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noun: Option<String>,
    /// Two-bin wording for the lower bin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<String>,
    /// Two-bin wording for the upper bin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<String>,
    /// Wording of a boolean feature when true.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureInfo {
    pub name: String,
    pub kind: FeatureKind,
    pub value: ValueClass,
    pub explanation: String,
    pub blocklisted: bool,
    pub polarity_sensitive: bool,
    pub phrase: Phrase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    schema: String,
    features: Vec<FeatureInfo>,
}

#[derive(Debug, Clone)]
pub struct FeatureRegistry {
    features: Vec<FeatureInfo>,
    index: HashMap<String, usize>,
}

impl FeatureRegistry {
    pub fn builtin() -> &'static FeatureRegistry {
        static REGISTRY: OnceLock<FeatureRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            FeatureRegistry::from_json(BUILTIN).expect("built-in feature registry is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RegistryFile = serde_json::from_str(text)?;
        if file.schema != REGISTRY_SCHEMA {
            return Err(Error::Config(format!(
                "feature registry schema {:?}, expected {REGISTRY_SCHEMA:?}",
                file.schema
            )));
        }
        let mut index = HashMap::new();
        for (i, f) in file.features.iter().enumerate() {
            if index.insert(f.name.clone(), i).is_some() {
                return Err(Error::Config(format!("feature {:?} listed twice", f.name)));
            }
        }
        Ok(FeatureRegistry {
            features: file.features,
            index,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FeatureRegistry::from_json(&text)
    }

    pub fn builtin_json() -> &'static str {
        BUILTIN
    }

    pub fn get(&self, name: &str) -> Option<&FeatureInfo> {
        self.index.get(name).map(|&i| &self.features[i])
    }

    pub fn all(&self) -> &[FeatureInfo] {
        &self.features
    }

    pub fn of_kind(&self, kind: FeatureKind) -> impl Iterator<Item = &FeatureInfo> {
        self.features.iter().filter(move |f| f.kind == kind)
    }

    pub fn is_continuous(&self, name: &str) -> bool {
        self.get(name)
            .is_some_and(|f| f.value == ValueClass::Continuous)
    }
}
