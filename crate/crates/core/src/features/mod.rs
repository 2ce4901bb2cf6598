//! Single-column and cross-column feature extraction.

pub mod cross;
pub mod names;
pub mod registry;
pub mod single;
pub mod stats;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Axis, ChartType, Corpus, DatasetPair, Split};
use crate::error::{Error, Result};

pub use cross::extract_cross;
pub use registry::{FeatureInfo, FeatureKind, FeatureRegistry, ValueClass};
pub use single::extract_single;

/// A feature value. Serialised as a JSON number, boolean or `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Bool(bool),
    Real(f64),
    Missing,
}

impl FeatureValue {
    /// Non-finite reals become `Missing`.
    pub fn real(x: f64) -> Self {
        if x.is_finite() {
            FeatureValue::Real(x)
        } else {
            FeatureValue::Missing
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match *self {
            FeatureValue::Real(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            FeatureValue::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, FeatureValue::Missing)
    }
}

impl From<Option<f64>> for FeatureValue {
    fn from(v: Option<f64>) -> Self {
        v.map_or(FeatureValue::Missing, FeatureValue::real)
    }
}

impl From<Option<bool>> for FeatureValue {
    fn from(v: Option<bool>) -> Self {
        v.map_or(FeatureValue::Missing, FeatureValue::Bool)
    }
}

impl From<f64> for FeatureValue {
    fn from(v: f64) -> Self {
        FeatureValue::real(v)
    }
}

impl From<bool> for FeatureValue {
    fn from(v: bool) -> Self {
        FeatureValue::Bool(v)
    }
}

impl From<usize> for FeatureValue {
    fn from(v: usize) -> Self {
        FeatureValue::Real(v as f64)
    }
}

pub type FeatureMap = BTreeMap<String, FeatureValue>;

/// Collects named values, panicking on a name outside the registry so that
/// extractors cannot drift from the canonical list.
#[derive(Debug)]
pub(crate) struct MapBuilder {
    kind: FeatureKind,
    map: FeatureMap,
}

impl MapBuilder {
    pub(crate) fn new(kind: FeatureKind) -> Self {
        MapBuilder {
            kind,
            map: FeatureMap::new(),
        }
    }

    pub(crate) fn set(&mut self, name: &str, value: impl Into<FeatureValue>) {
        let info = FeatureRegistry::builtin()
            .get(name)
            .unwrap_or_else(|| panic!("unregistered feature {name}"));
        debug_assert_eq!(info.kind, self.kind, "{name}");
        let value = value.into();
        debug_assert!(
            matches!(
                (info.value, value),
                (_, FeatureValue::Missing)
                    | (ValueClass::Boolean, FeatureValue::Bool(_))
                    | (ValueClass::Continuous, FeatureValue::Real(_))
            ),
            "{name}: {value:?}"
        );
        self.map.insert(name.to_string(), value);
    }

    /// Fills every registered name not yet set with `Missing`.
    pub(crate) fn finish(mut self) -> FeatureMap {
        for info in FeatureRegistry::builtin().of_kind(self.kind) {
            self.map
                .entry(info.name.clone())
                .or_insert(FeatureValue::Missing);
        }
        self.map
    }
}

/// Features of one pair, keyed by column name for the single-column part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFeatures {
    pub id: String,
    pub chart_type: ChartType,
    /// Column names in storage order with their axes.
    pub columns: Vec<String>,
    pub axes: Vec<Axis>,
    pub single: BTreeMap<String, FeatureMap>,
    pub cross: FeatureMap,
}

impl PairFeatures {
    pub fn column_features(&self, index: usize) -> &FeatureMap {
        &self.single[&self.columns[index]]
    }
}

pub fn extract_pair(pair: &DatasetPair) -> Result<PairFeatures> {
    let [a, b] = &pair.columns;
    let mut single = BTreeMap::new();
    single.insert(a.name.clone(), extract_single(a));
    single.insert(b.name.clone(), extract_single(b));
    Ok(PairFeatures {
        id: pair.id.clone(),
        chart_type: pair.chart_type,
        columns: vec![a.name.clone(), b.name.clone()],
        axes: pair.axes.to_vec(),
        single,
        cross: extract_cross(a, b)?,
    })
}

pub const DUMP_SCHEMA: &str = "boxvis.feature_dump/1";

/// Feature dump of a whole corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDump {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    pub pairs: Vec<PairFeatures>,
}

impl FeatureDump {
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let pairs = corpus
            .pairs
            .iter()
            .map(extract_pair)
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureDump {
            schema: DUMP_SCHEMA.to_string(),
            split: corpus.split(),
            pairs,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::artifacts::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let dump: FeatureDump = crate::artifacts::read_json(path)?;
        if dump.schema != DUMP_SCHEMA {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                expected: DUMP_SCHEMA.to_string(),
                got: dump.schema,
            });
        }
        Ok(dump)
    }
}
