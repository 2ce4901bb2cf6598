//! Trained model container and its JSON file format.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::Layout;
use super::query::ParamView;
use super::{Hyperparams, ModelOptions};
use crate::discretizer::DiscretizationMap;
use crate::error::{Error, Result};
use crate::kgraph::{EntityId, EntityKey, GraphOptions, KnowledgeGraph, Relation};

pub const MODEL_SCHEMA: &str = "boxvis.model/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub hyper: Hyperparams,
    pub options: ModelOptions,
    pub graph_options: GraphOptions,
    pub bins_fingerprint: String,
    pub epoch_losses: Vec<f64>,
    entities: Vec<EntityKey>,
    ids: HashMap<EntityKey, EntityId>,
    layout: Layout,
    theta: Vec<f64>,
}

impl Model {
    pub(crate) fn from_training(
        kg: &KnowledgeGraph,
        hyper: Hyperparams,
        options: ModelOptions,
        layout: Layout,
        theta: Vec<f64>,
        epoch_losses: Vec<f64>,
    ) -> Self {
        let entities = kg.entities().to_vec();
        let ids = entities
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        Model {
            hyper,
            options,
            graph_options: kg.options,
            bins_fingerprint: kg.bins_fingerprint.clone(),
            epoch_losses,
            entities,
            ids,
            layout,
            theta,
        }
    }

    pub fn view(&self) -> ParamView<'_> {
        ParamView::new(&self.theta, self.layout)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn entities(&self) -> &[EntityKey] {
        &self.entities
    }

    pub fn id_of(&self, key: &EntityKey) -> Option<EntityId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: EntityId) -> &EntityKey {
        &self.entities[id]
    }

    /// Fails unless the model was trained against `bins`.
    pub fn check_bins(&self, bins: &DiscretizationMap) -> Result<()> {
        let got = bins.fingerprint();
        if got != self.bins_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.bins_fingerprint.clone(),
                got,
            });
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from(self))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::artifacts::write_json(path, &ModelFile::from(self))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = crate::artifacts::read_json(path)?;
        if file.schema != MODEL_SCHEMA {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                expected: MODEL_SCHEMA.to_string(),
                got: file.schema,
            });
        }
        file.into_model()
    }

    /// Loads a model and refuses it unless it matches `bins`.
    pub fn load_checked(path: &Path, bins: &DiscretizationMap) -> Result<Self> {
        let model = Model::load(path)?;
        model.check_bins(bins)?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema: String,
    hyper: Hyperparams,
    options: ModelOptions,
    graph_options: GraphOptions,
    bins_fingerprint: String,
    epoch_losses: Vec<f64>,
    entities: Vec<EntityRow>,
    relations: Vec<RelationRow>,
    attention: AttentionRow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityRow {
    id: EntityId,
    label: String,
    key: EntityKey,
    point: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRow {
    relation: Relation,
    shift: Vec<f64>,
    growth: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttentionRow {
    w1: Vec<f64>,
    b1: Vec<f64>,
    u: Vec<f64>,
    gate: Vec<f64>,
    gate_bias: Vec<f64>,
}

impl From<&Model> for ModelFile {
    fn from(m: &Model) -> Self {
        let l = m.layout;
        let t = &m.theta;
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            hyper: m.hyper,
            options: m.options,
            graph_options: m.graph_options,
            bins_fingerprint: m.bins_fingerprint.clone(),
            epoch_losses: m.epoch_losses.clone(),
            entities: m
                .entities
                .iter()
                .enumerate()
                .map(|(id, key)| EntityRow {
                    id,
                    label: key.to_string(),
                    key: key.clone(),
                    point: t[l.point(id)].to_vec(),
                })
                .collect(),
            relations: Relation::ALL
                .iter()
                .map(|&r| RelationRow {
                    relation: r,
                    shift: t[l.shift(r)].to_vec(),
                    growth: t[l.growth(r)].to_vec(),
                })
                .collect(),
            attention: AttentionRow {
                w1: t[l.w1()].to_vec(),
                b1: t[l.b1()].to_vec(),
                u: t[l.u()].to_vec(),
                gate: t[l.gate()].to_vec(),
                gate_bias: t[l.gate_bias()].to_vec(),
            },
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<Model> {
        let d = self.hyper.d;
        let layout = Layout::new(self.entities.len(), d);
        let mut theta = vec![0.0; layout.total()];
        let put = |theta: &mut [f64], range: std::ops::Range<usize>, v: &[f64]| -> Result<()> {
            if v.len() != range.len() {
                return Err(Error::DimensionMismatch {
                    expected: range.len(),
                    got: v.len(),
                });
            }
            theta[range].copy_from_slice(v);
            Ok(())
        };
        let mut entities = Vec::with_capacity(self.entities.len());
        let mut ids = HashMap::new();
        for row in self.entities {
            if row.id != entities.len() || ids.insert(row.key.clone(), row.id).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "model entity table is not dense and unique at id {}",
                    row.id
                )));
            }
            put(&mut theta, layout.point(row.id), &row.point)?;
            entities.push(row.key);
        }
        let mut seen = Vec::new();
        for row in self.relations {
            seen.push(row.relation);
            put(&mut theta, layout.shift(row.relation), &row.shift)?;
            put(&mut theta, layout.growth(row.relation), &row.growth)?;
        }
        seen.sort();
        seen.dedup();
        if seen.len() != Relation::ALL.len() {
            return Err(Error::InvalidArgument(
                "model must hold all five relations".into(),
            ));
        }
        let a = &self.attention;
        put(&mut theta, layout.w1(), &a.w1)?;
        put(&mut theta, layout.b1(), &a.b1)?;
        put(&mut theta, layout.u(), &a.u)?;
        put(&mut theta, layout.gate(), &a.gate)?;
        put(&mut theta, layout.gate_bias(), &a.gate_bias)?;
        Ok(Model {
            hyper: self.hyper,
            options: self.options,
            graph_options: self.graph_options,
            bins_fingerprint: self.bins_fingerprint,
            epoch_losses: self.epoch_losses,
            entities,
            ids,
            layout,
            theta,
        })
    }
}
