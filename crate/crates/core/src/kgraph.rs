//! Typed knowledge graph over feature bins, columns, datasets and the
//! visualization vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Axis, ChartType, Split};
use crate::discretizer::{Bin, DiscretizationMap};
use crate::error::{Error, Result};
use crate::features::{FeatureDump, FeatureKind, FeatureMap, PairFeatures};

pub type EntityId = usize;

pub const GRAPH_SCHEMA: &str = "boxvis.graph/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityClass {
    #[serde(rename = "SF")]
    SingleFeature,
    #[serde(rename = "CF")]
    CrossFeature,
    #[serde(rename = "COL")]
    Column,
    #[serde(rename = "DS")]
    Dataset,
    #[serde(rename = "AXIS")]
    Axis,
    #[serde(rename = "TYPE")]
    Type,
}

impl EntityClass {
    pub const ALL: [EntityClass; 6] = [
        EntityClass::SingleFeature,
        EntityClass::CrossFeature,
        EntityClass::Column,
        EntityClass::Dataset,
        EntityClass::Axis,
        EntityClass::Type,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityClass::SingleFeature => "SF",
            EntityClass::CrossFeature => "CF",
            EntityClass::Column => "COL",
            EntityClass::Dataset => "DS",
            EntityClass::Axis => "AXIS",
            EntityClass::Type => "TYPE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "SF->COL")]
    SfCol,
    #[serde(rename = "CF->DS")]
    CfDs,
    #[serde(rename = "COL->DS")]
    ColDs,
    #[serde(rename = "COL->AXIS")]
    ColAxis,
    #[serde(rename = "DS->TYPE")]
    DsType,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::SfCol,
        Relation::CfDs,
        Relation::ColDs,
        Relation::ColAxis,
        Relation::DsType,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn head_class(self) -> EntityClass {
        match self {
            Relation::SfCol => EntityClass::SingleFeature,
            Relation::CfDs => EntityClass::CrossFeature,
            Relation::ColDs | Relation::ColAxis => EntityClass::Column,
            Relation::DsType => EntityClass::Dataset,
        }
    }

    pub fn tail_class(self) -> EntityClass {
        match self {
            Relation::SfCol => EntityClass::Column,
            Relation::CfDs | Relation::ColDs => EntityClass::Dataset,
            Relation::ColAxis => EntityClass::Axis,
            Relation::DsType => EntityClass::Type,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::SfCol => "SF->COL",
            Relation::CfDs => "CF->DS",
            Relation::ColDs => "COL->DS",
            Relation::ColAxis => "COL->AXIS",
            Relation::DsType => "DS->TYPE",
        }
    }
}

/// Stable identity of an entity, independent of its numeric id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKey {
    Axis(Axis),
    Type(ChartType),
    Feature {
        kind: FeatureKind,
        name: String,
        bin: Bin,
    },
    Column {
        pair: String,
        name: String,
    },
    Dataset {
        pair: String,
    },
}

impl EntityKey {
    pub fn class(&self) -> EntityClass {
        match self {
            EntityKey::Axis(_) => EntityClass::Axis,
            EntityKey::Type(_) => EntityClass::Type,
            EntityKey::Feature {
                kind: FeatureKind::Single,
                ..
            } => EntityClass::SingleFeature,
            EntityKey::Feature { .. } => EntityClass::CrossFeature,
            EntityKey::Column { .. } => EntityClass::Column,
            EntityKey::Dataset { .. } => EntityClass::Dataset,
        }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKey::Axis(a) => write!(f, "axis:{}", a.as_str()),
            EntityKey::Type(t) => write!(f, "type:{}", t.as_str()),
            EntityKey::Feature { kind, name, bin } => {
                let scope = match kind {
                    FeatureKind::Single => "SF",
                    FeatureKind::Cross => "CF",
                };
                match bin {
                    Bin::Interval { index, n_bins } => {
                        write!(f, "{scope}:{name}[{}/{n_bins}]", index + 1)
                    }
                    Bin::Missing => write!(f, "{scope}:{name}[missing]"),
                    Bin::Flag(b) => write!(f, "{scope}:{name}={b}"),
                }
            }
            EntityKey::Column { pair, name } => write!(f, "col:{pair}/{name}"),
            EntityKey::Dataset { pair } => write!(f, "ds:{pair}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: Relation,
    pub tail: EntityId,
}

/// Graph-building switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphOptions {
    /// Emit an entity for false boolean features as well as true ones.
    pub include_negative_booleans: bool,
}

/// One training pair as graph entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub pair: String,
    pub dataset: EntityId,
    pub columns: [EntityId; 2],
    /// Active single-column feature entities per column, sorted.
    pub single: [Vec<EntityId>; 2],
    /// Active cross-column feature entities, sorted.
    pub cross: Vec<EntityId>,
    pub axes: [EntityId; 2],
    pub chart_type: EntityId,
}

/// Active feature bins of one feature map, in name order. Booleans count
/// only when true unless `include_negative` is set; continuous values
/// without a bin (missing and no missing bin) are dropped.
pub fn active_bins(
    map: &FeatureMap,
    bins: &DiscretizationMap,
    include_negative: bool,
) -> Result<Vec<(String, Bin)>> {
    let mut out = Vec::new();
    for (name, &value) in map {
        match bins.discretize(name, value)? {
            Some(Bin::Flag(false)) if !include_negative => {}
            Some(bin) => out.push((name.clone(), bin)),
            None => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeGraph {
    entities: Vec<EntityKey>,
    ids: HashMap<EntityKey, EntityId>,
    triples: Vec<Triple>,
    tails: BTreeMap<(EntityId, Relation), Vec<EntityId>>,
    by_class: BTreeMap<EntityClass, Vec<EntityId>>,
    pub instances: Vec<Instance>,
    pub options: GraphOptions,
    pub bins_fingerprint: String,
}

impl KnowledgeGraph {
    /// A graph holding only the six visualization entities, with ids
    /// x=0, y=1, bar=2, line=3, scatter=4, box=5.
    pub fn vocabulary(options: GraphOptions, bins_fingerprint: String) -> Self {
        let mut kg = KnowledgeGraph {
            entities: Vec::new(),
            ids: HashMap::new(),
            triples: Vec::new(),
            tails: BTreeMap::new(),
            by_class: BTreeMap::new(),
            instances: Vec::new(),
            options,
            bins_fingerprint,
        };
        for a in Axis::ALL {
            kg.intern(EntityKey::Axis(a));
        }
        for t in ChartType::ALL {
            kg.intern(EntityKey::Type(t));
        }
        kg
    }

    fn intern(&mut self, key: EntityKey) -> EntityId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.entities.len();
        self.by_class.entry(key.class()).or_default().push(id);
        self.ids.insert(key.clone(), id);
        self.entities.push(key);
        id
    }

    fn rebuild_index(&mut self) {
        self.triples.sort();
        self.triples.dedup();
        self.tails.clear();
        for t in &self.triples {
            self.tails
                .entry((t.head, t.relation))
                .or_default()
                .push(t.tail);
        }
    }

    pub fn axis_entity(a: Axis) -> EntityId {
        a as usize
    }

    pub fn type_entity(t: ChartType) -> EntityId {
        Axis::ALL.len() + t.index()
    }

    pub fn entities(&self) -> &[EntityKey] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn key(&self, id: EntityId) -> &EntityKey {
        &self.entities[id]
    }

    pub fn id_of(&self, key: &EntityKey) -> Option<EntityId> {
        self.ids.get(key).copied()
    }

    pub fn class_members(&self, class: EntityClass) -> &[EntityId] {
        self.by_class.get(&class).map_or(&[], Vec::as_slice)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn tails(&self, head: EntityId, relation: Relation) -> &[EntityId] {
        self.tails.get(&(head, relation)).map_or(&[], Vec::as_slice)
    }

    /// Triples grouped by `(head, relation)` with their full tail sets.
    pub fn positive_triples(&self) -> impl Iterator<Item = (EntityId, Relation, &[EntityId])> {
        self.tails.iter().map(|(&(h, r), t)| (h, r, t.as_slice()))
    }

    fn feature_entity(&mut self, kind: FeatureKind, name: String, bin: Bin) -> EntityId {
        self.intern(EntityKey::Feature { kind, name, bin })
    }

    fn add_pair(&mut self, p: &PairFeatures, bins: &DiscretizationMap) -> Result<()> {
        let neg = self.options.include_negative_booleans;
        let ds = self.intern(EntityKey::Dataset { pair: p.id.clone() });
        let mut columns = [0; 2];
        let mut single: [Vec<EntityId>; 2] = [Vec::new(), Vec::new()];
        let mut axes = [0; 2];
        for i in 0..2 {
            let name = &p.columns[i];
            let col = self.intern(EntityKey::Column {
                pair: p.id.clone(),
                name: name.clone(),
            });
            columns[i] = col;
            for (fname, bin) in active_bins(p.column_features(i), bins, neg)? {
                let sf = self.feature_entity(FeatureKind::Single, fname, bin);
                single[i].push(sf);
                self.triples.push(Triple {
                    head: sf,
                    relation: Relation::SfCol,
                    tail: col,
                });
            }
            single[i].sort_unstable();
            self.triples.push(Triple {
                head: col,
                relation: Relation::ColDs,
                tail: ds,
            });
            axes[i] = Self::axis_entity(p.axes[i]);
            self.triples.push(Triple {
                head: col,
                relation: Relation::ColAxis,
                tail: axes[i],
            });
        }
        let mut cross = Vec::new();
        for (fname, bin) in active_bins(&p.cross, bins, neg)? {
            let cf = self.feature_entity(FeatureKind::Cross, fname, bin);
            cross.push(cf);
            self.triples.push(Triple {
                head: cf,
                relation: Relation::CfDs,
                tail: ds,
            });
        }
        cross.sort_unstable();
        let chart_type = Self::type_entity(p.chart_type);
        self.triples.push(Triple {
            head: ds,
            relation: Relation::DsType,
            tail: chart_type,
        });
        self.instances.push(Instance {
            pair: p.id.clone(),
            dataset: ds,
            columns,
            single,
            cross,
            axes,
            chart_type,
        });
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::artifacts::write_json(path, &GraphFile::from(self))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: GraphFile = crate::artifacts::read_json(path)?;
        if file.schema != GRAPH_SCHEMA {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                expected: GRAPH_SCHEMA.to_string(),
                got: file.schema,
            });
        }
        file.into_graph()
    }
}

/// Builds the graph from training-split features. Feature and column
/// entities are created on first sight, so ids follow corpus order.
pub fn build_graph(
    dump: &FeatureDump,
    bins: &DiscretizationMap,
    options: GraphOptions,
) -> Result<KnowledgeGraph> {
    if dump.split == Some(Split::Test) {
        return Err(Error::LeakageGuard(
            "the graph must be built from the training split".into(),
        ));
    }
    let mut kg = KnowledgeGraph::vocabulary(options, bins.fingerprint());
    for p in &dump.pairs {
        kg.add_pair(p, bins)?;
    }
    kg.rebuild_index();
    Ok(kg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    schema: String,
    bins_fingerprint: String,
    options: GraphOptions,
    entities: Vec<EntityRow>,
    triples: Vec<(EntityId, Relation, EntityId)>,
    instances: Vec<Instance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntityRow {
    id: EntityId,
    label: String,
    key: EntityKey,
}

impl From<&KnowledgeGraph> for GraphFile {
    fn from(kg: &KnowledgeGraph) -> Self {
        GraphFile {
            schema: GRAPH_SCHEMA.to_string(),
            bins_fingerprint: kg.bins_fingerprint.clone(),
            options: kg.options,
            entities: kg
                .entities
                .iter()
                .enumerate()
                .map(|(id, key)| EntityRow {
                    id,
                    label: key.to_string(),
                    key: key.clone(),
                })
                .collect(),
            triples: kg
                .triples
                .iter()
                .map(|t| (t.head, t.relation, t.tail))
                .collect(),
            instances: kg.instances.clone(),
        }
    }
}

impl GraphFile {
    fn into_graph(self) -> Result<KnowledgeGraph> {
        let mut kg = KnowledgeGraph {
            entities: Vec::new(),
            ids: HashMap::new(),
            triples: Vec::new(),
            tails: BTreeMap::new(),
            by_class: BTreeMap::new(),
            instances: self.instances,
            options: self.options,
            bins_fingerprint: self.bins_fingerprint,
        };
        for row in self.entities {
            if row.id != kg.entities.len() || kg.ids.contains_key(&row.key) {
                return Err(Error::InvalidArgument(format!(
                    "graph entity table is not dense and unique at id {}",
                    row.id
                )));
            }
            kg.intern(row.key);
        }
        let n = kg.entities.len();
        for (head, relation, tail) in self.triples {
            if head >= n || tail >= n {
                return Err(Error::InvalidArgument(format!(
                    "triple references unknown entity ({head}, {tail})"
                )));
            }
            kg.triples.push(Triple {
                head,
                relation,
                tail,
            });
        }
        kg.rebuild_index();
        Ok(kg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub entities: BTreeMap<EntityClass, usize>,
    pub triples: BTreeMap<Relation, usize>,
    /// For each relation, how many `(head, relation)` groups have a given
    /// number of tails.
    pub tail_set_sizes: BTreeMap<Relation, BTreeMap<usize, usize>>,
}

pub fn graph_stats(kg: &KnowledgeGraph) -> GraphStats {
    let entities = EntityClass::ALL
        .iter()
        .map(|&c| (c, kg.class_members(c).len()))
        .collect();
    let mut triples: BTreeMap<Relation, usize> = Relation::ALL.iter().map(|&r| (r, 0)).collect();
    for t in kg.triples() {
        *triples.get_mut(&t.relation).unwrap() += 1;
    }
    let mut tail_set_sizes: BTreeMap<Relation, BTreeMap<usize, usize>> = BTreeMap::new();
    for (_, r, tails) in kg.positive_triples() {
        *tail_set_sizes
            .entry(r)
            .or_default()
            .entry(tails.len())
            .or_default() += 1;
    }
    GraphStats {
        entities,
        triples,
        tail_set_sizes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Column, DatasetPair};
    use crate::discretizer::{fit_all, BinSpec, BINS_SCHEMA};
    use crate::features::{extract_pair, FeatureDump, DUMP_SCHEMA};
    use crate::synth::{generate_synthetic_corpus, Rulebook};

    fn dump_of(n: usize, seed: u64) -> FeatureDump {
        let c = generate_synthetic_corpus(n, &Rulebook::singleton(), seed).unwrap();
        FeatureDump::from_corpus(&c).unwrap()
    }

    fn classes_ok(kg: &KnowledgeGraph) {
        for t in kg.triples() {
            assert_eq!(kg.key(t.head).class(), t.relation.head_class(), "{t:?}");
            assert_eq!(kg.key(t.tail).class(), t.relation.tail_class(), "{t:?}");
        }
    }

    #[test]
    fn empty_corpus_has_only_vocabulary() {
        let dump = dump_of(4, 1);
        let bins = fit_all(&dump).unwrap();
        let empty = FeatureDump {
            schema: DUMP_SCHEMA.into(),
            split: None,
            pairs: vec![],
        };
        let kg = build_graph(&empty, &bins, GraphOptions::default()).unwrap();
        let s = graph_stats(&kg);
        assert_eq!(kg.len(), 6);
        assert_eq!(s.entities[&EntityClass::Axis], 2);
        assert_eq!(s.entities[&EntityClass::Type], 4);
        assert_eq!(s.entities[&EntityClass::Column], 0);
        assert!(s.triples.values().all(|&n| n == 0));
        assert_eq!(KnowledgeGraph::type_entity(ChartType::Box), 5);
        assert_eq!(
            kg.key(KnowledgeGraph::axis_entity(Axis::Y)),
            &EntityKey::Axis(Axis::Y)
        );
    }

    #[test]
    fn structural_invariants() {
        let dump = dump_of(40, 2);
        let bins = fit_all(&dump).unwrap();
        let kg = build_graph(&dump, &bins, GraphOptions::default()).unwrap();
        classes_ok(&kg);
        for &col in kg.class_members(EntityClass::Column) {
            assert_eq!(kg.tails(col, Relation::ColDs).len(), 1);
            assert_eq!(kg.tails(col, Relation::ColAxis).len(), 1);
            let sf = kg
                .triples()
                .iter()
                .filter(|t| t.relation == Relation::SfCol && t.tail == col)
                .count();
            assert!(sf >= 1);
        }
        for &ds in kg.class_members(EntityClass::Dataset) {
            let incoming = kg
                .triples()
                .iter()
                .filter(|t| t.relation == Relation::ColDs && t.tail == ds)
                .count();
            assert_eq!(incoming, 2);
            assert_eq!(kg.tails(ds, Relation::DsType).len(), 1);
        }
        // index and triple list agree
        let total: usize = kg.positive_triples().map(|(_, _, t)| t.len()).sum();
        assert_eq!(total, kg.triples().len());
        for (h, r, tails) in kg.positive_triples() {
            for &t in tails {
                assert!(kg
                    .triples()
                    .binary_search(&Triple {
                        head: h,
                        relation: r,
                        tail: t
                    })
                    .is_ok());
            }
        }
        let groups: std::collections::BTreeSet<_> =
            kg.triples().iter().map(|t| (t.head, t.relation)).collect();
        assert_eq!(groups.len(), kg.positive_triples().count());
        // no false booleans by default
        for key in kg.entities() {
            if let EntityKey::Feature { bin, .. } = key {
                assert_ne!(*bin, Bin::Flag(false));
            }
        }
        assert_eq!(graph_stats(&kg), graph_stats(&kg));
    }

    #[test]
    fn hand_counted_fixture() {
        let pair = DatasetPair::new(
            "p0",
            [
                Column::from_strs("a", &["1", "2", "3", "4"]).unwrap(),
                Column::from_strs("b", &["x", "y", "x", "z"]).unwrap(),
            ],
            ChartType::Bar,
            [Axis::Y, Axis::X],
        )
        .unwrap();
        let pf = extract_pair(&pair).unwrap();
        // keep just three single features and two cross features
        let mut features = BTreeMap::new();
        for name in [
            "length",
            "sortedness",
            "num_none",
            "edit_distance",
            "nestedness",
        ] {
            features.insert(
                name.to_string(),
                BinSpec {
                    cuts: vec![1.5],
                    missing_bin: true,
                },
            );
        }
        let bins = DiscretizationMap {
            schema: BINS_SCHEMA.into(),
            features,
            booleans: vec![],
        };
        let mut pf = pf;
        for m in pf.single.values_mut() {
            m.retain(|k, _| ["length", "sortedness", "num_none"].contains(&k.as_str()));
        }
        pf.cross
            .retain(|k, _| ["edit_distance", "nestedness"].contains(&k.as_str()));
        let dump = FeatureDump {
            schema: DUMP_SCHEMA.into(),
            split: None,
            pairs: vec![pf],
        };
        let kg = build_graph(&dump, &bins, GraphOptions::default()).unwrap();
        let s = graph_stats(&kg);
        assert!(s.entities[&EntityClass::SingleFeature] <= 6);
        assert_eq!(s.entities[&EntityClass::CrossFeature], 2);
        assert_eq!(s.entities[&EntityClass::Column], 2);
        assert_eq!(s.entities[&EntityClass::Dataset], 1);
        // each of the three features lands in the same bin for both columns
        assert_eq!(s.entities[&EntityClass::SingleFeature], 3);
        assert_eq!(s.triples[&Relation::SfCol], 6);
        assert_eq!(s.triples[&Relation::CfDs], 2);
        classes_ok(&kg);
    }

    #[test]
    fn rebuild_is_identical_and_roundtrips() {
        let dump = dump_of(20, 5);
        let bins = fit_all(&dump).unwrap();
        let a = build_graph(&dump, &bins, GraphOptions::default()).unwrap();
        let b = build_graph(&dump, &bins, GraphOptions::default()).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        a.save(&path).unwrap();
        assert_eq!(KnowledgeGraph::load(&path).unwrap(), a);
    }

    #[test]
    fn negative_booleans_flag() {
        let dump = dump_of(10, 6);
        let bins = fit_all(&dump).unwrap();
        let opts = GraphOptions {
            include_negative_booleans: true,
        };
        let kg = build_graph(&dump, &bins, opts).unwrap();
        assert!(kg.entities().iter().any(|k| matches!(
            k,
            EntityKey::Feature {
                bin: Bin::Flag(false),
                ..
            }
        )));
    }

    #[test]
    fn test_split_is_refused() {
        let mut dump = dump_of(4, 1);
        let bins = fit_all(&dump).unwrap();
        dump.split = Some(Split::Test);
        assert!(matches!(
            build_graph(&dump, &bins, GraphOptions::default()),
            Err(Error::LeakageGuard(_))
        ));
    }
}
