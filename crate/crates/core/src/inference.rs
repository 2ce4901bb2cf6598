//! Axis and chart-type recommendation for an unseen two-column dataset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boxmodel::geometry::{contains, dist_box, project};
use crate::boxmodel::query::{forward, Node, NodeKind};
use crate::boxmodel::train::{column_query, dataset_query};
use crate::boxmodel::{BoxEmbedding, Model};
use crate::corpus::{Axis, ChartType, DatasetPair};
use crate::discretizer::{Bin, DiscretizationMap};
use crate::error::{Error, Result};
use crate::features::{extract_pair, FeatureKind, FeatureMap, PairFeatures};
use crate::kgraph::{active_bins, EntityId, EntityKey, KnowledgeGraph, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceOptions {
    /// Slack on every side of the type box when testing containment.
    pub containment_tol: f64,
    /// When false, cross-column branches are left out of the dataset box.
    pub use_cross_features: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            containment_tol: 0.0,
            use_cross_features: true,
        }
    }
}

/// One feature branch of an intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBranch {
    pub feature: String,
    pub scope: FeatureKind,
    pub bin: Bin,
    pub entity: String,
    pub weight: f64,
    pub branch_box: BoxEmbedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTrace {
    pub column: String,
    /// Column-level attention over single-column feature branches.
    pub branches: Vec<FeatureBranch>,
    pub column_box: BoxEmbedding,
    pub axis_box: BoxEmbedding,
    /// Attention of the dataset-level intersection on this column.
    pub dataset_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceTrace {
    pub columns: Vec<ColumnTrace>,
    /// Dataset-level attention over cross-column feature branches.
    pub cross: Vec<FeatureBranch>,
    pub dataset_box: BoxEmbedding,
    pub type_box: BoxEmbedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisScores {
    pub x: f64,
    pub y: f64,
}

impl AxisScores {
    pub fn get(&self, a: Axis) -> f64 {
        match a {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// The closer axis; ties go to x.
    pub fn preferred(&self) -> Axis {
        if self.y < self.x {
            Axis::Y
        } else {
            Axis::X
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedType {
    #[serde(rename = "type")]
    pub chart_type: ChartType,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: String,
    /// Column name to axis.
    pub axes: BTreeMap<String, Axis>,
    pub axis_scores: BTreeMap<String, AxisScores>,
    /// All four types by distance, closest first.
    pub ranking: Vec<RankedType>,
    /// Types whose entity lies in the type box.
    pub contained: Vec<ChartType>,
    /// The contained set, or the top-ranked type when it is empty.
    pub recommended: Vec<ChartType>,
    pub ranked_fallback: bool,
    pub trace: InferenceTrace,
}

/// Assigns one column to each axis at minimum total distance. The
/// identity assignment wins ties.
pub fn resolve_axes(scores: [AxisScores; 2]) -> [Axis; 2] {
    let identity = scores[0].x + scores[1].y;
    let swapped = scores[0].y + scores[1].x;
    if swapped < identity {
        [Axis::Y, Axis::X]
    } else {
        [Axis::X, Axis::Y]
    }
}

/// Distances of the projected column box to the two axis entities.
pub fn recommend_axis(
    model: &Model,
    column_box: &BoxEmbedding,
) -> Result<(BoxEmbedding, AxisScores)> {
    let p = model.view();
    let h = &model.hyper;
    let b = project(
        column_box,
        p.shift(Relation::ColAxis),
        p.growth(Relation::ColAxis),
    )?;
    let score = |a: Axis| {
        dist_box(
            p.point(KnowledgeGraph::axis_entity(a)),
            &b.center,
            &b.offset,
            h.alpha,
            h.beta,
        )
    };
    let scores = AxisScores {
        x: score(Axis::X),
        y: score(Axis::Y),
    };
    Ok((b, scores))
}

/// Ranking of all four types by distance to the type box (ties in
/// bar, line, scatter, box order) and the set of contained types.
pub fn recommend_types(
    model: &Model,
    type_box: &BoxEmbedding,
    tol: f64,
) -> (Vec<ChartType>, Vec<RankedType>) {
    let p = model.view();
    let h = &model.hyper;
    let mut ranking: Vec<RankedType> = ChartType::ALL
        .iter()
        .map(|&t| RankedType {
            chart_type: t,
            score: dist_box(
                p.point(KnowledgeGraph::type_entity(t)),
                &type_box.center,
                &type_box.offset,
                h.alpha,
                h.beta,
            ),
        })
        .collect();
    ranking.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then(a.chart_type.index().cmp(&b.chart_type.index()))
    });
    let contained = ranking
        .iter()
        .map(|r| r.chart_type)
        .filter(|&t| {
            contains(
                &type_box.center,
                &type_box.offset,
                p.point(KnowledgeGraph::type_entity(t)),
                tol,
            )
        })
        .collect();
    (contained, ranking)
}

struct Resolved {
    ids: Vec<EntityId>,
    info: Vec<(String, Bin)>,
}

fn resolve(
    model: &Model,
    map: &FeatureMap,
    bins: &DiscretizationMap,
    kind: FeatureKind,
) -> Result<Resolved> {
    let mut found: Vec<(EntityId, String, Bin)> = Vec::new();
    for (name, bin) in active_bins(map, bins, model.graph_options.include_negative_booleans)? {
        let key = EntityKey::Feature {
            kind,
            name: name.clone(),
            bin,
        };
        match model.id_of(&key) {
            Some(id) => found.push((id, name, bin)),
            None => log::warn!("no trained entity for {key}; skipped"),
        }
    }
    found.sort_by_key(|f| f.0);
    Ok(Resolved {
        ids: found.iter().map(|f| f.0).collect(),
        info: found.into_iter().map(|f| (f.1, f.2)).collect(),
    })
}

fn intersect_parts(node: &Node) -> (&[Node], &[f64]) {
    match &node.kind {
        NodeKind::Intersect { children, cache } => (children, &cache.weights),
        _ => unreachable!("expected an intersection node"),
    }
}

fn unwrap_project(node: &Node) -> &Node {
    match &node.kind {
        NodeKind::Project { child, .. } => child,
        _ => node,
    }
}

fn branches(
    model: &Model,
    resolved: &Resolved,
    kind: FeatureKind,
    nodes: &[Node],
    weights: &[f64],
) -> Vec<FeatureBranch> {
    resolved
        .info
        .iter()
        .zip(&resolved.ids)
        .zip(nodes.iter().zip(weights))
        .map(|(((name, bin), &id), (node, &weight))| FeatureBranch {
            feature: name.clone(),
            scope: kind,
            bin: *bin,
            entity: model.key(id).to_string(),
            weight,
            branch_box: node.to_box(),
        })
        .collect()
}

/// Runs the full inference path on extracted features.
pub fn recommend_features(
    features: &PairFeatures,
    model: &Model,
    bins: &DiscretizationMap,
    options: &InferenceOptions,
) -> Result<Recommendation> {
    model.check_bins(bins)?;
    let p = model.view();
    let mut cols = Vec::with_capacity(2);
    for i in 0..2 {
        let r = resolve(
            model,
            features.column_features(i),
            bins,
            FeatureKind::Single,
        )?;
        if r.ids.is_empty() {
            return Err(Error::NoFeatures(features.columns[i].clone()));
        }
        cols.push(r);
    }
    let use_cf = options.use_cross_features && model.options.use_cross_features;
    let cross = if use_cf {
        resolve(model, &features.cross, bins, FeatureKind::Cross)?
    } else {
        Resolved {
            ids: Vec::new(),
            info: Vec::new(),
        }
    };
    let mut ds_options = model.options;
    ds_options.use_cross_features = use_cf;
    let query = dataset_query(
        cols.iter().map(|c| column_query(&c.ids)).collect(),
        &cross.ids,
        &ds_options,
    )
    .project(Relation::DsType);
    let root = forward(&p, &query)?;
    let ds_node = unwrap_project(&root);
    let (ds_children, ds_weights) = intersect_parts(ds_node);

    let mut column_traces = Vec::with_capacity(2);
    let mut scores = [AxisScores { x: 0.0, y: 0.0 }; 2];
    for i in 0..2 {
        let col_node = if model.options.project_columns_before_ds_intersection {
            unwrap_project(&ds_children[i])
        } else {
            &ds_children[i]
        };
        let (children, weights) = intersect_parts(col_node);
        let column_box = col_node.to_box();
        let (axis_box, s) = recommend_axis(model, &column_box)?;
        scores[i] = s;
        column_traces.push(ColumnTrace {
            column: features.columns[i].clone(),
            branches: branches(model, &cols[i], FeatureKind::Single, children, weights),
            column_box,
            axis_box,
            dataset_weight: ds_weights[i],
        });
    }
    let cross_branches = branches(
        model,
        &cross,
        FeatureKind::Cross,
        &ds_children[2..],
        &ds_weights[2..],
    );

    let axes = resolve_axes(scores);
    let type_box = root.to_box();
    let (contained, ranking) = recommend_types(model, &type_box, options.containment_tol);
    let ranked_fallback = contained.is_empty();
    let recommended = if ranked_fallback {
        vec![ranking[0].chart_type]
    } else {
        contained.clone()
    };
    Ok(Recommendation {
        id: features.id.clone(),
        axes: (0..2)
            .map(|i| (features.columns[i].clone(), axes[i]))
            .collect(),
        axis_scores: (0..2)
            .map(|i| (features.columns[i].clone(), scores[i]))
            .collect(),
        ranking,
        contained,
        recommended,
        ranked_fallback,
        trace: InferenceTrace {
            columns: column_traces,
            cross: cross_branches,
            dataset_box: ds_node.to_box(),
            type_box,
        },
    })
}

/// Extracts features from `pair` and recommends axes and chart types.
pub fn recommend(
    pair: &DatasetPair,
    model: &Model,
    bins: &DiscretizationMap,
    options: &InferenceOptions,
) -> Result<Recommendation> {
    model.check_bins(bins)?;
    recommend_features(&extract_pair(pair)?, model, bins, options)
}
