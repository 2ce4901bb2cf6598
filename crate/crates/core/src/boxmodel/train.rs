//! Training queries, per-sample gradients and the Adam loop.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{dist_box, dist_box_grad};
use super::loss::{loss, loss_grad};
use super::model::Model;
use super::params::{init_params, Layout};
use super::query::{backward, forward, Node, ParamView, Query};
use super::sampling::negative_sample;
use super::{Hyperparams, ModelOptions};
use crate::error::{Error, Result};
use crate::kgraph::{EntityClass, EntityId, KnowledgeGraph, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryKind {
    OneHop(Relation),
    /// Single-column feature boxes intersected into a column box.
    Column,
    /// Column and cross-column feature boxes intersected into a dataset box.
    Dataset,
    /// Column box from features, projected to the axis vocabulary.
    AxisChain,
    /// Dataset box from features, projected to the type vocabulary.
    TypeChain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainQuery {
    pub query: Query,
    /// Every correct tail, sorted.
    pub answers: Vec<EntityId>,
    pub tail_class: EntityClass,
    pub kind: QueryKind,
}

/// Queries plus one `(query, positive tail)` sample per training signal.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub queries: Vec<TrainQuery>,
    pub samples: Vec<(usize, EntityId)>,
}

/// Intersection of the single-column feature projections.
pub fn column_query(features: &[EntityId]) -> Query {
    Query::Intersect(
        features
            .iter()
            .map(|&e| Query::Anchor(e).project(Relation::SfCol))
            .collect(),
    )
}

/// Dataset-level intersection of two column boxes and the cross-column
/// feature projections.
pub fn dataset_query(columns: Vec<Query>, cross: &[EntityId], options: &ModelOptions) -> Query {
    let mut branches: Vec<Query> = columns
        .into_iter()
        .map(|q| {
            if options.project_columns_before_ds_intersection {
                q.project(Relation::ColDs)
            } else {
                q
            }
        })
        .collect();
    if options.use_cross_features {
        branches.extend(
            cross
                .iter()
                .map(|&e| Query::Anchor(e).project(Relation::CfDs)),
        );
    }
    Query::Intersect(branches)
}

fn intersect_sorted(a: &[EntityId], b: &[EntityId]) -> Vec<EntityId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Builds the training queries: every `(head, relation)` group, the
/// feature→column and column/feature→dataset intersections, and the axis
/// and type chains. Chains with identical structure share one query whose
/// answer set is the union of the labels of all instances behind it.
pub fn training_set(kg: &KnowledgeGraph, options: &ModelOptions) -> TrainingSet {
    let mut set = TrainingSet::default();
    let push = |set: &mut TrainingSet, q: TrainQuery, positives: Vec<EntityId>| {
        let idx = set.queries.len();
        set.queries.push(q);
        set.samples.extend(positives.into_iter().map(|t| (idx, t)));
    };

    for (h, r, tails) in kg.positive_triples() {
        let skip = match r {
            Relation::CfDs => !options.use_cross_features,
            Relation::ColAxis => !options.tasks.axis(),
            Relation::DsType => !options.tasks.types(),
            _ => false,
        };
        if skip {
            continue;
        }
        push(
            &mut set,
            TrainQuery {
                query: Query::Anchor(h).project(r),
                answers: tails.to_vec(),
                tail_class: r.tail_class(),
                kind: QueryKind::OneHop(r),
            },
            tails.to_vec(),
        );
    }

    let mut axis_chains: HashMap<Vec<EntityId>, (BTreeSet<EntityId>, Vec<EntityId>)> =
        HashMap::new();
    let mut axis_order: Vec<Vec<EntityId>> = Vec::new();
    type TypeKey = (Vec<Vec<EntityId>>, Vec<EntityId>);
    let mut type_chains: HashMap<TypeKey, (BTreeSet<EntityId>, Vec<EntityId>)> = HashMap::new();
    let mut type_order: Vec<TypeKey> = Vec::new();

    for inst in &kg.instances {
        for i in 0..2 {
            let sfs = &inst.single[i];
            if sfs.is_empty() {
                continue;
            }
            let mut answers = kg.tails(sfs[0], Relation::SfCol).to_vec();
            for &sf in &sfs[1..] {
                answers = intersect_sorted(&answers, kg.tails(sf, Relation::SfCol));
            }
            push(
                &mut set,
                TrainQuery {
                    query: column_query(sfs),
                    answers,
                    tail_class: EntityClass::Column,
                    kind: QueryKind::Column,
                },
                vec![inst.columns[i]],
            );
            if options.tasks.axis() {
                let e = axis_chains.entry(sfs.clone()).or_insert_with(|| {
                    axis_order.push(sfs.clone());
                    Default::default()
                });
                e.0.insert(inst.axes[i]);
                e.1.push(inst.axes[i]);
            }
        }

        let mut ds_branches: Vec<Query> = inst
            .columns
            .iter()
            .map(|&c| Query::Anchor(c).project(Relation::ColDs))
            .collect();
        if options.use_cross_features {
            ds_branches.extend(
                inst.cross
                    .iter()
                    .map(|&e| Query::Anchor(e).project(Relation::CfDs)),
            );
        }
        push(
            &mut set,
            TrainQuery {
                query: Query::Intersect(ds_branches),
                answers: vec![inst.dataset],
                tail_class: EntityClass::Dataset,
                kind: QueryKind::Dataset,
            },
            vec![inst.dataset],
        );

        if options.tasks.types() {
            let mut cols: Vec<Vec<EntityId>> = inst
                .single
                .iter()
                .filter(|s| !s.is_empty())
                .cloned()
                .collect();
            cols.sort();
            let cross = if options.use_cross_features {
                inst.cross.clone()
            } else {
                Vec::new()
            };
            if cols.is_empty() && cross.is_empty() {
                continue;
            }
            let key = (cols, cross);
            let e = type_chains.entry(key.clone()).or_insert_with(|| {
                type_order.push(key);
                Default::default()
            });
            e.0.insert(inst.chart_type);
            e.1.push(inst.chart_type);
        }
    }

    for key in axis_order {
        let (answers, positives) = axis_chains.remove(&key).unwrap();
        push(
            &mut set,
            TrainQuery {
                query: column_query(&key).project(Relation::ColAxis),
                answers: answers.into_iter().collect(),
                tail_class: EntityClass::Axis,
                kind: QueryKind::AxisChain,
            },
            positives,
        );
    }
    for key in type_order {
        let (answers, positives) = type_chains.remove(&key).unwrap();
        let (cols, cross) = key;
        let columns = cols.iter().map(|c| column_query(c)).collect();
        push(
            &mut set,
            TrainQuery {
                query: dataset_query(columns, &cross, options).project(Relation::DsType),
                answers: answers.into_iter().collect(),
                tail_class: EntityClass::Type,
                kind: QueryKind::TypeChain,
            },
            positives,
        );
    }
    set
}

/// Loss of one evaluated query against a positive and its negatives; when
/// `grad` is given, adds `scale · ∂loss/∂θ` into it.
pub fn sample_loss(
    p: &ParamView<'_>,
    node: &Node,
    positive: EntityId,
    negatives: &[EntityId],
    hyper: &Hyperparams,
    grad: Option<(&mut [f64], f64)>,
) -> Result<f64> {
    let (c, o) = (&node.center, &node.offset);
    let (a, b) = (hyper.alpha, hyper.beta);
    let d_pos = dist_box(p.point(positive), c, o, a, b);
    let d_neg: Vec<f64> = negatives
        .iter()
        .map(|&t| dist_box(p.point(t), c, o, a, b))
        .collect();
    let l = loss(d_pos, &d_neg, hyper.gamma)?;
    if let Some((grad, scale)) = grad {
        let (g_pos, g_neg) = loss_grad(d_pos, &d_neg, hyper.gamma);
        let d = p.layout.d;
        let mut dc = vec![0.0; d];
        let mut doff = vec![0.0; d];
        let mut dt = vec![0.0; d];
        for (&t, g) in std::iter::once(&positive)
            .chain(negatives)
            .zip(std::iter::once(g_pos).chain(g_neg))
        {
            dt.iter_mut().for_each(|x| *x = 0.0);
            dist_box_grad(
                p.point(t),
                c,
                o,
                a,
                b,
                scale * g,
                &mut dt,
                &mut dc,
                &mut doff,
            );
            for (gx, v) in grad[p.layout.point(t)].iter_mut().zip(&dt) {
                *gx += v;
            }
        }
        backward(p, node, &dc, &doff, grad);
    }
    Ok(l)
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPS: f64 = 1e-8;

    pub fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let step = lr / c1;
        for i in 0..theta.len() {
            let g = grad[i];
            let m = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            let v = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            self.m[i] = m;
            self.v[i] = v;
            theta[i] -= step * m / ((v / c2).sqrt() + Self::EPS);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_queries: usize,
    pub n_samples: usize,
    /// Samples skipped for lack of negatives, summed over epochs.
    pub skipped: usize,
    /// Mean loss over all samples before the first update, with a fixed
    /// evaluation stream of negatives.
    pub initial_loss: f64,
    /// The same measurement after the last update.
    pub final_loss: f64,
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

struct Sampler<'a> {
    kg: &'a KnowledgeGraph,
    set: &'a TrainingSet,
    k: usize,
}

impl Sampler<'_> {
    fn negatives(&self, query: usize, rng: &mut ChaCha8Rng) -> Option<Vec<EntityId>> {
        let q = &self.set.queries[query];
        negative_sample(self.kg.class_members(q.tail_class), &q.answers, self.k, rng)
    }
}

/// Mean loss over the whole training set at `theta`, with negatives drawn
/// from a generator seeded by `seed`.
pub fn mean_loss(
    kg: &KnowledgeGraph,
    set: &TrainingSet,
    theta: &[f64],
    layout: Layout,
    hyper: &Hyperparams,
    seed: u64,
) -> Result<f64> {
    let p = ParamView::new(theta, layout);
    let sampler = Sampler {
        kg,
        set,
        k: hyper.k,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Option<Node>> = vec![None; set.queries.len()];
    let (mut total, mut n) = (0.0, 0usize);
    for &(qi, pos) in &set.samples {
        let Some(negs) = sampler.negatives(qi, &mut rng) else {
            continue;
        };
        if nodes[qi].is_none() {
            nodes[qi] = Some(forward(&p, &set.queries[qi].query)?);
        }
        total += sample_loss(&p, nodes[qi].as_ref().unwrap(), pos, &negs, hyper, None)?;
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { total / n as f64 })
}

/// Trains box embeddings for every entity of `kg`.
pub fn train(
    kg: &KnowledgeGraph,
    hyper: &Hyperparams,
    options: &ModelOptions,
) -> Result<(Model, TrainReport)> {
    hyper.validate()?;
    let layout = Layout::new(kg.len(), hyper.d);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut theta = init_params(&layout, hyper.gamma, &mut rng);
    let set = training_set(kg, options);
    let sampler = Sampler {
        kg,
        set: &set,
        k: hyper.k,
    };
    let eval_seed = hyper.seed ^ 0x005e_ed0f_e7a1;
    let initial_loss = mean_loss(kg, &set, &theta, layout, hyper, eval_seed)?;

    let mut adam = Adam::new(theta.len());
    let mut grad = vec![0.0; theta.len()];
    let mut order: Vec<usize> = (0..set.samples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut skipped = 0;
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut n) = (0.0, 0usize);
        let mut skipped_epoch = 0;
        for batch in order.chunks(hyper.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut drawn = Vec::with_capacity(batch.len());
            for &si in batch {
                let (qi, pos) = set.samples[si];
                match sampler.negatives(qi, &mut rng) {
                    Some(negs) => drawn.push((qi, pos, negs)),
                    None => skipped_epoch += 1,
                }
            }
            if drawn.is_empty() {
                continue;
            }
            let scale = 1.0 / drawn.len() as f64;
            {
                let p = ParamView::new(&theta, layout);
                for (qi, pos, negs) in &drawn {
                    let node = forward(&p, &set.queries[*qi].query)?;
                    total += sample_loss(&p, &node, *pos, negs, hyper, Some((&mut grad, scale)))?;
                    n += 1;
                }
            }
            adam.step(&mut theta, &grad, hyper.lr);
            for g in &mut theta[layout.growths()] {
                *g = g.max(0.0);
            }
        }
        let mean = if n == 0 { 0.0 } else { total / n as f64 };
        if !mean.is_finite() {
            return Err(Error::Divergence {
                epoch: epoch + 1,
                message: format!("mean loss is {mean}"),
            });
        }
        if skipped_epoch > 0 && epoch == 0 {
            log::warn!(
                "skipping {skipped_epoch} samples per epoch whose tail class has no negatives"
            );
        }
        skipped += skipped_epoch;
        log::info!("epoch {}/{}: loss {mean:.6}", epoch + 1, hyper.epochs);
        epoch_losses.push(mean);
    }
    let final_loss = mean_loss(kg, &set, &theta, layout, hyper, eval_seed)?;
    let report = TrainReport {
        n_queries: set.queries.len(),
        n_samples: set.samples.len(),
        skipped,
        initial_loss,
        final_loss,
        epoch_losses: epoch_losses.clone(),
    };
    let model = Model::from_training(kg, *hyper, *options, layout, theta, epoch_losses);
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretizer::fit_all;
    use crate::features::FeatureDump;
    use crate::kgraph::{build_graph, GraphOptions};
    use crate::synth::{generate_synthetic_corpus, Rulebook};

    fn graph(n: usize) -> KnowledgeGraph {
        let c = generate_synthetic_corpus(n, &Rulebook::singleton(), 3).unwrap();
        let dump = FeatureDump::from_corpus(&c).unwrap();
        let bins = fit_all(&dump).unwrap();
        build_graph(&dump, &bins, GraphOptions::default()).unwrap()
    }

    fn small_hyper() -> Hyperparams {
        Hyperparams {
            d: 8,
            epochs: 50,
            batch_size: 64,
            lr: 0.01,
            seed: 3,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn loss_decreases() {
        let kg = graph(2);
        let (_, report) = train(&kg, &small_hyper(), &ModelOptions::default()).unwrap();
        assert!(report.final_loss < report.initial_loss, "{report:?}");
        assert_eq!(report.epoch_losses.len(), 50);
    }

    #[test]
    fn deterministic() {
        let kg = graph(6);
        let h = Hyperparams {
            epochs: 3,
            ..small_hyper()
        };
        let (a, _) = train(&kg, &h, &ModelOptions::default()).unwrap();
        let (b, _) = train(&kg, &h, &ModelOptions::default()).unwrap();
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let kg = graph(4);
        let h = Hyperparams {
            lr: 0.0,
            epochs: 2,
            ..small_hyper()
        };
        let (m, _) = train(&kg, &h, &ModelOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
        let init = init_params(&m.layout(), h.gamma, &mut rng);
        assert_eq!(m.theta(), init.as_slice());
    }

    #[test]
    fn growths_stay_non_negative() {
        let kg = graph(6);
        let h = Hyperparams {
            lr: 0.5,
            epochs: 3,
            ..small_hyper()
        };
        let (m, _) = train(&kg, &h, &ModelOptions::default()).unwrap();
        assert!(m.theta()[m.layout().growths()].iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn training_set_shape() {
        let kg = graph(10);
        let set = training_set(&kg, &ModelOptions::default());
        let count = |k: QueryKind| set.queries.iter().filter(|q| q.kind == k).count();
        assert_eq!(count(QueryKind::Column), 20);
        assert_eq!(count(QueryKind::Dataset), 10);
        assert!(count(QueryKind::AxisChain) >= 1);
        assert!(count(QueryKind::TypeChain) >= 1);
        for q in &set.queries {
            assert!(q.answers.windows(2).all(|w| w[0] < w[1]));
            let members = kg.class_members(q.tail_class);
            assert!(q.answers.iter().all(|a| members.contains(a)));
        }
        for &(qi, pos) in &set.samples {
            assert!(set.queries[qi].answers.contains(&pos));
        }
        let no_cf = training_set(
            &kg,
            &ModelOptions {
                use_cross_features: false,
                ..ModelOptions::default()
            },
        );
        assert!(no_cf
            .queries
            .iter()
            .all(|q| q.kind != QueryKind::OneHop(Relation::CfDs)));
    }

    #[test]
    fn model_roundtrip() {
        let kg = graph(4);
        let h = Hyperparams {
            epochs: 1,
            ..small_hyper()
        };
        let (m, _) = train(&kg, &h, &ModelOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(Model::load(&path).unwrap(), m);
    }
}
