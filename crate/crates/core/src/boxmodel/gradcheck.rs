//! Finite-difference check of the hand-derived gradients.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{region, Region};
use super::params::Layout;
use super::query::{forward, Node, NodeKind, ParamView, Query};
use super::train::sample_loss;
use super::Hyperparams;
use crate::error::Result;
use crate::kgraph::{EntityId, Relation};

/// Denominator floor of the relative error, so that coordinates whose true
/// derivative is zero are judged on absolute error.
pub const REL_FLOOR: f64 = 1e-6;

/// Perturbation radius, in multiples of ε, within which a kink disqualifies
/// a coordinate.
pub const KINK_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GradSample {
    pub query: Query,
    pub positive: EntityId,
    pub negatives: Vec<EntityId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub rejected: usize,
}

/// Mean sample loss over the batch; with `grad`, also its gradient.
pub fn batch_loss(
    theta: &[f64],
    layout: Layout,
    batch: &[GradSample],
    hyper: &Hyperparams,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let p = ParamView::new(theta, layout);
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for s in batch {
        let node = forward(&p, &s.query)?;
        let g = grad.as_deref_mut().map(|g| (g, scale));
        total += sample_loss(&p, &node, s.positive, &s.negatives, hyper, g)?;
    }
    Ok(total * scale)
}

fn walk_argmins(node: &Node, out: &mut Vec<i64>) {
    match &node.kind {
        NodeKind::Anchor(_) => {}
        NodeKind::Project { child, .. } => walk_argmins(child, out),
        NodeKind::Intersect { children, cache } => {
            out.extend(cache.argmin.iter().map(|&i| i as i64));
            for c in children {
                walk_argmins(c, out);
            }
        }
    }
}

/// Every discrete choice the loss makes at `theta`: minimum-offset
/// branches, per-coordinate tail regions and zero-size boxes. The loss is
/// smooth wherever this stays constant.
pub fn kink_signature(theta: &[f64], layout: Layout, batch: &[GradSample]) -> Result<Vec<i64>> {
    let p = ParamView::new(theta, layout);
    let mut out = Vec::new();
    for s in batch {
        let node = forward(&p, &s.query)?;
        walk_argmins(&node, &mut out);
        out.push(i64::from(node.offset.iter().all(|&o| o == 0.0)));
        for &t in std::iter::once(&s.positive).chain(&s.negatives) {
            let tp = p.point(t);
            for ((&t, &c), &o) in tp.iter().zip(&node.center).zip(&node.offset) {
                out.push(match region(t, c, o) {
                    Region::Above => 2,
                    Region::Below => -2,
                    Region::Inside(s) => i64::from(s),
                });
            }
        }
    }
    Ok(out)
}

fn candidates(layout: Layout, batch: &[GradSample]) -> Vec<usize> {
    let mut entities: Vec<EntityId> = Vec::new();
    for s in batch {
        entities.extend(s.query.anchors());
        entities.push(s.positive);
        entities.extend(&s.negatives);
    }
    entities.sort_unstable();
    entities.dedup();
    let mut out: Vec<usize> = entities.iter().flat_map(|&e| layout.point(e)).collect();
    for r in Relation::ALL {
        out.extend(layout.shift(r));
        out.extend(layout.growth(r));
    }
    out.extend(layout.attention());
    out
}

/// Compares analytic gradients with central differences on up to
/// `n_coords` random coordinates touched by the batch. Coordinates whose
/// kink signature changes within `KINK_RADIUS · eps` are skipped.
pub fn grad_check(
    theta: &[f64],
    layout: Layout,
    batch: &[GradSample],
    hyper: &Hyperparams,
    eps: f64,
    n_coords: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GradCheckReport> {
    let mut analytic = vec![0.0; theta.len()];
    batch_loss(theta, layout, batch, hyper, Some(&mut analytic))?;
    let base = kink_signature(theta, layout, batch)?;
    let mut coords = candidates(layout, batch);
    coords.shuffle(rng);

    let mut work = theta.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        rejected: 0,
    };
    for i in coords {
        if report.checked == n_coords {
            break;
        }
        let orig = work[i];
        let mut smooth = true;
        for sign in [-1.0, 1.0] {
            work[i] = orig + sign * KINK_RADIUS * eps;
            if kink_signature(&work, layout, batch)? != base {
                smooth = false;
            }
        }
        if !smooth {
            work[i] = orig;
            report.rejected += 1;
            continue;
        }
        work[i] = orig + eps;
        let up = batch_loss(&work, layout, batch, hyper, None)?;
        work[i] = orig - eps;
        let down = batch_loss(&work, layout, batch, hyper, None)?;
        work[i] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    Ok(report)
}

/// Draws `size` random samples with fresh negatives from a training set.
pub fn random_batch(
    kg: &crate::kgraph::KnowledgeGraph,
    set: &super::train::TrainingSet,
    size: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<GradSample> {
    use rand::Rng;
    let mut out = Vec::with_capacity(size);
    while out.len() < size && !set.samples.is_empty() {
        let (qi, positive) = set.samples[rng.random_range(0..set.samples.len())];
        let q = &set.queries[qi];
        let class = kg.class_members(q.tail_class);
        if let Some(negatives) = super::sampling::negative_sample(class, &q.answers, k, rng) {
            out.push(GradSample {
                query: q.query.clone(),
                positive,
                negatives,
            });
        }
    }
    out
}
