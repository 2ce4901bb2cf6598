//! Query trees over the graph, with forward evaluation and hand-derived
//! backward passes.
//!
//! Attention intersection of branches `(cᵢ, oᵢ)`:
//!
//! ```text
//! hᵢ = tanh(W1 [cᵢ; oᵢ] + b1)      sᵢ = u·hᵢ      w = softmax(s)
//! center = Σ wᵢ cᵢ
//! offset = minᵢ oᵢ ⊙ σ(G · meanᵢ hᵢ + gb)
//! ```
//!
//! The weights `w` double as feature attention for explanations.

use serde::{Deserialize, Serialize};

use super::geometry::BoxEmbedding;
use super::params::Layout;
use crate::error::{Error, Result};
use crate::kgraph::{EntityId, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Query {
    Anchor(EntityId),
    Project(Box<Query>, Relation),
    Intersect(Vec<Query>),
}

impl Query {
    pub fn project(self, r: Relation) -> Query {
        Query::Project(Box::new(self), r)
    }

    /// Anchors in depth-first order.
    pub fn anchors(&self) -> Vec<EntityId> {
        let mut out = Vec::new();
        self.collect_anchors(&mut out);
        out
    }

    fn collect_anchors(&self, out: &mut Vec<EntityId>) {
        match self {
            Query::Anchor(e) => out.push(*e),
            Query::Project(q, _) => q.collect_anchors(out),
            Query::Intersect(qs) => qs.iter().for_each(|q| q.collect_anchors(out)),
        }
    }
}

/// Read-only view of the parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct ParamView<'a> {
    pub theta: &'a [f64],
    pub layout: Layout,
}

impl<'a> ParamView<'a> {
    pub fn new(theta: &'a [f64], layout: Layout) -> Self {
        debug_assert_eq!(theta.len(), layout.total());
        ParamView { theta, layout }
    }

    pub fn point(&self, e: EntityId) -> &'a [f64] {
        &self.theta[self.layout.point(e)]
    }

    pub fn shift(&self, r: Relation) -> &'a [f64] {
        &self.theta[self.layout.shift(r)]
    }

    pub fn growth(&self, r: Relation) -> &'a [f64] {
        &self.theta[self.layout.growth(r)]
    }

    fn w1(&self) -> &'a [f64] {
        &self.theta[self.layout.w1()]
    }

    fn b1(&self) -> &'a [f64] {
        &self.theta[self.layout.b1()]
    }

    fn u(&self) -> &'a [f64] {
        &self.theta[self.layout.u()]
    }

    fn gate(&self) -> &'a [f64] {
        &self.theta[self.layout.gate()]
    }

    fn gate_bias(&self) -> &'a [f64] {
        &self.theta[self.layout.gate_bias()]
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values of one intersection, kept for the backward pass and
/// for explanation traces.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectCache {
    pub hidden: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub mean_hidden: Vec<f64>,
    pub gate: Vec<f64>,
    pub min_offset: Vec<f64>,
    /// Branch supplying the minimum offset in each coordinate (first on ties).
    pub argmin: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Anchor(EntityId),
    Project {
        child: Box<Node>,
        relation: Relation,
    },
    Intersect {
        children: Vec<Node>,
        cache: IntersectCache,
    },
}

/// An evaluated query: its output box plus everything needed to
/// differentiate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub center: Vec<f64>,
    pub offset: Vec<f64>,
    pub kind: NodeKind,
}

impl Node {
    pub fn to_box(&self) -> BoxEmbedding {
        BoxEmbedding {
            center: self.center.clone(),
            offset: self.offset.clone(),
        }
    }
}

/// Attention intersection of boxes given as center/offset slices.
pub fn intersect_core(
    p: &ParamView<'_>,
    centers: &[&[f64]],
    offsets: &[&[f64]],
) -> Result<(Vec<f64>, Vec<f64>, IntersectCache)> {
    let m = centers.len();
    if m == 0 {
        return Err(Error::EmptyIntersection);
    }
    let d = p.layout.d;
    let h2 = 2 * d;
    let (w1, b1, u) = (p.w1(), p.b1(), p.u());
    let mut hidden = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for i in 0..m {
        let (c, o) = (centers[i], offsets[i]);
        if c.len() != d || o.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.len().max(o.len()),
            });
        }
        let mut h = vec![0.0; h2];
        for (r, hr) in h.iter_mut().enumerate() {
            let row = &w1[r * h2..(r + 1) * h2];
            let mut z = b1[r];
            for j in 0..d {
                z += row[j] * c[j] + row[d + j] * o[j];
            }
            *hr = z.tanh();
        }
        scores.push(h.iter().zip(u).map(|(a, b)| a * b).sum::<f64>());
        hidden.push(h);
    }
    let smax = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = scores.iter().map(|s| (s - smax).exp()).collect();
    let z: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= z;
    }

    let mut center = vec![0.0; d];
    for i in 0..m {
        for j in 0..d {
            center[j] += weights[i] * centers[i][j];
        }
    }
    let mut mean_hidden = vec![0.0; h2];
    for h in &hidden {
        for k in 0..h2 {
            mean_hidden[k] += h[k];
        }
    }
    for v in &mut mean_hidden {
        *v /= m as f64;
    }
    let (g, gb) = (p.gate(), p.gate_bias());
    let mut gate = vec![0.0; d];
    for j in 0..d {
        let row = &g[j * h2..(j + 1) * h2];
        let a = gb[j]
            + row
                .iter()
                .zip(&mean_hidden)
                .map(|(x, y)| x * y)
                .sum::<f64>();
        gate[j] = sigmoid(a);
    }
    let mut min_offset = offsets[0].to_vec();
    let mut argmin = vec![0usize; d];
    for (i, o) in offsets.iter().enumerate().skip(1) {
        for j in 0..d {
            if o[j] < min_offset[j] {
                min_offset[j] = o[j];
                argmin[j] = i;
            }
        }
    }
    let offset: Vec<f64> = min_offset.iter().zip(&gate).map(|(a, b)| a * b).collect();
    Ok((
        center,
        offset,
        IntersectCache {
            hidden,
            weights,
            mean_hidden,
            gate,
            min_offset,
            argmin,
        },
    ))
}

/// Softmax attention weights over the boxes.
pub fn attention_weights(p: &ParamView<'_>, boxes: &[BoxEmbedding]) -> Result<Vec<f64>> {
    Ok(intersect(p, boxes)?.1)
}

/// Attention intersection of whole boxes; returns the box and the weights.
pub fn intersect(p: &ParamView<'_>, boxes: &[BoxEmbedding]) -> Result<(BoxEmbedding, Vec<f64>)> {
    let centers: Vec<&[f64]> = boxes.iter().map(|b| b.center.as_slice()).collect();
    let offsets: Vec<&[f64]> = boxes.iter().map(|b| b.offset.as_slice()).collect();
    let (center, offset, cache) = intersect_core(p, &centers, &offsets)?;
    Ok((BoxEmbedding { center, offset }, cache.weights))
}

pub fn forward(p: &ParamView<'_>, q: &Query) -> Result<Node> {
    match q {
        Query::Anchor(e) => {
            if *e >= p.layout.n_entities {
                return Err(Error::InvalidArgument(format!("unknown entity id {e}")));
            }
            Ok(Node {
                center: p.point(*e).to_vec(),
                offset: vec![0.0; p.layout.d],
                kind: NodeKind::Anchor(*e),
            })
        }
        Query::Project(inner, r) => {
            let child = forward(p, inner)?;
            let center = child
                .center
                .iter()
                .zip(p.shift(*r))
                .map(|(a, b)| a + b)
                .collect();
            let offset = child
                .offset
                .iter()
                .zip(p.growth(*r))
                .map(|(a, b)| a + b)
                .collect();
            Ok(Node {
                center,
                offset,
                kind: NodeKind::Project {
                    child: Box::new(child),
                    relation: *r,
                },
            })
        }
        Query::Intersect(qs) => {
            let children = qs
                .iter()
                .map(|q| forward(p, q))
                .collect::<Result<Vec<_>>>()?;
            let centers: Vec<&[f64]> = children.iter().map(|c| c.center.as_slice()).collect();
            let offsets: Vec<&[f64]> = children.iter().map(|c| c.offset.as_slice()).collect();
            let (center, offset, cache) = intersect_core(p, &centers, &offsets)?;
            Ok(Node {
                center,
                offset,
                kind: NodeKind::Intersect { children, cache },
            })
        }
    }
}

/// Accumulates `∂L/∂θ` into `grad` given `∂L/∂center` and `∂L/∂offset` of
/// the node's output box.
pub fn backward(p: &ParamView<'_>, node: &Node, dc: &[f64], doff: &[f64], grad: &mut [f64]) {
    let layout = p.layout;
    match &node.kind {
        NodeKind::Anchor(e) => {
            for (g, v) in grad[layout.point(*e)].iter_mut().zip(dc) {
                *g += v;
            }
        }
        NodeKind::Project { child, relation } => {
            for (g, v) in grad[layout.shift(*relation)].iter_mut().zip(dc) {
                *g += v;
            }
            for (g, v) in grad[layout.growth(*relation)].iter_mut().zip(doff) {
                *g += v;
            }
            backward(p, child, dc, doff, grad);
        }
        NodeKind::Intersect { children, cache } => {
            intersect_backward(p, children, cache, dc, doff, grad);
        }
    }
}

fn intersect_backward(
    p: &ParamView<'_>,
    children: &[Node],
    cache: &IntersectCache,
    dc: &[f64],
    doff: &[f64],
    grad: &mut [f64],
) {
    let layout = p.layout;
    let d = layout.d;
    let h2 = 2 * d;
    let m = children.len();
    let w = &cache.weights;

    // softmax
    let dw: Vec<f64> = children
        .iter()
        .map(|c| c.center.iter().zip(dc).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let avg: f64 = w.iter().zip(&dw).map(|(a, b)| a * b).sum();
    let ds: Vec<f64> = (0..m).map(|i| w[i] * (dw[i] - avg)).collect();

    // gate
    let da: Vec<f64> = (0..d)
        .map(|j| {
            let g = cache.gate[j];
            doff[j] * cache.min_offset[j] * g * (1.0 - g)
        })
        .collect();
    let gate = p.gate();
    let mut dmean = vec![0.0; h2];
    {
        let gr = layout.gate();
        let gg = &mut grad[gr];
        for j in 0..d {
            if da[j] == 0.0 {
                continue;
            }
            let row = &gate[j * h2..(j + 1) * h2];
            for k in 0..h2 {
                gg[j * h2 + k] += da[j] * cache.mean_hidden[k];
                dmean[k] += row[k] * da[j];
            }
        }
    }
    for (g, v) in grad[layout.gate_bias()].iter_mut().zip(&da) {
        *g += v;
    }

    let u = p.u();
    let w1 = p.w1();
    let w1r = layout.w1();
    let (ur, b1r) = (layout.u(), layout.b1());
    let mut dz = vec![0.0; h2];
    for (i, child) in children.iter().enumerate() {
        let h = &cache.hidden[i];
        for k in 0..h2 {
            let dh = ds[i] * u[k] + dmean[k] / m as f64;
            dz[k] = dh * (1.0 - h[k] * h[k]);
        }
        for (k, g) in grad[ur.clone()].iter_mut().enumerate() {
            *g += ds[i] * h[k];
        }
        for (k, g) in grad[b1r.clone()].iter_mut().enumerate() {
            *g += dz[k];
        }
        let mut dci: Vec<f64> = dc.iter().map(|v| w[i] * v).collect();
        let mut doi = vec![0.0; d];
        {
            let gw = &mut grad[w1r.clone()];
            for r in 0..h2 {
                let z = dz[r];
                if z == 0.0 {
                    continue;
                }
                let row = &w1[r * h2..(r + 1) * h2];
                let grow = &mut gw[r * h2..(r + 1) * h2];
                for j in 0..d {
                    grow[j] += z * child.center[j];
                    grow[d + j] += z * child.offset[j];
                    dci[j] += row[j] * z;
                    doi[j] += row[d + j] * z;
                }
            }
        }
        for j in 0..d {
            if cache.argmin[j] == i {
                doi[j] += doff[j] * cache.gate[j];
            }
        }
        backward(p, child, &dci, &doi, grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxmodel::params::init_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(d: usize) -> (Vec<f64>, Layout) {
        let layout = Layout::new(6, d);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (init_params(&layout, 12.0, &mut rng), layout)
    }

    #[test]
    fn singleton_and_symmetric_weights() {
        let (theta, layout) = setup(4);
        let p = ParamView::new(&theta, layout);
        let b = BoxEmbedding::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 0.5, 0.0, 2.0]).unwrap();
        let (out, w) = intersect(&p, std::slice::from_ref(&b)).unwrap();
        assert_eq!(w, vec![1.0]);
        assert_eq!(out.center, b.center);
        for j in 0..4 {
            assert!(out.offset[j] <= b.offset[j]);
        }
        let w = attention_weights(&p, &[b.clone(), b]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
        assert!(matches!(intersect(&p, &[]), Err(Error::EmptyIntersection)));
    }

    #[test]
    fn two_box_permutation_is_exact() {
        let (theta, layout) = setup(3);
        let p = ParamView::new(&theta, layout);
        let a = BoxEmbedding::new(vec![0.1, -2.0, 3.0], vec![0.3, 0.2, 1.0]).unwrap();
        let b = BoxEmbedding::new(vec![1.5, 0.0, -1.0], vec![0.1, 0.9, 0.4]).unwrap();
        let (ab, wab) = intersect(&p, &[a.clone(), b.clone()]).unwrap();
        let (ba, wba) = intersect(&p, &[b, a]).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(wab, vec![wba[1], wba[0]]);
    }

    #[test]
    fn forward_composes_project() {
        let (theta, layout) = setup(3);
        let p = ParamView::new(&theta, layout);
        let q = Query::Anchor(2).project(Relation::ColAxis);
        let node = forward(&p, &q).unwrap();
        let expected = crate::boxmodel::geometry::project(
            &BoxEmbedding::point(p.point(2).to_vec()),
            p.shift(Relation::ColAxis),
            p.growth(Relation::ColAxis),
        )
        .unwrap();
        assert_eq!(node.to_box(), expected);
        assert!(forward(&p, &Query::Anchor(99)).is_err());
    }
}
