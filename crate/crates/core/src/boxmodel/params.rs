//! Flat parameter vector and its layout.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kgraph::Relation;

/// Number of relation classes.
pub const N_RELATIONS: usize = 5;

/// Half-width of the uniform initialiser for attention weights.
pub const ATTENTION_INIT: f64 = 0.1;

/// Offsets of each parameter block inside the flat vector:
/// entity points, relation shifts, relation growths, then the attention
/// network (`W1` 2d×2d, `b1` 2d, `u` 2d, gate `G` d×2d, gate bias d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_entities: usize,
    pub d: usize,
}

impl Layout {
    pub fn new(n_entities: usize, d: usize) -> Self {
        Layout { n_entities, d }
    }

    pub fn point(&self, e: usize) -> Range<usize> {
        let s = e * self.d;
        s..s + self.d
    }

    pub fn points(&self) -> Range<usize> {
        0..self.n_entities * self.d
    }

    fn rel_base(&self) -> usize {
        self.n_entities * self.d
    }

    pub fn shift(&self, r: Relation) -> Range<usize> {
        let s = self.rel_base() + r.index() * self.d;
        s..s + self.d
    }

    pub fn growth(&self, r: Relation) -> Range<usize> {
        let s = self.rel_base() + (N_RELATIONS + r.index()) * self.d;
        s..s + self.d
    }

    pub fn growths(&self) -> Range<usize> {
        let s = self.rel_base() + N_RELATIONS * self.d;
        s..s + N_RELATIONS * self.d
    }

    fn att_base(&self) -> usize {
        self.rel_base() + 2 * N_RELATIONS * self.d
    }

    pub fn w1(&self) -> Range<usize> {
        let s = self.att_base();
        s..s + 4 * self.d * self.d
    }

    pub fn b1(&self) -> Range<usize> {
        let s = self.w1().end;
        s..s + 2 * self.d
    }

    pub fn u(&self) -> Range<usize> {
        let s = self.b1().end;
        s..s + 2 * self.d
    }

    pub fn gate(&self) -> Range<usize> {
        let s = self.u().end;
        s..s + 2 * self.d * self.d
    }

    pub fn gate_bias(&self) -> Range<usize> {
        let s = self.gate().end;
        s..s + self.d
    }

    pub fn attention(&self) -> Range<usize> {
        self.att_base()..self.total()
    }

    pub fn total(&self) -> usize {
        self.att_base() + 4 * self.d * self.d + 4 * self.d + 2 * self.d * self.d + self.d
    }
}

/// Draws initial parameters: centers and shifts uniform in `±r`, growths
/// uniform in `[0, r]` with `r = γ / (2√d)`, attention uniform in
/// `±ATTENTION_INIT`.
pub fn init_params(layout: &Layout, gamma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = gamma / (2.0 * (layout.d as f64).sqrt());
    let mut theta = vec![0.0; layout.total()];
    for x in &mut theta[layout.points()] {
        *x = rng.random_range(-r..=r);
    }
    for rel in Relation::ALL {
        for x in &mut theta[layout.shift(rel)] {
            *x = rng.random_range(-r..=r);
        }
    }
    for x in &mut theta[layout.growths()] {
        *x = rng.random_range(0.0..=r);
    }
    for x in &mut theta[layout.attention()] {
        *x = rng.random_range(-ATTENTION_INIT..=ATTENTION_INIT);
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn blocks_tile_the_vector() {
        let l = Layout::new(7, 3);
        let mut blocks: Vec<Range<usize>> = (0..7).map(|e| l.point(e)).collect();
        for r in Relation::ALL {
            blocks.push(l.shift(r));
        }
        for r in Relation::ALL {
            blocks.push(l.growth(r));
        }
        blocks.extend([l.w1(), l.b1(), l.u(), l.gate(), l.gate_bias()]);
        let mut next = 0;
        for b in blocks {
            assert_eq!(b.start, next);
            next = b.end;
        }
        assert_eq!(next, l.total());
        assert_eq!(l.attention().end, l.total());
    }

    #[test]
    fn init_ranges() {
        let l = Layout::new(10, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta = init_params(&l, 12.0, &mut rng);
        let r = 12.0 / 4.0;
        assert!(theta[l.points()].iter().all(|x| x.abs() <= r));
        assert!(theta[l.growths()].iter().all(|&x| (0.0..=r).contains(&x)));
        assert!(theta[l.attention()]
            .iter()
            .all(|x| x.abs() <= ATTENTION_INIT));
    }
}
