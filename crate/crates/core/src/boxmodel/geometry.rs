//! Box algebra and distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned box. A point is a box with zero offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxEmbedding {
    pub center: Vec<f64>,
    pub offset: Vec<f64>,
}

impl BoxEmbedding {
    pub fn new(center: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if center.len() != offset.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: offset.len(),
            });
        }
        if offset.iter().any(|&o| o.is_nan() || o < 0.0) {
            return Err(Error::InvalidArgument(
                "box offset must be non-negative".into(),
            ));
        }
        Ok(BoxEmbedding { center, offset })
    }

    pub fn point(center: Vec<f64>) -> Self {
        let offset = vec![0.0; center.len()];
        BoxEmbedding { center, offset }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn min_corner(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(&self.offset)
            .map(|(c, o)| c - o)
            .collect()
    }

    pub fn max_corner(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(&self.offset)
            .map(|(c, o)| c + o)
            .collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Translates the center by `shift` and widens the offset by `growth`.
pub fn project(source: &BoxEmbedding, shift: &[f64], growth: &[f64]) -> Result<BoxEmbedding> {
    check_dim(source.dim(), shift.len())?;
    check_dim(source.dim(), growth.len())?;
    Ok(BoxEmbedding {
        center: source
            .center
            .iter()
            .zip(shift)
            .map(|(c, s)| c + s)
            .collect(),
        offset: source
            .offset
            .iter()
            .zip(growth)
            .map(|(o, g)| o + g)
            .collect(),
    })
}

/// L1 distance from `t` to the nearest point of the box; zero inside.
pub fn dist_outside(t: &[f64], center: &[f64], offset: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..t.len() {
        let (lo, hi) = (center[j] - offset[j], center[j] + offset[j]);
        s += (t[j] - hi).max(0.0) + (lo - t[j]).max(0.0);
    }
    s
}

/// L1 distance from the center to `t` clamped into the box.
pub fn dist_inside(t: &[f64], center: &[f64], offset: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..t.len() {
        let (lo, hi) = (center[j] - offset[j], center[j] + offset[j]);
        s += (center[j] - t[j].max(lo).min(hi)).abs();
    }
    s
}

/// Euclidean length of the box diagonal, `‖max − min‖₂ = 2‖offset‖₂`.
pub fn box_size(offset: &[f64]) -> f64 {
    2.0 * offset.iter().map(|o| o * o).sum::<f64>().sqrt()
}

pub fn dist_box(t: &[f64], center: &[f64], offset: &[f64], alpha: f64, beta: f64) -> f64 {
    dist_outside(t, center, offset)
        + alpha * dist_inside(t, center, offset)
        + beta * box_size(offset)
}

/// Closed-box membership with slack `tol` on every side.
pub fn contains(center: &[f64], offset: &[f64], t: &[f64], tol: f64) -> bool {
    (0..t.len()).all(|j| t[j] >= center[j] - offset[j] - tol && t[j] <= center[j] + offset[j] + tol)
}

/// Where a tail coordinate sits relative to the box; the distance is
/// smooth within a region and kinks between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Above,
    Below,
    /// Inside, with the sign of `center − t`.
    Inside(i8),
}

pub fn region(t: f64, c: f64, o: f64) -> Region {
    if t > c + o {
        Region::Above
    } else if t < c - o {
        Region::Below
    } else if c > t {
        Region::Inside(1)
    } else if c < t {
        Region::Inside(-1)
    } else {
        Region::Inside(0)
    }
}

/// Adds `scale · ∂dist_box/∂(t, center, offset)` into the gradient slices.
#[allow(clippy::too_many_arguments)]
pub fn dist_box_grad(
    t: &[f64],
    center: &[f64],
    offset: &[f64],
    alpha: f64,
    beta: f64,
    scale: f64,
    dt: &mut [f64],
    dc: &mut [f64],
    doff: &mut [f64],
) {
    for j in 0..t.len() {
        match region(t[j], center[j], offset[j]) {
            Region::Above => {
                dt[j] += scale;
                dc[j] -= scale;
                doff[j] += scale * (alpha - 1.0);
            }
            Region::Below => {
                dt[j] -= scale;
                dc[j] += scale;
                doff[j] += scale * (alpha - 1.0);
            }
            Region::Inside(s) => {
                let s = f64::from(s) * alpha * scale;
                dc[j] += s;
                dt[j] -= s;
            }
        }
    }
    let norm = offset.iter().map(|o| o * o).sum::<f64>().sqrt();
    if norm > 0.0 {
        let k = scale * beta * 2.0 / norm;
        for j in 0..offset.len() {
            doff[j] += k * offset[j];
        }
    }
}
