//! Box embeddings: geometry, attention intersection, loss and training.

pub mod geometry;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod params;
pub mod query;
pub mod sampling;
pub mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use geometry::{
    box_size, contains, dist_box, dist_inside, dist_outside, project, BoxEmbedding,
};
pub use model::Model;
pub use query::{attention_weights, forward, intersect, Node, ParamView, Query};
pub use train::{train, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub d: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Negatives per positive.
    pub k: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            d: 32,
            gamma: 12.0,
            alpha: 0.2,
            beta: 0.02,
            k: 8,
            lr: 1e-3,
            epochs: 100,
            batch_size: 512,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.d == 0 {
            return bad("d must be positive");
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return bad("gamma must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return bad("alpha and beta must lie in [0, 1]");
        }
        if self.k == 0 || self.batch_size == 0 {
            return bad("k and batch_size must be positive");
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return bad("lr must be a non-negative number");
        }
        Ok(())
    }
}

/// Which prediction heads receive training signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tasks {
    #[default]
    Joint,
    Axis,
    Type,
}

impl Tasks {
    pub fn axis(self) -> bool {
        self != Tasks::Type
    }

    pub fn types(self) -> bool {
        self != Tasks::Axis
    }
}

/// Structural switches that change which queries are trained and how
/// dataset boxes are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelOptions {
    pub use_cross_features: bool,
    /// Send column boxes through the column→dataset relation before the
    /// dataset-level intersection.
    pub project_columns_before_ds_intersection: bool,
    pub tasks: Tasks,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            use_cross_features: true,
            project_columns_before_ds_intersection: true,
            tasks: Tasks::Joint,
        }
    }
}
