//! Chart-type and axis recommendation for two-column tables.
//!
//! The pipeline turns every dataset into a knowledge graph of feature,
//! column, dataset, and visual-choice entities, learns box embeddings over
//! that graph, and answers "which axis / which chart types" as logical
//! queries: feature boxes are projected, intersected with attention, and
//! the chart types whose points fall inside the final box are recommended.
//! Attention weights collected along the way drive templated explanations.
//!
//! Stages, in order:
//!
//! - [`corpus`]: typed columns, corpus ingestion, synthetic corpora, splits
//! - [`features`]: the 80 single-column and 40 cross-column features
//! - [`discretizer`]: supervised MDLP binning of continuous features
//! - [`kgraph`]: the typed knowledge graph
//! - [`boxmodel`]: box algebra, loss, negative sampling, training
//! - [`inference`]: axis and chart-type recommendation with a trace
//! - [`explain`]: natural-language explanations from the trace
//! - [`evalkit`]: MR / Hits@k / axis accuracy / multi-label metrics

pub mod artifacts;
pub mod boxmodel;
pub mod config;
pub mod corpus;
pub mod discretizer;
pub mod error;
pub mod evalkit;
pub mod explain;
pub mod features;
pub mod inference;
pub mod kgraph;
pub mod synth;

pub use error::{Error, Result};
