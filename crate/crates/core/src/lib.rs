//! Locality preserving projections for subspace-valued data.
//!
//! Points are `p`-dimensional subspaces of `R^D` compared through the
//! projector embedding distance. [`trainer::fit`] learns a linear map into
//! `R^d` whose induced map `G(p, D) → G(p, d)` keeps neighbouring subspaces
//! close; [`learners`] and [`metrics`] provide the nearest-neighbour,
//! k-means and scoring tools used to evaluate the reduction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod grassmann;
pub mod io;
pub mod graph;
pub mod learners;
pub mod linalg;
pub mod metrics;
pub mod synthetic;
pub mod tolerance;
pub mod trainer;

pub use dataset::{Dataset, LabeledDataset};
pub use error::{Error, Result};
pub use grassmann::{GrassmannPoint, SymmetricProjector};
pub use graph::AffinityGraph;
pub use tolerance::Tolerances;
pub use trainer::{fit, ProjectionModel, TrainerConfig};
