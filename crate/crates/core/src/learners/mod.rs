//! Evaluation learners: vector LPP, nearest-neighbour classification and
//! k-means clustering on the Grassmann manifold.

mod kmeans;
mod knn;
mod lpp;

pub use kmeans::{extrinsic_mean, gkm_cluster, inertia_of, ClusterAssignment};
pub use knn::{gknn_classify, gknn_predict};
pub use lpp::{lpp_fit_vectors, LppProjection};
