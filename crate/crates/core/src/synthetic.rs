//! Seeded clustered point clouds on `G(p, D)`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub clusters: usize,
    pub points_per_cluster: usize,
    pub ambient: usize,
    pub subspace: usize,
    /// Frobenius norm of the offset added to a cluster's base basis, in
    /// `(0, π/2)`.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            clusters: 3,
            points_per_cluster: 30,
            ambient: 20,
            subspace: 2,
            perturbation: 0.1,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.points_per_cluster == 0 {
            return Err(Error::Parameter("need at least one cluster with one point".into()));
        }
        if self.subspace == 0 || self.subspace > self.ambient {
            return Err(Error::Parameter(format!(
                "subspace dimension {} must lie in [1, {}]",
                self.subspace, self.ambient
            )));
        }
        if !(self.perturbation > 0.0 && self.perturbation < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Parameter(format!(
                "perturbation must lie in (0, pi/2), got {}",
                self.perturbation
            )));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Draws one orthonormalized Gaussian base per cluster, then each member as
/// the base plus a Gaussian offset projected off the base span and scaled to
/// Frobenius norm `perturbation`, reorthonormalized. Points are ordered by
/// cluster; the label is the cluster index.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bases: Vec<GrassmannPoint> = (0..spec.clusters)
        .map(|_| GrassmannPoint::reorthonormalize(&gaussian(&mut rng, spec.ambient, spec.subspace)))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(spec.clusters * spec.points_per_cluster);
    let mut labels = Vec::with_capacity(points.capacity());
    for (label, base) in bases.iter().enumerate() {
        let b = base.basis();
        for _ in 0..spec.points_per_cluster {
            let z = gaussian(&mut rng, spec.ambient, spec.subspace);
            let mut offset = &z - b * b.tr_mul(&z);
            let norm = offset.norm();
            if norm > 0.0 {
                offset *= spec.perturbation / norm;
            }
            points.push(GrassmannPoint::reorthonormalize(&(b + offset))?);
            labels.push(label);
        }
    }
    LabeledDataset::new(points, labels)
}
