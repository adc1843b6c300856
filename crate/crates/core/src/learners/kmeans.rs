//! Lloyd k-means over the embedding distance with extrinsic-mean centroids.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub assignments: Vec<usize>,
    pub centroids: Vec<GrassmannPoint>,
    /// Sum of embedding distances from each point to its centroid.
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after every centroid update, first to last.
    pub inertia_trace: Vec<f64>,
}

/// The subspace whose projector is nearest in Frobenius norm to the average
/// projector of `members`: the top-`p` eigenvectors of `(1/n) Σ XᵢXᵢᵀ`.
pub fn extrinsic_mean(members: &[&GrassmannPoint]) -> Result<GrassmannPoint> {
    let first = members
        .first()
        .ok_or_else(|| Error::Parameter("mean of an empty set".into()))?;
    let (ambient, p) = (first.ambient_dim(), first.subspace_dim());
    let mut avg = DMatrix::zeros(ambient, ambient);
    for x in members {
        grassmann::check_compatible(first, x)?;
        avg.gemm(1.0, x.basis(), &x.basis().transpose(), 1.0);
    }
    avg /= members.len() as f64;
    let (_, vectors) = linalg::sym_eigen_descending(&avg);
    GrassmannPoint::new(vectors.columns(0, p).into_owned())
}

pub fn gkm_cluster(points: &[GrassmannPoint], k: usize, seed: u64, max_iter: usize) -> Result<ClusterAssignment> {
    let n = points.len();
    if k < 2 || k > n {
        return Err(Error::Parameter(format!("K must satisfy 2 <= K <= N = {n}, got {k}")));
    }
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    grassmann::common_dims(points)?;

    let mut centroids = seed_centroids(points, k, seed);
    let mut previous: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let (assignments, inertia) = loop {
        iterations += 1;
        let (mut assignments, mut dist) = assign(points, &centroids);
        repair_empty(points, &mut assignments, &mut dist, &mut centroids, k);
        centroids = (0..k)
            .into_par_iter()
            .map(|c| {
                let members: Vec<&GrassmannPoint> =
                    (0..n).filter(|&i| assignments[i] == c).map(|i| &points[i]).collect();
                extrinsic_mean(&members)
            })
            .collect::<Result<_>>()?;
        let inertia = inertia_of(points, &assignments, &centroids);
        trace.push(inertia);
        let settled = previous.as_ref() == Some(&assignments);
        if settled || iterations >= max_iter {
            break (assignments, inertia);
        }
        previous = Some(assignments);
    };
    Ok(ClusterAssignment {
        assignments,
        centroids,
        inertia,
        iterations,
        inertia_trace: trace,
    })
}

pub fn inertia_of(points: &[GrassmannPoint], assignments: &[usize], centroids: &[GrassmannPoint]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(x, &c)| x.distance_unchecked(&centroids[c]))
        .sum()
}

/// k-means++ seeding: the first centroid uniformly, each further one with
/// probability proportional to its distance from the nearest chosen
/// centroid. If every remaining point coincides with a chosen centroid the
/// next one is drawn uniformly from the points not yet chosen.
fn seed_centroids(points: &[GrassmannPoint], k: usize, seed: u64) -> Vec<GrassmannPoint> {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = points.iter().map(|x| x.distance_unchecked(&points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut cumulative = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                cumulative += w;
                pick = Some(i);
                if cumulative > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, x) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(x.distance_unchecked(&points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Nearest centroid per point (ties to the lower centroid index).
fn assign(points: &[GrassmannPoint], centroids: &[GrassmannPoint]) -> (Vec<usize>, Vec<f64>) {
    points
        .par_iter()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = x.distance_unchecked(centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

/// Gives every empty cluster the point farthest from its centroid among
/// clusters with more than one member (ties to the lower point index).
fn repair_empty(
    points: &[GrassmannPoint],
    assignments: &mut [usize],
    dist: &mut [f64],
    centroids: &mut [GrassmannPoint],
    k: usize,
) {
    let mut sizes = vec![0usize; k];
    for &c in assignments.iter() {
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut donor: Option<usize> = None;
        for i in 0..points.len() {
            if sizes[assignments[i]] < 2 {
                continue;
            }
            if donor.is_none_or(|j| dist[i] > dist[j]) {
                donor = Some(i);
            }
        }
        let i = donor.expect("K <= N leaves a cluster with at least two members");
        sizes[assignments[i]] -= 1;
        sizes[empty] = 1;
        assignments[i] = empty;
        dist[i] = 0.0;
        centroids[empty] = points[i].clone();
    }
}
