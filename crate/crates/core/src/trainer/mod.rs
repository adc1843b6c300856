//! Learning the projection `A` that maps `G(p, D)` into `G(p, d)`.
//!
//! Each iteration normalizes the training points by QR against the current
//! `A`, assembles the constraint matrix `H` and the surrogate matrix `J`, and
//! takes the `d` smallest generalized eigenvectors of `(J, H)` as the next
//! `A`. The affinity graph is computed once from the original points.

mod assembly;
mod dimension;
mod solve;

pub use assembly::{
    assemble_g, assemble_h, assemble_j, normalize_points, objective, NormalizedPoint,
};
pub use dimension::{energy_spectrum, select_dim};
pub use solve::{solve_projection, GeneralizedEigen};

pub(crate) use solve::solve_generalized;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::graph::{build_grassmann_graph, AffinityGraph};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub max_iterations: usize,
    /// Stop once `|f(Aₖ) − f(Aₖ₋₁)| ≤ rel_tolerance · max(1, |f(Aₖ₋₁)|)`.
    pub rel_tolerance: f64,
    /// Heat of the affinity kernel.
    pub heat: f64,
    /// Relative ridge; the shift added to `H` is `ridge · tr(H) / D`.
    pub ridge: f64,
    /// Seed for the random block of the initial projection.
    pub seed: u64,
    /// Optional k-nearest-neighbour sparsification of the affinity graph.
    pub knn: Option<usize>,
    pub tolerances: Tolerances,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            max_iterations: 50,
            rel_tolerance: 1e-6,
            heat: 1.0,
            ridge: 1e-8,
            seed: 0,
            knn: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::Parameter(format!(
                "rel_tolerance must be positive, got {}",
                self.rel_tolerance
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Parameter(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        if !(self.heat > 0.0 && self.heat.is_finite()) {
            return Err(Error::Parameter(format!("heat must be positive, got {}", self.heat)));
        }
        Ok(())
    }
}

/// State kept from the training run; absent on models loaded from disk.
#[derive(Debug, Clone)]
pub struct TrainingRecord {
    pub graph: AffinityGraph,
    /// `H` from the last iteration, the one `A` was solved against.
    pub final_h: DMatrix<f64>,
    /// `Qᵢ` of every training point under the final `A`.
    pub reduced: Vec<GrassmannPoint>,
    /// Eigenvalues of the last generalized eigensolve.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProjectionModel {
    pub projection: DMatrix<f64>,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub target_dim: usize,
    pub n_train: usize,
    pub seed: u64,
    /// Absolute ridge used in the final solve.
    pub ridge: f64,
    pub iterations_run: usize,
    pub converged: bool,
    /// `f(A⁽⁰⁾), f(A⁽¹⁾), …`
    pub objective_trace: Vec<f64>,
    pub training: Option<TrainingRecord>,
}

impl ProjectionModel {
    /// Maps a point of `G(p, D)` to the `Q` factor of `AᵀX`.
    pub fn transform(&self, x: &GrassmannPoint) -> Result<GrassmannPoint> {
        self.transform_with(x, &Tolerances::default())
    }

    pub fn transform_with(&self, x: &GrassmannPoint, tol: &Tolerances) -> Result<GrassmannPoint> {
        self.transform_indexed(x, tol, 0)
    }

    fn transform_indexed(&self, x: &GrassmannPoint, tol: &Tolerances, index: usize) -> Result<GrassmannPoint> {
        if x.ambient_dim() != self.ambient_dim {
            return Err(Error::Dimension(format!(
                "model expects points in R^{}, got R^{}",
                self.ambient_dim,
                x.ambient_dim()
            )));
        }
        Ok(assembly::normalize_point(x, &self.projection, tol, index)?.reduced)
    }

    pub fn transform_all(&self, points: &[GrassmannPoint], tol: &Tolerances) -> Result<Vec<GrassmannPoint>> {
        points
            .iter()
            .enumerate()
            .map(|(i, x)| self.transform_indexed(x, tol, i))
            .collect()
    }

    pub fn initial_objective(&self) -> Option<f64> {
        self.objective_trace.first().copied()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }
}

/// `A⁽⁰⁾ = [I_d; Z]` with `Z` a seeded standard-normal `(D−d)×d` block,
/// drawn row by row.
pub fn initial_projection(ambient: usize, target: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(ambient, target);
    for k in 0..target.min(ambient) {
        a[(k, k)] = 1.0;
    }
    for i in target..ambient {
        for j in 0..target {
            a[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    a
}

/// Objective `f(A)` with the points normalized against `A` itself.
pub fn evaluate_objective(
    points: &[GrassmannPoint],
    graph: &AffinityGraph,
    projection: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    let norm = normalize_points(points, projection, tol)?;
    objective(&assembly::normalized_matrices(&norm), graph, projection)
}

pub fn fit(points: &[GrassmannPoint], target_dim: usize, config: &TrainerConfig) -> Result<ProjectionModel> {
    config.validate()?;
    let n = points.len();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 training points, got {n}")));
    }
    let (ambient, subspace) = grassmann::common_dims(points)?;
    if target_dim < subspace || target_dim >= ambient {
        return Err(Error::Parameter(format!(
            "target dimension must satisfy p = {subspace} <= d < D = {ambient}, got {target_dim}"
        )));
    }
    let tol = &config.tolerances;
    let graph = build_grassmann_graph(points, config.heat, config.knn)?;

    let mut projection = initial_projection(ambient, target_dim, config.seed);
    let mut norm = normalize_points(points, &projection, tol).map_err(|e| e.at_iteration(0))?;
    let mut normalized = assembly::normalized_matrices(&norm);
    let mut previous = objective(&normalized, &graph, &projection)?;
    let mut trace = vec![previous];
    let mut converged = false;
    let mut iterations_run = 0;
    let mut final_h = DMatrix::zeros(ambient, ambient);
    let mut ridge = 0.0;
    let mut eigenvalues = Vec::new();

    for k in 1..=config.max_iterations {
        let h = assemble_h(&normalized, graph.degrees())?;
        let j = assemble_j(&normalized, &graph, &projection)?;
        ridge = config.ridge * h.trace() / ambient as f64;
        let sol = solve_projection(&j, &h, target_dim, ridge).map_err(|e| e.at_iteration(k))?;
        projection = sol.vectors;
        eigenvalues = sol.values.iter().copied().collect();
        norm = normalize_points(points, &projection, tol).map_err(|e| e.at_iteration(k))?;
        normalized = assembly::normalized_matrices(&norm);
        let current = objective(&normalized, &graph, &projection)?;
        trace.push(current);
        final_h = h;
        iterations_run = k;
        if (current - previous).abs() <= config.rel_tolerance * previous.abs().max(1.0) {
            converged = true;
            break;
        }
        previous = current;
    }

    Ok(ProjectionModel {
        projection,
        ambient_dim: ambient,
        subspace_dim: subspace,
        target_dim,
        n_train: n,
        seed: config.seed,
        ridge,
        iterations_run,
        converged,
        objective_trace: trace,
        training: Some(TrainingRecord {
            graph,
            final_h,
            reduced: norm.into_iter().map(|p| p.reduced).collect(),
            eigenvalues,
        }),
    })
}
