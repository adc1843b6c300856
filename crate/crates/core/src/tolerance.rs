//! Numerical tolerances shared by all modules.

use serde::{Deserialize, Serialize};

pub const ENV_ORTHONORMALITY: &str = "GLPP_ORTHONORMALITY_TOL";
pub const ENV_RANK_CUTOFF: &str = "GLPP_RANK_CUTOFF";
pub const ENV_MAX_CONDITION: &str = "GLPP_MAX_CONDITION";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest allowed entry of `|XᵀX − I|` for a valid basis.
    pub orthonormality: f64,
    /// Relative cutoff on singular values / triangular diagonals below which
    /// a matrix is treated as rank deficient.
    pub rank_cutoff: f64,
    /// Largest condition number of a QR triangular factor accepted during
    /// point normalization.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orthonormality: 1e-10,
            rank_cutoff: 1e-12,
            max_condition: 1e12,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by any of the `GLPP_*` environment variables that
    /// parse as positive finite numbers. Returns the names of variables that
    /// were present but rejected.
    pub fn from_env() -> (Tolerances, Vec<&'static str>) {
        let mut tol = Tolerances::default();
        let mut rejected = Vec::new();
        for (name, slot) in [
            (ENV_ORTHONORMALITY, &mut tol.orthonormality),
            (ENV_RANK_CUTOFF, &mut tol.rank_cutoff),
            (ENV_MAX_CONDITION, &mut tol.max_condition),
        ] {
            if let Ok(raw) = std::env::var(name) {
                match raw.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() && v > 0.0 => *slot = v,
                    _ => rejected.push(name),
                }
            }
        }
        (tol, rejected)
    }
}
