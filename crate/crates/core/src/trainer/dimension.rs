use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};
use crate::linalg;

/// Descending eigenvalues of `PPᵀ = Σᵢ XᵢXᵢᵀ`, where `P` is the horizontal
/// concatenation of all bases.
pub fn energy_spectrum(points: &[GrassmannPoint]) -> Result<DVector<f64>> {
    let (ambient, _) = grassmann::common_dims(points)?;
    let mut gram = DMatrix::zeros(ambient, ambient);
    for x in points {
        gram.gemm(1.0, x.basis(), &x.basis().transpose(), 1.0);
    }
    let (values, _) = linalg::sym_eigen_descending(&gram);
    Ok(values.map(|v| v.max(0.0)))
}

/// Smallest `d*` whose leading eigenvalues of `PPᵀ` retain at least
/// `energy_rate` of the total, never below the subspace dimension `p`.
pub fn select_dim(points: &[GrassmannPoint], energy_rate: f64) -> Result<usize> {
    if !(energy_rate > 0.0 && energy_rate < 1.0) {
        return Err(Error::Parameter(format!(
            "energy rate must lie in (0, 1), got {energy_rate}"
        )));
    }
    let spectrum = energy_spectrum(points)?;
    let p = points[0].subspace_dim();
    let threshold = energy_rate * spectrum.sum();
    let mut cumulative = 0.0;
    let mut chosen = spectrum.len();
    for (k, &sigma) in spectrum.iter().enumerate() {
        cumulative += sigma;
        if cumulative >= threshold {
            chosen = k + 1;
            break;
        }
    }
    Ok(chosen.max(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(dim: usize, k: usize) -> GrassmannPoint {
        let mut b = DMatrix::zeros(dim, 1);
        b[(k, 0)] = 1.0;
        GrassmannPoint::new(b).unwrap()
    }

    #[test]
    fn uniform_spectrum_needs_every_dimension() {
        let pts: Vec<_> = (0..10).map(|k| axis(10, k)).collect();
        assert_eq!(select_dim(&pts, 0.95).unwrap(), 10);
        assert_eq!(select_dim(&pts, 0.9).unwrap(), 9);
    }

    #[test]
    fn single_line_needs_one() {
        let pts = [axis(7, 3)];
        for r in [0.01, 0.5, 0.99] {
            assert_eq!(select_dim(&pts, r).unwrap(), 1);
        }
    }

    #[test]
    fn clamped_to_subspace_dim() {
        let x = GrassmannPoint::new(DMatrix::identity(6, 3)).unwrap();
        assert_eq!(select_dim(&[x], 0.1).unwrap(), 3);
    }

    #[test]
    fn total_energy_is_n_times_p() {
        let x = GrassmannPoint::new(DMatrix::identity(6, 3)).unwrap();
        let y = GrassmannPoint::reorthonormalize(&DMatrix::from_fn(6, 3, |i, j| ((i + 1) * (j + 2)) as f64 + (i == j) as u8 as f64)).unwrap();
        let s = energy_spectrum(&[x, y]).unwrap();
        assert!((s.sum() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rate() {
        let pts = [axis(3, 0)];
        for r in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(select_dim(&pts, r), Err(Error::Parameter(_))));
        }
    }
}
