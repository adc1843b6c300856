use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grassmann::{self, GrassmannPoint};

/// An ordered collection of points in a common `G(p, D)`, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<GrassmannPoint>,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<GrassmannPoint>, labels: Option<Vec<usize>>) -> Result<Self> {
        grassmann::common_dims(&points)?;
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::LengthMismatch {
                    left: points.len(),
                    right: l.len(),
                });
            }
        }
        Ok(Dataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(D, p)` shared by every point.
    pub fn dims(&self) -> (usize, usize) {
        (self.points[0].ambient_dim(), self.points[0].subspace_dim())
    }

    pub fn into_labeled(self) -> Result<LabeledDataset> {
        let labels = self
            .labels
            .ok_or_else(|| Error::Parameter("dataset has no labels".into()))?;
        LabeledDataset::new(self.points, labels)
    }
}

/// Points with integer class labels in `[0, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub points: Vec<GrassmannPoint>,
    pub labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(points: Vec<GrassmannPoint>, labels: Vec<usize>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        grassmann::common_dims(&points)?;
        Ok(LabeledDataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.points[0].ambient_dim(), self.points[0].subspace_dim())
    }

    /// Seeded stratified split: within each class a shuffled
    /// `round(test_fraction · size)` members go to the test side. Both sides
    /// keep the original relative order.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "test fraction must lie in (0, 1), got {test_fraction}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut is_test = vec![false; self.len()];
        for class in 0..self.num_classes() {
            let mut members: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
            members.shuffle(&mut rng);
            let take = (test_fraction * members.len() as f64).round() as usize;
            for &i in members.iter().take(take) {
                is_test[i] = true;
            }
        }
        let pick = |want: bool| -> Result<LabeledDataset> {
            let idx: Vec<usize> = (0..self.len()).filter(|&i| is_test[i] == want).collect();
            if idx.is_empty() {
                return Err(Error::Parameter("split leaves one side empty".into()));
            }
            LabeledDataset::new(
                idx.iter().map(|&i| self.points[i].clone()).collect(),
                idx.iter().map(|&i| self.labels[i]).collect(),
            )
        };
        Ok((pick(false)?, pick(true)?))
    }
}

impl From<LabeledDataset> for Dataset {
    fn from(d: LabeledDataset) -> Self {
        Dataset {
            points: d.points,
            labels: Some(d.labels),
        }
    }
}
