use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::grassmann::{check_compatible, GrassmannPoint};

/// Majority label among the `k` training points closest to `query` in
/// embedding distance.
///
/// Distance ties go to the lower training index. A vote tie goes to the label
/// whose nearest member is closest, then to the smaller label.
pub fn gknn_classify(train: &LabeledDataset, query: &GrassmannPoint, k: usize) -> Result<usize> {
    if k == 0 || k > train.len() {
        return Err(Error::Parameter(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            train.len()
        )));
    }
    check_compatible(&train.points[0], query)?;
    let mut ranked: Vec<(f64, usize)> = train
        .points
        .iter()
        .enumerate()
        .map(|(i, x)| (x.distance_unchecked(query), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // label -> (votes, rank of its nearest member)
    let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (rank, &(_, i)) in ranked.iter().take(k).enumerate() {
        let entry = tally.entry(train.labels[i]).or_insert((0, rank));
        entry.0 += 1;
    }
    let (&label, _) = tally
        .iter()
        .max_by(|(la, (va, ra)), (lb, (vb, rb))| va.cmp(vb).then(rb.cmp(ra)).then(lb.cmp(la)))
        .expect("k >= 1");
    Ok(label)
}

/// Classifies every query; queries are processed in parallel.
pub fn gknn_predict(train: &LabeledDataset, queries: &[GrassmannPoint], k: usize) -> Result<Vec<usize>> {
    queries.par_iter().map(|q| gknn_classify(train, q, k)).collect()
}
