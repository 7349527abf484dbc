use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::linalg::pairwise_distances;
use crate::scalar::Real;

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks<T: Real>(values: &[T]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman's ρ with average ranks for ties.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("spearman needs two equal-length samples of size ≥ 2"));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .map(T::lit)
        .ok_or_else(|| Error::UndefinedMetric("rank correlation of a constant sample".into()))
}

fn upper_triangle<T: Real>(x: ArrayView2<'_, T>) -> Result<Vec<T>> {
    let d = pairwise_distances(x)?;
    let n = d.nrows();
    Ok((0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| d[[i, j]]).collect())
}

/// Spearman correlation of the pairwise distances before and after projection.
pub fn global_preservation<T: Real>(high: ArrayView2<'_, T>, coords: ArrayView2<'_, T>) -> Result<T> {
    if high.nrows() != coords.nrows() {
        return Err(Error::param(format!(
            "{} high-dimensional rows vs {} projected rows",
            high.nrows(),
            coords.nrows()
        )));
    }
    if high.nrows() < 4 {
        return Err(Error::param("global preservation needs at least 4 points"));
    }
    spearman(&upper_triangle(high)?, &upper_triangle(coords)?)
        .map_err(|_| Error::UndefinedMetric("a distance vector has zero variance".into()))
}
