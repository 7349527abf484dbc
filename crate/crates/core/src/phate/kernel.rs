use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-point bandwidths σ(i): the distance from i to its k-th nearest
/// neighbour, self excluded.
///
/// Zero bandwidths (k or more duplicates of a point) are repaired to the
/// smallest positive bandwidth, or `1e-12` when every bandwidth is zero. The
/// second return value counts repaired entries.
pub fn knn_bandwidths<T: Real>(d: ArrayView2<'_, T>, k: usize) -> Result<(Array1<T>, usize)> {
    let n = d.nrows();
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} must be < n = {n}")));
    }
    let mut sigma = Array1::zeros(n);
    let mut row = Vec::with_capacity(n - 1);
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| d[[i, j]]));
        let (_, kth, _) = row.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).expect("finite distances"));
        sigma[i] = *kth;
    }
    let smallest_positive = sigma
        .iter()
        .copied()
        .filter(|&s| s > T::zero())
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| a.min(s))));
    let floor = smallest_positive.unwrap_or_else(|| T::lit(1e-12));
    let mut repaired = 0;
    for s in sigma.iter_mut() {
        if *s <= T::zero() {
            *s = floor;
            repaired += 1;
        }
    }
    Ok((sigma, repaired))
}

/// Symmetric adaptive α-decay affinity:
/// `K(i,j) = ½·exp(−(D/σᵢ)^α) + ½·exp(−(D/σⱼ)^α)`.
pub fn alpha_decay_kernel<T: Real>(d: ArrayView2<'_, T>, sigma: &Array1<T>, alpha: T) -> Result<Array2<T>> {
    let n = d.nrows();
    if sigma.len() != n {
        return Err(Error::param(format!("{} bandwidths for {n} points", sigma.len())));
    }
    if sigma.iter().any(|&s| !(s > T::zero())) {
        return Err(Error::param("bandwidths must be strictly positive"));
    }
    let half = T::lit(0.5);
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        k[[i, i]] = T::one();
        for j in (i + 1)..n {
            let dij = d[[i, j]];
            let v = half * (-(dij / sigma[i]).powf(alpha)).exp() + half * (-(dij / sigma[j]).powf(alpha)).exp();
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// Row-normalizes a non-negative affinity matrix into a Markov transition
/// matrix.
pub fn markov_normalize<T: Real>(k: ArrayView2<'_, T>) -> Result<Array2<T>> {
    if k.iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return Err(Error::param("affinities must be finite and non-negative"));
    }
    let mut p = k.to_owned();
    for (i, mut row) in p.rows_mut().into_iter().enumerate() {
        let total: T = row.iter().copied().sum();
        if total <= T::zero() {
            return Err(Error::IsolatedPoint(i));
        }
        row.mapv_inplace(|v| v / total);
    }
    Ok(p)
}

/// `p^t` by repeated dense multiplication.
pub fn diffuse<T: Real>(p: ArrayView2<'_, T>, t: usize) -> Result<Array2<T>> {
    if t == 0 {
        return Err(Error::param("diffusion time t must be ≥ 1"));
    }
    let mut out = p.to_owned();
    for _ in 1..t {
        out = out.dot(&p);
    }
    Ok(out)
}
