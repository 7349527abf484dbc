//! Dense helpers shared by the projection methods.
//!
//! Eigen- and singular-value decompositions run through nalgebra in `f64` and
//! are converted back to the caller's scalar at the boundary.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Euclidean distance matrix between the rows of `x`.
///
/// The result is exactly symmetric with a zero diagonal.
pub fn pairwise_distances<T: Real>(x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::param(format!(
            "pairwise distances need at least 2 rows, got {n}"
        )));
    }
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let ri = x.row(i);
        for j in (i + 1)..n {
            let rj = x.row(j);
            let sq: T = ri
                .iter()
                .zip(rj.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            let v = sq.sqrt();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    Ok(d)
}

pub(crate) fn to_nalgebra<T: Real>(m: ArrayView2<'_, T>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]].as_f64())
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
///
/// Eigenvectors are the columns of the returned matrix. The input is
/// symmetrized as `(m + mᵀ)/2` first.
pub fn symmetric_eigen<T: Real>(m: ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let n = m.nrows();
    let mut a = to_nalgebra(m);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        eig.eigenvalues[q]
            .partial_cmp(&eig.eigenvalues[p])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = Array1::from_iter(order.iter().map(|&k| T::lit(eig.eigenvalues[k])));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[[i, dst]] = T::lit(eig.eigenvectors[(i, src)]);
        }
    }
    (values, vectors)
}

/// Thin SVD `x = U Σ Vᵀ`; returns `(U, σ)` with σ descending.
pub(crate) fn left_singular<T: Real>(x: ArrayView2<'_, T>) -> (Array2<T>, Array1<T>) {
    let svd = to_nalgebra(x).svd(true, false);
    let u = svd.u.expect("requested U");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| {
        svd.singular_values[q]
            .partial_cmp(&svd.singular_values[p])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma = Array1::from_iter(order.iter().map(|&c| T::lit(svd.singular_values[c])));
    let mut out = Array2::zeros((x.nrows(), k));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..x.nrows() {
            out[[i, dst]] = T::lit(u[(i, src)]);
        }
    }
    (out, sigma)
}

/// Flips each column so that its largest-magnitude entry is positive.
///
/// Ties in magnitude resolve to the lowest row index.
pub fn orient_columns<T: Real>(m: &mut Array2<T>) {
    for mut col in m.axis_iter_mut(Axis(1)) {
        let mut best = T::zero();
        let mut sign = T::one();
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if v < T::zero() { -T::one() } else { T::one() };
            }
        }
        if sign < T::zero() {
            col.mapv_inplace(|v| -v);
        }
    }
}

pub(crate) fn center_columns<T: Real>(x: ArrayView2<'_, T>) -> Array2<T> {
    let n = T::from_usize_lossy(x.nrows().max(1));
    let mean = x.sum_axis(Axis(0)).mapv(|s| s / n);
    &x - &mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn three_four_five() {
        let x = array![[0.0, 0.0], [3.0, 4.0]];
        let d = pairwise_distances(x.view()).unwrap();
        assert_eq!(d[[0, 1]], 5.0);
        assert_eq!(d[[1, 0]], 5.0);
        assert_eq!(d[[0, 0]], 0.0);
    }

    #[test]
    fn identical_rows_give_zero_matrix() {
        let x = array![[1.5, -2.0, 0.25], [1.5, -2.0, 0.25], [1.5, -2.0, 0.25]];
        let d = pairwise_distances(x.view()).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_row_is_rejected() {
        let x = array![[1.0, 2.0]];
        assert!(pairwise_distances(x.view()).is_err());
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = array![[2.0f64, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(m.view());
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vecs[[0, 0]].abs() - (0.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orientation_makes_largest_entry_positive() {
        let mut m = array![[0.1, 0.5], [-0.9, -0.2], [0.3, 0.1]];
        orient_columns(&mut m);
        assert_eq!(m[[1, 0]], 0.9);
        assert_eq!(m[[0, 1]], 0.5);
    }
}
