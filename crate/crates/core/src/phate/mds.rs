use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{orient_columns, symmetric_eigen};
use crate::scalar::Real;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const NEGLIGIBLE_EIGEN: f64 = 1e-10;

/// Classical (Torgerson) MDS: top eigenpairs of `−½·J·V²·J`.
///
/// Axes whose eigenvalue is negligible or negative come out as zero columns.
/// Each axis is oriented so its largest-magnitude entry is positive.
pub fn classical_mds<T: Real>(v: ArrayView2<'_, T>, out_dims: usize) -> Result<Array2<T>> {
    let n = v.nrows();
    if v.ncols() != n {
        return Err(Error::param("distance matrix must be square"));
    }
    if out_dims == 0 {
        return Err(Error::param("out_dims must be ≥ 1"));
    }
    let sq = v.mapv(|x| x * x);
    let nt = T::from_usize_lossy(n);
    let row_mean: Vec<T> = sq.rows().into_iter().map(|r| r.sum() / nt).collect();
    let grand = row_mean.iter().copied().sum::<T>() / nt;
    let half = T::lit(-0.5);
    let gram = Array2::from_shape_fn((n, n), |(i, j)| {
        half * (sq[[i, j]] - row_mean[i] - row_mean[j] + grand)
    });
    let (values, vectors) = symmetric_eigen(gram.view());
    let top = values.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
    let cutoff = top * T::lit(NEGLIGIBLE_EIGEN);
    let mut coords = Array2::zeros((n, out_dims));
    for a in 0..out_dims.min(n) {
        let lambda = values[a];
        if lambda > cutoff && lambda > T::zero() {
            let scale = lambda.sqrt();
            for i in 0..n {
                coords[[i, a]] = vectors[[i, a]] * scale;
            }
        }
    }
    orient_columns(&mut coords);
    Ok(coords)
}

/// Raw stress `Σ_{i<j} (V(i,j) − ‖xᵢ − xⱼ‖)²`.
pub fn raw_stress<T: Real>(v: ArrayView2<'_, T>, x: ArrayView2<'_, T>) -> T {
    let n = v.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = row_distance(x, i, j);
            let e = v[[i, j]] - d;
            s = s + e * e;
        }
    }
    s
}

fn row_distance<T: Real>(x: ArrayView2<'_, T>, i: usize, j: usize) -> T {
    x.row(i)
        .iter()
        .zip(x.row(j).iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct SmacofResult<T> {
    pub coords: Array2<T>,
    pub stress: T,
    /// Number of accepted Guttman updates.
    pub iterations: usize,
    /// Stress of the initial configuration followed by each accepted update.
    pub history: Vec<T>,
}

/// One Guttman transform with unit weights: `X ← B(X)·X / n`.
fn guttman<T: Real>(v: ArrayView2<'_, T>, x: ArrayView2<'_, T>) -> Array2<T> {
    let n = v.nrows();
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = row_distance(x, i, j);
            if d > T::zero() {
                let w = -v[[i, j]] / d;
                b[[i, j]] = w;
                b[[j, i]] = w;
            }
        }
    }
    for i in 0..n {
        let off: T = b.row(i).iter().copied().sum();
        b[[i, i]] = -off;
    }
    b.dot(&x) / T::from_usize_lossy(n)
}

/// Metric MDS by stress majorization (SMACOF), starting from `init`.
///
/// Stops when the relative stress decrease falls below `tol`, at `max_iter`
/// updates, or when an update would raise the stress (the update is then
/// discarded), so `history` is non-increasing by construction.
pub fn smacof_refine<T: Real>(
    v: ArrayView2<'_, T>,
    init: ArrayView2<'_, T>,
    max_iter: usize,
    tol: T,
) -> Result<SmacofResult<T>> {
    let n = v.nrows();
    if init.nrows() != n {
        return Err(Error::param(format!("{} initial rows for {n} points", init.nrows())));
    }
    if init.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("initial coordinates must be finite"));
    }
    let mut x = init.to_owned();
    let mut stress = raw_stress(v, x.view());
    let mut history = vec![stress];
    let scale: T = v.iter().map(|&d| d * d).sum::<T>() * T::lit(0.5);
    let negligible = scale * T::epsilon() * T::epsilon();
    let mut iterations = 0;
    if stress <= negligible {
        return Ok(SmacofResult { coords: x, stress, iterations, history });
    }
    for _ in 0..max_iter {
        let next = guttman(v, x.view());
        let next_stress = raw_stress(v, next.view());
        if next_stress > stress {
            break;
        }
        let previous = stress;
        x = next;
        stress = next_stress;
        history.push(stress);
        iterations += 1;
        if stress <= negligible || (previous - stress) / previous < tol {
            break;
        }
    }
    Ok(SmacofResult { coords: x, stress, iterations, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pairwise_distances;
    use ndarray::array;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn recovers_points_on_a_line() {
        let pts = array![[0.0], [3.0], [5.0]];
        let v = pairwise_distances(pts.view()).unwrap();
        let x = classical_mds(v.view(), 2).unwrap();
        let back = pairwise_distances(x.view()).unwrap();
        assert!(max_abs_diff(&v, &back) < 1e-9);
        assert!(x.column(1).iter().all(|&c| c == 0.0), "second axis should be padded");
    }

    #[test]
    fn recovers_unit_square() {
        let pts = array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let v = pairwise_distances(pts.view()).unwrap();
        let x = classical_mds(v.view(), 2).unwrap();
        assert!(max_abs_diff(&v, &pairwise_distances(x.view()).unwrap()) < 1e-9);
    }

    #[test]
    fn zero_distances_give_zero_coords() {
        let v = Array2::<f64>::zeros((4, 4));
        let x = classical_mds(v.view(), 2).unwrap();
        assert!(x.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn perfect_init_does_not_move() {
        let pts = array![[-1.0, -1.0], [2.0, -1.0], [-1.0, 2.0]];
        let v = pairwise_distances(pts.view()).unwrap();
        let r = smacof_refine(v.view(), pts.view(), 100, 1e-6).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.stress < 1e-20);
        assert_eq!(r.coords, pts);
    }

    #[test]
    fn refinement_never_raises_stress() {
        // Non-Euclidean dissimilarities: classical MDS is not exact here.
        let v = array![
            [0.0, 1.0, 2.0, 3.0],
            [1.0, 0.0, 1.0, 2.5],
            [2.0, 1.0, 0.0, 0.5],
            [3.0, 2.5, 0.5, 0.0]
        ];
        let init = classical_mds(v.view(), 2).unwrap();
        let r = smacof_refine(v.view(), init.view(), 500, 1e-9).unwrap();
        assert!(r.stress <= r.history[0]);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
