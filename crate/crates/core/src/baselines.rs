//! Baseline projections: PCA, classical MDS on raw distances, and spectral
//! embedding of the symmetric kNN graph.

use std::collections::VecDeque;

use ndarray::{Array1, Array2, ArrayView2};

use crate::embedding::AlignedData;
use crate::error::{Error, Result};
use crate::linalg::{center_columns, left_singular, orient_columns, pairwise_distances, symmetric_eigen};
use crate::phate::classical_mds;
use crate::projection::{LinearParams, MethodParams, Projection, SpectralParams};
use crate::scalar::Real;

/// Singular values at or below this fraction of the largest give zero axes.
const NEGLIGIBLE_SINGULAR: f64 = 1e-12;

pub(crate) fn check_linear(n: usize, out_dims: usize, min_n: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::param(format!("need at least {min_n} points, got {n}")));
    }
    if out_dims == 0 {
        return Err(Error::param("out_dims must be ≥ 1"));
    }
    Ok(())
}

pub(crate) fn check_spectral(n: usize, p: &SpectralParams) -> Result<()> {
    if p.k == 0 {
        return Err(Error::param("k must be ≥ 1"));
    }
    if n < p.k + 1 {
        return Err(Error::param(format!("spectral embedding needs n ≥ k + 1 = {}, got {n}", p.k + 1)));
    }
    check_linear(n, p.out_dims, 2)
}

/// PCA coordinates together with the variance along each output axis.
pub fn pca_coords<T: Real>(x: ArrayView2<'_, T>, out_dims: usize) -> Result<(Array2<T>, Array1<T>)> {
    let n = x.nrows();
    check_linear(n, out_dims, 2)?;
    let centered = center_columns(x);
    let (u, sigma) = left_singular(centered.view());
    let top = sigma.first().copied().unwrap_or_else(T::zero);
    let cutoff = top * T::lit(NEGLIGIBLE_SINGULAR);
    let denom = T::from_usize_lossy(n - 1);
    let mut coords = Array2::zeros((n, out_dims));
    let mut variances = Array1::zeros(out_dims);
    for a in 0..out_dims.min(sigma.len()) {
        if sigma[a] > cutoff {
            for i in 0..n {
                coords[[i, a]] = u[[i, a]] * sigma[a];
            }
            variances[a] = sigma[a] * sigma[a] / denom;
        }
    }
    orient_columns(&mut coords);
    Ok((coords, variances))
}

pub fn pca_project<T: Real>(data: &AlignedData<T>, out_dims: usize) -> Result<Projection<T>> {
    let (coords, _) = pca_coords(data.matrix.view(), out_dims)?;
    Ok(Projection::new(
        data,
        coords,
        MethodParams::Pca(LinearParams { out_dims }),
        None,
        Vec::new(),
    ))
}

pub fn cmds_project<T: Real>(data: &AlignedData<T>, out_dims: usize) -> Result<Projection<T>> {
    check_linear(data.len(), out_dims, 3)?;
    let d = pairwise_distances(data.matrix.view())?;
    let coords = classical_mds(d.view(), out_dims)?;
    Ok(Projection::new(
        data,
        coords,
        MethodParams::Cmds(LinearParams { out_dims }),
        None,
        Vec::new(),
    ))
}

/// Symmetric kNN adjacency lists: i ~ j when either lists the other among
/// its k nearest (self excluded, distance ties broken by index).
pub fn knn_graph<T: Real>(d: ArrayView2<'_, T>, k: usize) -> Vec<Vec<usize>> {
    let n = d.nrows();
    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| d[[i, a]].partial_cmp(&d[[i, b]]).expect("finite").then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            adjacent[i][j] = true;
            adjacent[j][i] = true;
        }
    }
    adjacent
        .into_iter()
        .map(|row| row.into_iter().enumerate().filter_map(|(j, a)| a.then_some(j)).collect())
        .collect()
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Laplacian-eigenmap coordinates of one connected component.
fn embed_component<T: Real>(members: &[usize], adjacency: &[Vec<usize>], out_dims: usize) -> Array2<T> {
    let m = members.len();
    let mut coords = Array2::zeros((m, out_dims));
    if m < 2 {
        return coords;
    }
    let mut local = vec![usize::MAX; adjacency.len()];
    for (li, &g) in members.iter().enumerate() {
        local[g] = li;
    }
    let degree: Vec<T> = members.iter().map(|&g| T::from_usize_lossy(adjacency[g].len())).collect();
    // D^{-1/2} A D^{-1/2}: its top eigenvectors are the bottom ones of L_sym.
    let mut norm_adj = Array2::zeros((m, m));
    for (li, &g) in members.iter().enumerate() {
        for &w in &adjacency[g] {
            let lj = local[w];
            norm_adj[[li, lj]] = T::one() / (degree[li] * degree[lj]).sqrt();
        }
    }
    let (_, vectors) = symmetric_eigen(norm_adj.view());
    for a in 0..out_dims.min(m - 1) {
        for i in 0..m {
            coords[[i, a]] = vectors[[i, a + 1]] / degree[i].sqrt();
        }
    }
    orient_columns(&mut coords);
    coords
}

pub fn spectral_project<T: Real>(data: &AlignedData<T>, params: &SpectralParams) -> Result<Projection<T>> {
    let n = data.len();
    check_spectral(n, params)?;
    let d = pairwise_distances(data.matrix.view())?;
    let mut warnings = Vec::new();
    let spread_all = d.iter().fold(T::zero(), |m, &v| m.max(v));
    let mut coords = Array2::zeros((n, params.out_dims));
    if spread_all == T::zero() {
        warnings.push("all points coincide; spectral embedding is degenerate (zero coordinates)".to_string());
    } else {
        let adjacency = knn_graph(d.view(), params.k);
        let comps = components(&adjacency);
        let parts: Vec<Array2<T>> = comps
            .iter()
            .map(|c| embed_component(c, &adjacency, params.out_dims))
            .collect();
        if comps.len() > 1 {
            warnings.push(format!(
                "kNN graph (k = {}) has {} connected components; each embedded separately and offset along the first axis",
                params.k,
                comps.len()
            ));
            let mut spread = T::zero();
            for part in &parts {
                for col in part.columns() {
                    let lo = col.iter().fold(T::infinity(), |m, &v| m.min(v));
                    let hi = col.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
                    spread = spread.max(hi - lo);
                }
            }
            if spread == T::zero() {
                spread = T::one();
            }
            let step = T::lit(2.0) * spread;
            for (ci, (members, part)) in comps.iter().zip(&parts).enumerate() {
                let offset = T::from_usize_lossy(ci) * step;
                for (li, &g) in members.iter().enumerate() {
                    for a in 0..params.out_dims {
                        coords[[g, a]] = part[[li, a]] + if a == 0 { offset } else { T::zero() };
                    }
                }
            }
        } else {
            coords = parts.into_iter().next().expect("one component");
        }
    }
    Ok(Projection::new(
        data,
        coords,
        MethodParams::Spectral(params.clone()),
        None,
        warnings,
    ))
}
