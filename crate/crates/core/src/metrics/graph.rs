use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::baselines::components;
use crate::error::{Error, Result};
use crate::linalg::pairwise_distances;
use crate::metrics::cluster::knn_lists;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityStats<T> {
    pub connected_components: usize,
    pub total_edges: usize,
    pub clustering_coefficient: T,
    pub graph_density: T,
    /// Mean node degree.
    pub density_mean: T,
    /// Population standard deviation of node degree.
    pub density_std: T,
}

/// Statistics of the ε-graph with radius `radius_fraction × max distance`;
/// pairs at distance ≤ radius are joined.
pub fn connectivity_graph_stats<T: Real>(
    coords: ArrayView2<'_, T>,
    radius_fraction: f64,
) -> Result<ConnectivityStats<T>> {
    if !(radius_fraction > 0.0 && radius_fraction <= 1.0) {
        return Err(Error::param(format!("radius_fraction must be in (0, 1], got {radius_fraction}")));
    }
    let d = pairwise_distances(coords)?;
    let n = d.nrows();
    let radius = d.iter().fold(T::zero(), |m, &v| m.max(v)) * T::lit(radius_fraction);
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && d[[i, j]] <= radius).collect())
        .collect();
    Ok(graph_stats(&adjacency))
}

/// Same statistics over the symmetric kNN graph.
pub fn connectivity_knn_stats<T: Real>(coords: ArrayView2<'_, T>, k: usize) -> Result<ConnectivityStats<T>> {
    let n = coords.nrows();
    if n < 2 {
        return Err(Error::param("connectivity needs at least 2 points"));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!("kNN graph needs 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    let lists = knn_lists(coords, k)?;
    let mut adjacent = vec![vec![false; n]; n];
    for (i, nb) in lists.iter().enumerate() {
        for &j in nb {
            adjacent[i][j] = true;
            adjacent[j][i] = true;
        }
    }
    let adjacency: Vec<Vec<usize>> = adjacent
        .into_iter()
        .map(|row| row.into_iter().enumerate().filter_map(|(j, a)| a.then_some(j)).collect())
        .collect();
    Ok(graph_stats(&adjacency))
}

/// Statistics of an undirected simple graph given as sorted adjacency lists.
pub fn graph_stats<T: Real>(adjacency: &[Vec<usize>]) -> ConnectivityStats<T> {
    let n = adjacency.len();
    let mut linked = vec![vec![false; n]; n];
    for (i, nb) in adjacency.iter().enumerate() {
        for &j in nb {
            linked[i][j] = true;
        }
    }
    let degrees: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let total_edges = degrees.iter().sum::<usize>() / 2;
    let mut clustering = T::zero();
    for nb in adjacency {
        let deg = nb.len();
        if deg < 2 {
            continue;
        }
        let mut closed = 0usize;
        for (a, &u) in nb.iter().enumerate() {
            closed += nb[a + 1..].iter().filter(|&&w| linked[u][w]).count();
        }
        let possible = deg * (deg - 1) / 2;
        clustering = clustering + T::from_usize_lossy(closed) / T::from_usize_lossy(possible);
    }
    let nt = T::from_usize_lossy(n);
    let pairs = n * n.saturating_sub(1) / 2;
    let graph_density = if pairs == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(total_edges) / T::from_usize_lossy(pairs)
    };
    let mean = T::from_usize_lossy(degrees.iter().sum()) / nt;
    let var = degrees
        .iter()
        .map(|&k| {
            let e = T::from_usize_lossy(k) - mean;
            e * e
        })
        .sum::<T>()
        / nt;
    ConnectivityStats {
        connected_components: components(adjacency).len(),
        total_edges,
        clustering_coefficient: clustering / nt,
        graph_density,
        density_mean: mean,
        density_std: var.sqrt(),
    }
}
