use std::collections::BTreeMap;
use std::fmt::Display;

use ndarray::{Array1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::pairwise_distances;
use crate::scalar::Real;

/// Point indices per label, in label order.
pub(crate) fn groups<L: Ord>(labels: &[L]) -> BTreeMap<&L, Vec<usize>> {
    let mut g: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        g.entry(l).or_default().push(i);
    }
    g
}

fn check_len<T, L>(coords: ArrayView2<'_, T>, labels: &[L]) -> Result<()> {
    if coords.nrows() != labels.len() {
        return Err(Error::param(format!(
            "{} points but {} labels",
            coords.nrows(),
            labels.len()
        )));
    }
    Ok(())
}

/// Mean silhouette `(b − a) / max(a, b)`; singleton clusters contribute 0.
pub fn silhouette<T: Real, L: Ord>(coords: ArrayView2<'_, T>, labels: &[L]) -> Result<T> {
    check_len(coords, labels)?;
    let g = groups(labels);
    if g.len() < 2 {
        return Err(Error::UndefinedMetric("silhouette needs at least 2 clusters".into()));
    }
    if g.values().all(|m| m.len() < 2) {
        return Err(Error::UndefinedMetric("silhouette needs a cluster with at least 2 points".into()));
    }
    let d = pairwise_distances(coords)?;
    let clusters: Vec<&Vec<usize>> = g.values().collect();
    let mut cluster_of = vec![0; labels.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members.iter() {
            cluster_of[i] = c;
        }
    }
    let mut total = T::zero();
    for i in 0..labels.len() {
        let own = clusters[cluster_of[i]];
        if own.len() < 2 {
            continue;
        }
        let a = own.iter().map(|&j| d[[i, j]]).sum::<T>() / T::from_usize_lossy(own.len() - 1);
        let b = clusters
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != cluster_of[i])
            .map(|(_, m)| m.iter().map(|&j| d[[i, j]]).sum::<T>() / T::from_usize_lossy(m.len()))
            .fold(T::infinity(), T::min);
        let denom = a.max(b);
        if denom > T::zero() {
            total = total + (b - a) / denom;
        }
    }
    Ok(total / T::from_usize_lossy(labels.len()))
}

fn centroid<T: Real>(coords: ArrayView2<'_, T>, members: &[usize]) -> Array1<T> {
    let mut c = Array1::zeros(coords.ncols());
    for &i in members {
        c = c + coords.row(i);
    }
    c / T::from_usize_lossy(members.len())
}

fn dist<'a, T: Real>(a: impl IntoIterator<Item = &'a T>, b: impl IntoIterator<Item = &'a T>) -> T {
    a.into_iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Davies–Bouldin index with `Sᵢ` the mean distance to the centroid.
pub fn davies_bouldin<T: Real, L: Ord + Display>(coords: ArrayView2<'_, T>, labels: &[L]) -> Result<T> {
    check_len(coords, labels)?;
    let g = groups(labels);
    if g.len() < 2 {
        return Err(Error::UndefinedMetric("Davies-Bouldin needs at least 2 clusters".into()));
    }
    let names: Vec<&L> = g.keys().copied().collect();
    let centroids: Vec<Vec<T>> = g.values().map(|m| centroid(coords, m).to_vec()).collect();
    let scatter: Vec<T> = g
        .values()
        .zip(&centroids)
        .map(|(m, c)| {
            m.iter().map(|&i| dist(coords.row(i), c)).sum::<T>()
                / T::from_usize_lossy(m.len())
        })
        .collect();
    let c = names.len();
    let mut total = T::zero();
    for i in 0..c {
        let mut worst = T::zero();
        for j in 0..c {
            if i == j {
                continue;
            }
            let m = dist(&centroids[i], &centroids[j]);
            if m == T::zero() {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                return Err(Error::Degenerate(format!(
                    "clusters {} and {} have coincident centroids",
                    names[a], names[b]
                )));
            }
            worst = worst.max((scatter[i] + scatter[j]) / m);
        }
        total = total + worst;
    }
    Ok(total / T::from_usize_lossy(c))
}

/// Indices of the `k` nearest other points of every point; distance ties go
/// to the lower index.
pub(crate) fn knn_lists<T: Real>(coords: ArrayView2<'_, T>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = coords.nrows();
    let d = pairwise_distances(coords)?;
    Ok((0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| d[[i, a]].partial_cmp(&d[[i, b]]).expect("finite").then(a.cmp(&b)));
            order.truncate(k);
            order
        })
        .collect())
}

/// Mean fraction of each point's k nearest neighbours that share its tag.
pub fn language_coherence<T: Real, L: Eq>(coords: ArrayView2<'_, T>, tags: &[L], k: usize) -> Result<T> {
    check_len(coords, tags)?;
    let n = tags.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("coherence needs 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    let lists = knn_lists(coords, k)?;
    let kt = T::from_usize_lossy(k);
    let total: T = lists
        .iter()
        .enumerate()
        .map(|(i, nb)| T::from_usize_lossy(nb.iter().filter(|&&j| tags[j] == tags[i]).count()) / kt)
        .sum();
    Ok(total / T::from_usize_lossy(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntraCluster<T> {
    /// Mean pairwise distance per label with at least 2 points.
    pub per_label: BTreeMap<String, T>,
    /// Mean of the per-label means.
    pub overall: T,
    pub warnings: Vec<String>,
}

pub fn intra_cluster_distance<T: Real, L: Ord + Display>(
    coords: ArrayView2<'_, T>,
    labels: &[L],
) -> Result<IntraCluster<T>> {
    check_len(coords, labels)?;
    let mut per_label = BTreeMap::new();
    let mut warnings = Vec::new();
    for (label, members) in groups(labels) {
        if members.len() < 2 {
            warnings.push(format!("cluster {label} has a single point; excluded from intra-cluster distance"));
            continue;
        }
        let mut sum = T::zero();
        let mut pairs = 0usize;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                sum = sum + dist(coords.row(i), coords.row(j));
                pairs += 1;
            }
        }
        per_label.insert(label.to_string(), sum / T::from_usize_lossy(pairs));
    }
    if per_label.is_empty() {
        return Err(Error::UndefinedMetric("no cluster has at least 2 points".into()));
    }
    let overall = per_label.values().copied().sum::<T>() / T::from_usize_lossy(per_label.len());
    Ok(IntraCluster { per_label, overall, warnings })
}
