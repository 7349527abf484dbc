use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::hull::planar;
use crate::metrics::rank::spearman;
use crate::scalar::Real;

/// An ordered sequence of items expected to lie along a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub name: String,
    /// Point indices in sequence order.
    pub indices: Vec<usize>,
}

impl BranchSpec {
    pub fn new(name: impl Into<String>, indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 3 {
            return Err(Error::param("a branch needs at least 3 items"));
        }
        Ok(BranchSpec { name: name.into(), indices })
    }
}

/// Every `(category, network_root)` group with at least 3 sequenced items,
/// ordered by `sequence_index`.
pub fn discover_branches(dataset: &Dataset) -> Vec<BranchSpec> {
    let mut groups: BTreeMap<(&str, Option<&str>), Vec<(u32, usize)>> = BTreeMap::new();
    for (i, item) in dataset.items.iter().enumerate() {
        if let Some(s) = item.sequence_index {
            groups
                .entry((item.category.as_str(), item.network_root.as_deref()))
                .or_default()
                .push((s, i));
        }
    }
    groups
        .into_iter()
        .filter(|(_, members)| members.len() >= 3)
        .map(|((category, root), mut members)| {
            members.sort_unstable();
            let name = match root {
                Some(r) => format!("{category}/{r}"),
                None => category.to_string(),
            };
            BranchSpec { name, indices: members.into_iter().map(|(_, i)| i).collect() }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchLinearity<T> {
    /// λ₁ / (λ₁ + λ₂) of the branch's 2×2 covariance, in [0.5, 1].
    pub variance_ratio: T,
    /// Rank correlation of sequence order with position on the first
    /// principal axis. The axis direction is arbitrary, so the sign is too.
    pub spearman: T,
}

/// Linearity of a branch in the first two coordinates.
pub fn branch_linearity<T: Real>(coords: ArrayView2<'_, T>, branch: &BranchSpec) -> Result<BranchLinearity<T>> {
    if branch.indices.len() < 3 {
        return Err(Error::param("a branch needs at least 3 items"));
    }
    let all = planar(coords)?;
    let mut pts = Vec::with_capacity(branch.indices.len());
    for &i in &branch.indices {
        pts.push(*all.get(i).ok_or_else(|| Error::param(format!("branch index {i} out of range")))?);
    }
    let m = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / m;
    let my = pts.iter().map(|p| p.1).sum::<T>() / m;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in &pts {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    let trace = sxx + syy;
    if !(trace > T::zero()) {
        return Err(Error::Degenerate(format!("branch {} has all points coincident", branch.name)));
    }
    let half = T::lit(0.5);
    let gap = ((sxx - syy) * (sxx - syy) * T::lit(0.25) + sxy * sxy).sqrt();
    let l1 = half * trace + gap;
    let l2 = (half * trace - gap).max(T::zero());
    let variance_ratio = (l1 / (l1 + l2)).min(T::one());
    let (vx, vy) = if sxy != T::zero() {
        (l1 - syy, sxy)
    } else if sxx >= syy {
        (T::one(), T::zero())
    } else {
        (T::zero(), T::one())
    };
    let positions: Vec<T> = pts.iter().map(|&(x, y)| (x - mx) * vx + (y - my) * vy).collect();
    let order: Vec<T> = (0..pts.len()).map(T::from_usize_lossy).collect();
    let spearman = spearman(&order, &positions).unwrap_or_else(|_| T::zero());
    Ok(BranchLinearity { variance_ratio, spearman })
}
