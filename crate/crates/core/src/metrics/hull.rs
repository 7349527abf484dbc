use std::collections::BTreeMap;
use std::fmt::Display;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::cluster::groups;
use crate::scalar::Real;

fn cross<T: Real>(o: (T, T), a: (T, T), b: (T, T)) -> T {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, collinear
/// points dropped.
pub fn convex_hull<T: Real>(points: &[(T, T)]) -> Vec<(T, T)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(T, T)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon; fewer than 3 vertices give 0.
pub fn polygon_area<T: Real>(polygon: &[(T, T)]) -> T {
    if polygon.len() < 3 {
        return T::zero();
    }
    let mut twice = T::zero();
    for (i, &(x0, y0)) in polygon.iter().enumerate() {
        let (x1, y1) = polygon[(i + 1) % polygon.len()];
        twice = twice + (x0 * y1 - x1 * y0);
    }
    (twice * T::lit(0.5)).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullAreas<T> {
    pub per_label: BTreeMap<String, T>,
    pub mean_hull_area: T,
    pub total_hull_area: T,
}

pub(crate) fn planar<T: Real>(coords: ArrayView2<'_, T>) -> Result<Vec<(T, T)>> {
    if coords.ncols() < 2 {
        return Err(Error::param("planar metrics need at least 2 coordinate columns"));
    }
    Ok(coords.rows().into_iter().map(|r| (r[0], r[1])).collect())
}

/// Convex-hull area of each label's points in the first two coordinates.
pub fn convex_hull_areas<T: Real, L: Ord + Display>(coords: ArrayView2<'_, T>, labels: &[L]) -> Result<HullAreas<T>> {
    if coords.nrows() != labels.len() {
        return Err(Error::param("one label per point required"));
    }
    let pts = planar(coords)?;
    let mut per_label = BTreeMap::new();
    for (label, members) in groups(labels) {
        let cluster: Vec<(T, T)> = members.iter().map(|&i| pts[i]).collect();
        per_label.insert(label.to_string(), polygon_area(&convex_hull(&cluster)));
    }
    let total_hull_area = per_label.values().copied().sum::<T>();
    let mean_hull_area = if per_label.is_empty() {
        T::zero()
    } else {
        total_hull_area / T::from_usize_lossy(per_label.len())
    };
    Ok(HullAreas { per_label, mean_hull_area, total_hull_area })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn unit_square_with_interior_point() {
        let h = convex_hull(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.0, 1.0)]);
        assert_eq!(h.len(), 4);
        assert_eq!(polygon_area(&h), 1.0);
    }

    #[test]
    fn degenerate_clusters_have_zero_area() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        let h = convex_hull_areas(x.view(), &["pair", "pair", "line", "line", "line"]).unwrap();
        assert_eq!(h.per_label["pair"], 0.0);
        assert_eq!(h.per_label["line"], 0.0);
        assert_eq!(h.total_hull_area, 0.0);
    }

    #[test]
    fn mean_and_total() {
        let x = array![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [10.0, 10.0], [11.0, 10.0], [10.0, 11.0]];
        let h = convex_hull_areas(x.view(), &[1, 1, 1, 2, 2, 2]).unwrap();
        assert_eq!(h.total_hull_area, 2.5);
        assert_eq!(h.mean_hull_area, 1.25);
    }
}
