use std::collections::VecDeque;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::hull::planar;
use crate::scalar::Real;

/// One 4-connected component of empty grid cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidRegion<T> {
    /// `(column, row)` cell indices, in scan order.
    pub cell_indices: Vec<(usize, usize)>,
    pub area: T,
    pub mean_distance_to_nearest_point: T,
    /// Mean of the member cell centers.
    pub centroid: (T, T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidAnalysis<T> {
    pub voids: Vec<VoidRegion<T>>,
    pub void_count: usize,
    /// Mean nearest-point distance over all void cells; 0 without voids.
    pub mean_void_distance: T,
    pub total_void_area: T,
    /// Distance beyond which a cell center counts as empty.
    pub threshold: T,
}

fn median<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    }
}

fn nearest<T: Real>(pts: &[(T, T)], q: (T, T), skip: Option<usize>) -> T {
    pts.iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != skip)
        .map(|(_, &(x, y))| ((x - q.0) * (x - q.0) + (y - q.1) * (y - q.1)).sqrt())
        .fold(T::infinity(), T::min)
}

/// Grid-based search for empty regions over the bounding box.
///
/// A cell is void when its center lies farther than
/// `radius_multiplier × median 1-NN distance` from every point. If one axis
/// of the bounding box has zero extent it borrows the other's.
pub fn void_analysis<T: Real>(
    coords: ArrayView2<'_, T>,
    grid_resolution: usize,
    radius_multiplier: f64,
) -> Result<VoidAnalysis<T>> {
    if coords.nrows() < 3 {
        return Err(Error::param("void analysis needs at least 3 points"));
    }
    if grid_resolution < 4 {
        return Err(Error::param("grid_resolution must be ≥ 4"));
    }
    if !(radius_multiplier > 0.0) {
        return Err(Error::param("radius_multiplier must be positive"));
    }
    let pts = planar(coords)?;
    let lo = pts.iter().fold((T::infinity(), T::infinity()), |m, p| (m.0.min(p.0), m.1.min(p.1)));
    let hi = pts
        .iter()
        .fold((T::neg_infinity(), T::neg_infinity()), |m, p| (m.0.max(p.0), m.1.max(p.1)));
    let (mut wx, mut wy) = (hi.0 - lo.0, hi.1 - lo.1);
    let (mut x0, mut y0) = lo;
    if wx == T::zero() && wy == T::zero() {
        return Err(Error::Degenerate("all points coincide; bounding box is empty".into()));
    }
    let half = T::lit(0.5);
    if wx == T::zero() {
        wx = wy;
        x0 = x0 - half * wx;
    } else if wy == T::zero() {
        wy = wx;
        y0 = y0 - half * wy;
    }
    let nn: Vec<T> = (0..pts.len()).map(|i| nearest(&pts, pts[i], Some(i))).collect();
    let threshold = median(nn) * T::lit(radius_multiplier);

    let g = grid_resolution;
    let gt = T::from_usize_lossy(g);
    let (cw, ch) = (wx / gt, wy / gt);
    let center = |c: usize, r: usize| {
        (
            x0 + (T::from_usize_lossy(c) + half) * cw,
            y0 + (T::from_usize_lossy(r) + half) * ch,
        )
    };
    let mut distance = vec![T::zero(); g * g];
    let mut empty = vec![false; g * g];
    for r in 0..g {
        for c in 0..g {
            let d = nearest(&pts, center(c, r), None);
            distance[r * g + c] = d;
            empty[r * g + c] = d > threshold;
        }
    }

    let cell_area = cw * ch;
    let mut seen = vec![false; g * g];
    let mut voids = Vec::new();
    for start in 0..g * g {
        if !empty[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            cells.push(idx);
            let (r, c) = (idx / g, idx % g);
            let mut push = |nr: usize, nc: usize| {
                let j = nr * g + nc;
                if empty[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if r > 0 {
                push(r - 1, c);
            }
            if r + 1 < g {
                push(r + 1, c);
            }
            if c > 0 {
                push(r, c - 1);
            }
            if c + 1 < g {
                push(r, c + 1);
            }
        }
        cells.sort_unstable();
        let count = T::from_usize_lossy(cells.len());
        let mean_distance = cells.iter().map(|&i| distance[i]).sum::<T>() / count;
        let (sx, sy) = cells.iter().fold((T::zero(), T::zero()), |acc, &i| {
            let p = center(i % g, i / g);
            (acc.0 + p.0, acc.1 + p.1)
        });
        voids.push(VoidRegion {
            cell_indices: cells.iter().map(|&i| (i % g, i / g)).collect(),
            area: count * cell_area,
            mean_distance_to_nearest_point: mean_distance,
            centroid: (sx / count, sy / count),
        });
    }

    let void_cells: Vec<usize> = (0..g * g).filter(|&i| empty[i]).collect();
    let mean_void_distance = if void_cells.is_empty() {
        T::zero()
    } else {
        void_cells.iter().map(|&i| distance[i]).sum::<T>() / T::from_usize_lossy(void_cells.len())
    };
    Ok(VoidAnalysis {
        void_count: voids.len(),
        total_void_area: T::from_usize_lossy(void_cells.len()) * cell_area,
        voids,
        mean_void_distance,
        threshold,
    })
}
