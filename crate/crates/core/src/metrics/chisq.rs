use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::metrics::hull::planar;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Point counts per cell, row-major from the lower-left corner.
    pub counts: Vec<usize>,
}

fn bin<T: Real>(v: T, lo: T, width: T, cells: usize) -> usize {
    let b = ((v - lo) / width * T::from_usize_lossy(cells)).floor().as_f64();
    (b.max(0.0) as usize).min(cells - 1)
}

/// Goodness-of-fit of per-cell counts against a uniform expectation.
///
/// The grid is `cells × cells` over the origin-centred square `[−M, M]²`,
/// `M` the largest absolute coordinate, so the default 2×2 grid counts the
/// four quadrants of the (centred) projection plane.
pub fn spatial_chi_square<T: Real>(coords: ArrayView2<'_, T>, cells_per_axis: usize) -> Result<ChiSquare> {
    let n = coords.nrows();
    if n < 10 {
        return Err(Error::param("spatial chi-square needs at least 10 points"));
    }
    if cells_per_axis < 1 || cells_per_axis * cells_per_axis < 2 {
        return Err(Error::param("the grid needs at least 2 cells"));
    }
    let pts = planar(coords)?;
    let reach = pts.iter().fold(T::zero(), |m, p| m.max(p.0.abs()).max(p.1.abs()));
    if reach == T::zero() {
        return Err(Error::Degenerate("all points sit at the origin".into()));
    }
    let lo = -reach;
    let width = reach + reach;
    let c = cells_per_axis;
    let mut counts = vec![0usize; c * c];
    for &(x, y) in &pts {
        counts[bin(y, lo, width, c) * c + bin(x, lo, width, c)] += 1;
    }
    let expected = n as f64 / (c * c) as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    let df = c * c - 1;
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::param(e.to_string()))?;
    let p_value = dist.sf(statistic).clamp(0.0, 1.0);
    Ok(ChiSquare { statistic, df, p_value, counts })
}
