use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::pairwise_distances;
use crate::scalar::Real;

/// Distances between log-transformed diffusion rows:
/// `V(i,j) = ‖log(pᵗᵢ + floor) − log(pᵗⱼ + floor)‖₂`.
pub fn potential_distances<T: Real>(pt: ArrayView2<'_, T>, log_floor: T) -> Result<Array2<T>> {
    if !(log_floor > T::zero()) {
        return Err(Error::param("log_floor must be positive"));
    }
    let potential = pt.mapv(|v| (v + log_floor).ln());
    pairwise_distances(potential.view())
}
