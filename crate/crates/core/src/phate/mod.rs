//! PHATE: distances → adaptive α-decay kernel → Markov operator → diffusion →
//! potential distances → metric MDS.

pub mod kernel;
pub mod mds;
pub mod potential;

pub use kernel::{alpha_decay_kernel, diffuse, knn_bandwidths, markov_normalize};
pub use mds::{classical_mds, raw_stress, smacof_refine, SmacofResult};
pub use potential::potential_distances;

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::AlignedData;
use crate::error::{Error, Result};
use crate::linalg::{orient_columns, pairwise_distances, to_nalgebra};
use crate::projection::{MethodParams, Projection};
use crate::scalar::Real;

/// Starting configuration for the SMACOF stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MdsInit {
    #[default]
    Classical,
    /// Uniform random coordinates drawn from `seed`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhateParams {
    pub k: usize,
    pub alpha: f64,
    pub t: usize,
    pub out_dims: usize,
    pub seed: u64,
    pub mds_max_iter: usize,
    pub mds_tol: f64,
    pub log_floor: f64,
    pub mds_init: MdsInit,
}

impl Default for PhateParams {
    fn default() -> Self {
        PhateParams {
            k: 10,
            alpha: 10.0,
            t: 20,
            out_dims: 2,
            seed: 0,
            mds_max_iter: 500,
            mds_tol: 1e-6,
            log_floor: 1e-7,
            mds_init: MdsInit::Classical,
        }
    }
}

impl PhateParams {
    /// Checks the parameters against an input of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        let need = 3.max(self.k + 1);
        if n < need {
            return Err(Error::param(format!(
                "PHATE needs at least {need} points for k = {}, got {n}",
                self.k
            )));
        }
        if self.k == 0 {
            return Err(Error::param("k must be ≥ 1"));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::param(format!("alpha must be ≥ 1, got {}", self.alpha)));
        }
        if self.t == 0 {
            return Err(Error::param("t must be ≥ 1"));
        }
        if self.out_dims == 0 {
            return Err(Error::param("out_dims must be ≥ 1"));
        }
        if self.mds_max_iter == 0 {
            return Err(Error::param("mds_max_iter must be ≥ 1"));
        }
        if !(self.mds_tol > 0.0) {
            return Err(Error::param("mds_tol must be positive"));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::param("log_floor must be positive"));
        }
        Ok(())
    }
}

/// Row-stochastic diffusion operator with the bandwidths that built it.
#[derive(Debug, Clone)]
pub struct DiffusionOperator<T> {
    pub p: Array2<T>,
    pub bandwidths: Array1<T>,
    /// Number of zero bandwidths that were repaired.
    pub repaired: usize,
}

impl<T: Real> DiffusionOperator<T> {
    pub fn from_distances(d: ArrayView2<'_, T>, k: usize, alpha: T) -> Result<Self> {
        let (bandwidths, repaired) = knn_bandwidths(d, k)?;
        let kernel = alpha_decay_kernel(d, &bandwidths, alpha)?;
        let p = markov_normalize(kernel.view())?;
        Ok(DiffusionOperator { p, bandwidths, repaired })
    }

    /// Wraps an existing transition matrix; bandwidths are left empty.
    pub fn from_transition(p: Array2<T>) -> Self {
        DiffusionOperator { p, bandwidths: Array1::zeros(0), repaired: 0 }
    }
}

/// Intermediate products of one PHATE run.
#[derive(Debug, Clone)]
pub struct PhateRun<T> {
    pub operator: DiffusionOperator<T>,
    pub potential: Array2<T>,
    pub smacof: SmacofResult<T>,
}

/// Runs every PHATE stage on a raw `n × d` matrix.
pub fn phate_embed<T: Real>(x: ArrayView2<'_, T>, params: &PhateParams) -> Result<PhateRun<T>> {
    params.validate(x.nrows())?;
    let d = pairwise_distances(x)?;
    let operator = DiffusionOperator::from_distances(d.view(), params.k, T::lit(params.alpha))?;
    let pt = diffuse(operator.p.view(), params.t)?;
    let potential = potential_distances(pt.view(), T::lit(params.log_floor))?;
    let init = match params.mds_init {
        MdsInit::Classical => classical_mds(potential.view(), params.out_dims)?,
        MdsInit::Random => random_init(&potential, params.out_dims, params.seed),
    };
    let mut smacof = smacof_refine(
        potential.view(),
        init.view(),
        params.mds_max_iter,
        T::lit(params.mds_tol),
    )?;
    orient_columns(&mut smacof.coords);
    Ok(PhateRun { operator, potential, smacof })
}

fn random_init<T: Real>(v: &Array2<T>, out_dims: usize, seed: u64) -> Array2<T> {
    let n = v.nrows();
    let pairs = (n * (n - 1) / 2).max(1);
    let mean = v.iter().map(|d| d.as_f64()).sum::<f64>() / (2 * pairs) as f64;
    let scale = if mean > 0.0 { mean } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((n, out_dims), || T::lit(rng.random_range(-1.0..1.0) * scale))
}

/// PHATE projection of aligned data.
pub fn phate_project<T: Real>(data: &AlignedData<T>, params: &PhateParams) -> Result<Projection<T>> {
    let run = phate_embed(data.matrix.view(), params)?;
    let mut warnings = Vec::new();
    if run.operator.repaired > 0 {
        warnings.push(format!(
            "{} zero bandwidth(s) from duplicate points repaired to {}",
            run.operator.repaired,
            run.operator.bandwidths.iter().fold(T::infinity(), |m, &s| m.min(s))
        ));
    }
    Ok(Projection::new(
        data,
        run.smacof.coords,
        MethodParams::Phate(params.clone()),
        Some(run.smacof.stress.as_f64()),
        warnings,
    ))
}

fn spectrum_entropy(magnitudes: &[f64], t: usize) -> f64 {
    let powered: Vec<f64> = magnitudes.iter().map(|m| m.powi(t as i32)).collect();
    let total: f64 = powered.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    powered
        .iter()
        .map(|p| p / total)
        .filter(|&q| q > 0.0)
        .map(|q| -q * q.ln())
        .sum()
}

/// Entropy of the normalized eigenvalue spectrum of `pᵗ`, per candidate `t`.
pub fn entropy_curve<T: Real>(op: &DiffusionOperator<T>, candidates: &[usize]) -> Vec<(usize, f64)> {
    let magnitudes: Vec<f64> = to_nalgebra(op.p.view())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    candidates.iter().map(|&t| (t, spectrum_entropy(&magnitudes, t))).collect()
}

/// Picks the diffusion time at the knee of the entropy-vs-t curve.
///
/// Candidates are sorted and deduplicated; both axes are rescaled to [0, 1]
/// and the knee is the point farthest from the chord joining the first and
/// last points. Ties go to the smallest t.
pub fn select_t_entropy<T: Real>(op: &DiffusionOperator<T>, candidates: &[usize]) -> Result<usize> {
    let mut ts: Vec<usize> = candidates.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let Some(&first) = ts.first() else {
        return Err(Error::param("no candidate diffusion times"));
    };
    if ts.len() < 3 {
        return Ok(first);
    }
    Ok(knee(&entropy_curve(op, &ts)))
}

fn knee(curve: &[(usize, f64)]) -> usize {
    let (t0, h0) = curve[0];
    let (t1, h1) = curve[curve.len() - 1];
    let t_span = (t1 - t0) as f64;
    let h_lo = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let h_hi = curve.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let h_span = h_hi - h_lo;
    if !(h_span > 0.0) {
        return t0;
    }
    let norm = |(t, h): (usize, f64)| ((t - t0) as f64 / t_span, (h - h_lo) / h_span);
    let (ax, ay) = norm((t0, h0));
    let (bx, by) = norm((t1, h1));
    let (dx, dy) = (bx - ax, by - ay);
    let len = (dx * dx + dy * dy).sqrt();
    let mut best = (t0, 0.0);
    for &c in curve {
        let (px, py) = norm(c);
        let dist = ((px - ax) * dy - (py - ay) * dx).abs() / len;
        if dist > best.1 {
            best = (c.0, dist);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_candidate_is_returned() {
        let op = DiffusionOperator::from_transition(Array2::<f64>::eye(4));
        assert_eq!(select_t_entropy(&op, &[20]).unwrap(), 20);
        assert!(select_t_entropy(&op, &[]).is_err());
    }

    #[test]
    fn flat_entropy_picks_first_candidate() {
        let op = DiffusionOperator::from_transition(Array2::<f64>::eye(5));
        assert_eq!(select_t_entropy(&op, &[30, 5, 10, 20, 15]).unwrap(), 5);
    }

    #[test]
    fn knee_of_a_bent_curve() {
        // Sharp drop then plateau: the corner sits at t = 10.
        let curve = [(5, 3.0), (10, 1.0), (15, 0.9), (20, 0.85), (30, 0.8)];
        assert_eq!(knee(&curve), 10);
    }

    #[test]
    fn params_reject_bad_values() {
        let p = PhateParams { k: 5, ..PhateParams::default() };
        assert!(p.validate(5).is_err());
        assert!(p.validate(6).is_ok());
        assert!(PhateParams { alpha: 0.5, ..p.clone() }.validate(10).is_err());
        assert!(PhateParams { k: 1, ..p }.validate(2).is_err());
    }

    #[test]
    fn params_default_when_fields_missing() {
        let p: PhateParams = serde_json::from_str(r#"{"t": 5}"#).unwrap();
        assert_eq!(p, PhateParams { t: 5, ..PhateParams::default() });
    }
}
