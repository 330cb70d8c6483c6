//! Carathéodory reduction of decompositions of the identity.
//!
//! The matrices `u_i u_i^T` of a decomposition all have trace one, so they
//! live in an affine space of dimension `d(d+1)/2 - 1`. Any `d(d+1)/2 + 1` of
//! them are affinely dependent, and shifting weight along such a dependence
//! keeps `sum c_i u_i u_i^T` fixed while driving one weight to zero. Repeating
//! this leaves at most `d(d+1)/2` vectors. The centered variant runs the same
//! loop on the lifted vectors `sqrt(d/(d+1)) (u_i, 1/sqrt(d))` in `R^{d+1}`,
//! where isotropy encodes both conditions, down to `d(d+3)/2` vectors.

use serde::{Deserialize, Serialize};

use crate::bounds::isotropic_cap;
use crate::error::{Error, Result};
use crate::linalg::{right_singular, sym_outer, Matrix};
use crate::systems::WeightedVectorSystem;

pub const REDUCTION_PRECONDITION_TOL: f64 = 1e-8;
/// Relative singular-value threshold for declaring points affinely dependent.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Coefficients `lambda` with `sum lambda_i = 0` and `sum lambda_i A_i = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineDependence {
    pub coefficients: Vec<f64>,
}

/// Finds a nontrivial affine dependence among equally sized matrices, or
/// `None` when they are affinely independent.
///
/// The coefficients are scaled so that the largest magnitude is one and the
/// largest-magnitude entry is positive.
pub fn affine_dependence(points: &[Matrix]) -> Option<AffineDependence> {
    let k = points.len();
    if k < 2 {
        return None;
    }
    let (r, c) = (points[0].rows(), points[0].cols());
    assert!(
        points.iter().all(|p| p.rows() == r && p.cols() == c),
        "points must share a shape"
    );
    // Column i is (vec(A_i), 1).
    let entries = r * c;
    let mut stacked = Matrix::zeros(entries + 1, k);
    for (i, p) in points.iter().enumerate() {
        for (e, &v) in p.as_slice().iter().enumerate() {
            stacked[(e, i)] = v;
        }
        stacked[(entries, i)] = 1.0;
    }
    let (sigma, v) = right_singular(&stacked);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let (jmin, smin) = sigma
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("k >= 2");
    if smin > RANK_THRESHOLD * smax {
        return None;
    }
    let mut lambda = v.column(jmin);
    let (_, &peak) = lambda
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty");
    lambda.iter_mut().for_each(|x| *x /= peak);
    Some(AffineDependence {
        coefficients: lambda,
    })
}

/// Reduced system together with the input index of every surviving vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub system: WeightedVectorSystem,
    pub source_indices: Vec<usize>,
    /// Number of weight-shifting steps performed.
    pub steps: usize,
}

pub fn reduce_isotropic(system: &WeightedVectorSystem) -> Result<WeightedVectorSystem> {
    reduce_isotropic_traced(system).map(|r| r.system)
}

pub fn reduce_centered(system: &WeightedVectorSystem) -> Result<WeightedVectorSystem> {
    reduce_centered_traced(system).map(|r| r.system)
}

pub fn reduce_isotropic_traced(system: &WeightedVectorSystem) -> Result<Reduction> {
    let report = system.check(REDUCTION_PRECONDITION_TOL);
    if !report.is_isotropic {
        return Err(Error::Precondition(format!(
            "system is not isotropic (tensor residual {:e})",
            report.tensor_residual
        )));
    }
    let bound = isotropic_cap(system.dim());
    let (kept, weights, steps) = shift_weights(system.vectors(), system.weights().to_vec(), bound)?;
    Ok(Reduction {
        system: system.restrict(&kept, weights)?,
        source_indices: kept,
        steps,
    })
}

/// Unit lift `sqrt(d/(d+1)) (u, 1/sqrt(d))` into `R^{d+1}`.
pub fn lift(u: &[f64]) -> Vec<f64> {
    let d = u.len() as f64;
    let s = (d / (d + 1.0)).sqrt();
    let mut out: Vec<f64> = u.iter().map(|x| s * x).collect();
    out.push(s / d.sqrt());
    out
}

/// Bound `d(d+3)/2` for centered decompositions.
pub fn centered_cap(d: usize) -> usize {
    d * (d + 3) / 2
}

pub fn reduce_centered_traced(system: &WeightedVectorSystem) -> Result<Reduction> {
    let report = system.check(REDUCTION_PRECONDITION_TOL);
    if !(report.is_isotropic && report.is_centered) {
        return Err(Error::Precondition(format!(
            "system is not a centered decomposition (tensor residual {:e}, center residual {:e})",
            report.tensor_residual, report.center_residual
        )));
    }
    let d = system.dim() as f64;
    let lifted: Vec<Vec<f64>> = system.vectors().iter().map(|u| lift(u)).collect();
    let lifted_weights = system.weights().iter().map(|c| c * (d + 1.0) / d).collect();
    let bound = centered_cap(system.dim());
    let (kept, lifted_weights, steps) = shift_weights(&lifted, lifted_weights, bound)?;
    let weights = lifted_weights.iter().map(|c| c * d / (d + 1.0)).collect();
    Ok(Reduction {
        system: system.restrict(&kept, weights)?,
        source_indices: kept,
        steps,
    })
}

/// Core elimination loop. Returns surviving indices (ascending), their
/// weights, and the number of steps taken.
fn shift_weights(
    vectors: &[Vec<f64>],
    mut weights: Vec<f64>,
    bound: usize,
) -> Result<(Vec<usize>, Vec<f64>, usize)> {
    let mut active: Vec<usize> = (0..vectors.len()).collect();
    let mut steps = 0;
    while active.len() > bound {
        let window = &active[..active.len().min(bound + 2)];
        let points: Vec<Matrix> = window.iter().map(|&i| sym_outer(&vectors[i])).collect();
        let dep = affine_dependence(&points).ok_or_else(|| {
            Error::NumericalRank(format!(
                "no affine dependence among {} atoms above the bound {bound}",
                window.len()
            ))
        })?;
        let lambda = dep.coefficients;

        // t = min over lambda_i > 0 of c_i / lambda_i, first index on ties.
        let mut pick: Option<(usize, f64)> = None;
        for (pos, (&i, &l)) in window.iter().zip(&lambda).enumerate() {
            if l > 0.0 {
                let t = weights[i] / l;
                if pick.is_none_or(|(_, best)| t < best) {
                    pick = Some((pos, t));
                }
            }
        }
        let (zero_pos, t) = pick
            .ok_or_else(|| Error::NumericalRank("dependence has no positive coefficient".into()))?;
        for (pos, (&i, &l)) in window.iter().zip(&lambda).enumerate() {
            weights[i] = if pos == zero_pos {
                0.0
            } else {
                weights[i] - t * l
            };
        }
        let before = active.len();
        active.retain(|&i| weights[i] > 0.0);
        debug_assert!(active.len() < before);
        steps += 1;
    }
    let kept_weights = active.iter().map(|&i| weights[i]).collect();
    Ok((active, kept_weights, steps))
}
