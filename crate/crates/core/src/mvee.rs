//! Minimum-volume origin-centered enclosing ellipsoids and the decompositions
//! of the identity read off their optimality conditions.
//!
//! The dual problem is the D-optimal design problem: maximize
//! `ln det(sum q_i p_i p_i^T)` over the probability simplex. With
//! `X = sum q_i p_i p_i^T` and `M = (d X)^{-1}`, the ellipsoid `{x : x^T M x <= 1}`
//! contains every point at optimality, and the points with `q_i > 0` sit on
//! its boundary. Mapping the boundary by `M^{1/2}` turns them into unit
//! vectors `u_i` with `sum d q_i u_i u_i^T = Id`.
//!
//! The solver is Frank-Wolfe on the dual with away steps (Todd-Yildirim).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, psd_sqrt, spd_inverse, Matrix};
use crate::systems::WeightedVectorSystem;

pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;
/// Smallest eigenvalue ratio of the uniform-weight moment matrix accepted as spanning.
const SPAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MveeResult {
    /// `M` with the ellipsoid `{x : x^T M x <= 1}`.
    pub shape: Matrix,
    pub support_indices: Vec<usize>,
    /// Dual weight of each support point, summing to one.
    pub dual_weights: Vec<f64>,
    pub iterations: usize,
    /// `max_i d p_i^T M p_i - d` over all input points; at most `d epsilon` on convergence.
    pub max_violation: f64,
}

fn validate(points: &[Vec<f64>]) -> Result<usize> {
    let d = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("no points".into()))?;
    if d == 0 {
        return Err(Error::InvalidArgument(
            "points must have positive dimension".into(),
        ));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::Dimension(format!(
                "point {i} has length {}, expected {d}",
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("point {i} is not finite")));
        }
    }
    if points.len() < d {
        return Err(Error::Degenerate(format!(
            "{} points cannot span R^{d}",
            points.len()
        )));
    }
    Ok(d)
}

fn moment(points: &[Vec<f64>], weights: &[f64], d: usize) -> Matrix {
    let mut x = Matrix::zeros(d, d);
    for (p, &q) in points.iter().zip(weights) {
        if q > 0.0 {
            x.add_outer(q, p);
        }
    }
    x
}

fn inverse_moment(points: &[Vec<f64>], weights: &[f64], d: usize) -> Result<Matrix> {
    spd_inverse(&moment(points, weights, d))
        .map_err(|_| Error::Degenerate("weighted moment matrix became singular".into()))
}

pub fn solve_central_mvee(
    points: &[Vec<f64>],
    epsilon: f64,
    max_iterations: usize,
) -> Result<MveeResult> {
    let d = validate(points)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let n = points.len();
    let df = d as f64;

    let mut q = vec![1.0 / n as f64; n];
    {
        let x = moment(points, &q, d);
        let (eigs, _) = crate::linalg::symmetric_eigen(&x)?;
        let top = eigs.last().copied().unwrap_or(0.0);
        if top.is_nan() || top <= 0.0 || eigs[0] <= SPAN_TOL * top {
            return Err(Error::Degenerate(format!("points do not span R^{d}")));
        }
    }

    let mut g = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let m = inverse_moment(points, &q, d)?;
        for (gi, p) in g.iter_mut().zip(points) {
            *gi = m.quadratic_form(p);
        }
        let (up, g_up) = argmax(&g);
        let (down, g_down) = g
            .iter()
            .zip(&q)
            .enumerate()
            .filter(|(_, (_, &qi))| qi > 0.0)
            .map(|(i, (&gi, _))| (i, gi))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("weights stay on the simplex");
        let gap_up = g_up / df - 1.0;
        let gap_down = 1.0 - g_down / df;
        if gap_up <= epsilon && gap_down <= epsilon {
            break;
        }
        if iterations >= max_iterations {
            let best = finish(points, q, d, epsilon, iterations)?;
            return Err(Error::NonConvergence {
                iterations,
                violation: best.max_violation,
                best: Box::new(best),
            });
        }
        iterations += 1;

        if gap_up >= gap_down {
            // Toward step onto the most violated point.
            let alpha = (g_up - df) / (df * (g_up - 1.0));
            q.iter_mut().for_each(|x| *x *= 1.0 - alpha);
            q[up] += alpha;
        } else {
            // Away step off the least active support point.
            let qk = q[down];
            let limit = -qk / (1.0 - qk);
            let optimal = if g_down > 1.0 {
                (g_down - df) / (df * (g_down - 1.0))
            } else {
                f64::NEG_INFINITY
            };
            if optimal <= limit {
                // Drop step: the point leaves the support entirely.
                q.iter_mut().for_each(|x| *x /= 1.0 - qk);
                q[down] = 0.0;
            } else {
                q.iter_mut().for_each(|x| *x *= 1.0 - optimal);
                q[down] += optimal;
            }
        }
    }
    finish(points, q, d, epsilon, iterations)
}

/// Applies the support threshold `q_i >= epsilon/n`, renormalizes, and
/// rebuilds the shape from the surviving weights.
fn finish(
    points: &[Vec<f64>],
    mut q: Vec<f64>,
    d: usize,
    epsilon: f64,
    iterations: usize,
) -> Result<MveeResult> {
    let n = points.len();
    let cutoff = epsilon / n as f64;
    q.iter_mut().filter(|x| **x < cutoff).for_each(|x| *x = 0.0);
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    let df = d as f64;
    let shape = inverse_moment(points, &q, d)?.scaled(1.0 / df);
    let max_violation = points
        .iter()
        .map(|p| df * shape.quadratic_form(p))
        .fold(f64::NEG_INFINITY, f64::max)
        - df;
    let support_indices: Vec<usize> = (0..n).filter(|&i| q[i] > 0.0).collect();
    let dual_weights = support_indices.iter().map(|&i| q[i]).collect();
    Ok(MveeResult {
        shape,
        support_indices,
        dual_weights,
        iterations,
        max_violation,
    })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// A decomposition of the identity extracted from an enclosing ellipsoid.
#[derive(Clone, Debug, PartialEq)]
pub struct JohnDecomposition {
    pub system: WeightedVectorSystem,
    /// Input point behind each vector of `system`.
    pub source_indices: Vec<usize>,
    pub mvee: MveeResult,
    /// Center of the ellipsoid (the origin unless centered).
    pub center: Vec<f64>,
}

pub fn john_from_points(
    points: &[Vec<f64>],
    centered: bool,
    epsilon: f64,
) -> Result<WeightedVectorSystem> {
    john_decomposition(points, centered, epsilon, DEFAULT_MAX_ITERATIONS).map(|j| j.system)
}

/// Centered mode appends a coordinate 1 to every point, solves the central
/// problem in `R^{d+1}`, and maps back. The lifted shape has the block form
/// `[[A, -A c], [-c^T A, 1 + c^T A c]]`; the factor
/// `T = [[A^{1/2}, -A^{1/2} c], [0, 1]]` satisfies `T^T T` = shape and sends
/// `(p, 1)` to `(A^{1/2}(p - c), 1)`, so normalizing and dropping the last
/// coordinate yields `u = A^{1/2}(p - c) / |A^{1/2}(p - c)|` with weight
/// `d/(d+1)` times the lifted weight `(d+1) q`.
pub fn john_decomposition(
    points: &[Vec<f64>],
    centered: bool,
    epsilon: f64,
    max_iterations: usize,
) -> Result<JohnDecomposition> {
    let d = validate(points)?;
    let (mvee, center, factor) = if centered {
        let lifted: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                let mut v = p.clone();
                v.push(1.0);
                v
            })
            .collect();
        if lifted.len() < d + 1 {
            return Err(Error::Degenerate(format!(
                "{} points cannot affinely span R^{d}",
                points.len()
            )));
        }
        let mvee = solve_central_mvee(&lifted, epsilon, max_iterations)?;
        let mut a = Matrix::zeros(d, d);
        let mut b = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                a[(i, j)] = mvee.shape[(i, j)];
            }
            b[i] = mvee.shape[(i, d)];
        }
        let a_inv = spd_inverse(&a)?;
        let center: Vec<f64> = a_inv.mul_vec(&b)?.into_iter().map(|x| -x).collect();
        (mvee, center, psd_sqrt(&a)?)
    } else {
        let mvee = solve_central_mvee(points, epsilon, max_iterations)?;
        let factor = psd_sqrt(&mvee.shape)?;
        (mvee, vec![0.0; d], factor)
    };

    let mut vectors = Vec::with_capacity(mvee.support_indices.len());
    for &i in &mvee.support_indices {
        let shifted: Vec<f64> = points[i].iter().zip(&center).map(|(x, c)| x - c).collect();
        let w = factor.mul_vec(&shifted)?;
        let n = norm(&w);
        if n.is_nan() || n <= 0.0 {
            return Err(Error::Degenerate(format!(
                "support point {i} maps to the origin"
            )));
        }
        vectors.push(w.into_iter().map(|x| x / n).collect());
    }
    let weights = mvee.dual_weights.iter().map(|q| d as f64 * q).collect();
    let system = WeightedVectorSystem::new(d, vectors, weights)?;
    Ok(JohnDecomposition {
        system,
        source_indices: mvee.support_indices.clone(),
        mvee,
        center,
    })
}
