//! Choosing `d` well spread vectors out of a decomposition of the identity.
//!
//! [`dr_select`] is the greedy Dvoretzky-Rogers procedure: at each step take
//! the vector with the largest component orthogonal to everything chosen so
//! far. Because `sum c_i |Q u_i|^2 = trace Q` for every orthogonal projector
//! `Q`, the step-`j` winner has `|Q_j x_j|^2 >= (d-j+1)/d`, and the product of
//! these gives `det^2 >= d!/d^d`. [`best_subset`] is the exhaustive oracle.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, for_each_subset};
use crate::error::{Error, Result};
use crate::linalg::{det_of_columns, norm, Projector};
use crate::systems::WeightedVectorSystem;

pub const SELECTION_PRECONDITION_TOL: f64 = 1e-8;
/// Largest remaining projection norm below which the greedy loop gives up.
pub const STALL_THRESHOLD: f64 = 1e-10;
pub const BEST_SUBSET_LIMIT: f64 = 1e7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionCertificate {
    /// Selected input indices in the order they were picked.
    pub indices: Vec<usize>,
    /// Orthonormal basis; the j-th selected vector lies in the span of the first j.
    pub basis: Vec<Vec<f64>>,
    /// `|Q_j x_j|` for each step.
    pub step_norms: Vec<f64>,
    /// `sum_i c_i |Q_j u_i|^2` for each step; equals `trace Q_j = d - j + 1`.
    pub weighted_step_mass: Vec<f64>,
    /// Squared determinant of the selected vectors, by LU.
    pub det_squared: f64,
}

impl SelectionCertificate {
    /// `prod |Q_j x_j|^2`, the Gram-Schmidt route to the squared volume.
    pub fn step_product(&self) -> f64 {
        self.step_norms.iter().map(|s| s * s).product()
    }
}

pub fn dr_select(system: &WeightedVectorSystem) -> Result<SelectionCertificate> {
    let d = system.dim();
    let m = system.len();
    if m < d {
        return Err(Error::Precondition(format!(
            "need at least d={d} vectors, got {m}"
        )));
    }
    let report = system.check(SELECTION_PRECONDITION_TOL);
    if !report.is_isotropic {
        return Err(Error::Precondition(format!(
            "system is not isotropic (tensor residual {:e})",
            report.tensor_residual
        )));
    }

    let mut projector = Projector::new(d);
    let mut indices = Vec::with_capacity(d);
    let mut basis = Vec::with_capacity(d);
    let mut step_norms = Vec::with_capacity(d);
    let mut weighted_step_mass = Vec::with_capacity(d);

    for step in 0..d {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        let mut mass = 0.0;
        for (i, (u, &c)) in system.vectors().iter().zip(system.weights()).enumerate() {
            let r = norm(&projector.project_out(u)?);
            mass += c * r * r;
            if r > best.1 {
                best = (i, r);
            }
        }
        let (winner, r) = best;
        if r <= STALL_THRESHOLD {
            return Err(Error::SelectionStalled {
                step: step + 1,
                threshold: STALL_THRESHOLD,
            });
        }
        let b = projector.push(system.vector(winner))?;
        indices.push(winner);
        basis.push(b);
        step_norms.push(r);
        weighted_step_mass.push(mass);
    }

    let columns: Vec<&[f64]> = indices.iter().map(|&i| system.vector(i)).collect();
    let det = det_of_columns(&columns)?;
    Ok(SelectionCertificate {
        indices,
        basis,
        step_norms,
        weighted_step_mass,
        det_squared: det * det,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSubset {
    pub indices: Vec<usize>,
    pub det_squared: f64,
}

/// Exhaustive maximum of `det^2` over all `d`-subsets; the lexicographically
/// first maximizer wins ties.
pub fn best_subset(system: &WeightedVectorSystem) -> Result<BestSubset> {
    let d = system.dim();
    let m = system.len();
    if m < d {
        return Err(Error::Precondition(format!(
            "need at least d={d} vectors, got {m}"
        )));
    }
    let count = binomial(m, d);
    if count > BEST_SUBSET_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: BEST_SUBSET_LIMIT,
        });
    }
    let mut best = BestSubset {
        indices: (0..d).collect(),
        det_squared: f64::NEG_INFINITY,
    };
    for_each_subset(m, d, |s| {
        let v = system.det_squared(s);
        if v > best.det_squared {
            best.det_squared = v;
            best.indices.copy_from_slice(s);
        }
        true
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::systems::{cross, random_frame, simplex};

    #[test]
    fn cross_polytope_selection() {
        let c = dr_select(&cross(2).unwrap()).unwrap();
        assert_eq!(c.indices, vec![0, 2]);
        assert!((c.det_squared - 1.0).abs() < 1e-15);
        assert_eq!(c.step_norms, vec![1.0, 1.0]);
    }

    #[test]
    fn planar_simplex_selection() {
        let c = dr_select(&simplex(2).unwrap()).unwrap();
        assert_eq!(c.indices[0], 0);
        let sin120 = 120f64.to_radians().sin();
        assert!((c.step_norms[1] - sin120).abs() < 1e-15);
        assert!((c.det_squared - 0.75).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_subset_dominates() {
        // e_1, e_2, e_3 alongside a rotated copy, each frame with weight 1/2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let vectors = vec![
            vec![h, h, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![h, -h, 0.0],
            vec![0.0, 0.0, -1.0],
        ];
        let s = WeightedVectorSystem::new(3, vectors, vec![0.5; 6]).unwrap();
        assert!(s.check(1e-12).is_isotropic);
        let c = dr_select(&s).unwrap();
        assert!((c.det_squared - 1.0).abs() < 1e-15);
        assert!(c.step_norms.iter().all(|&r| (r - 1.0).abs() < 1e-15));
    }

    #[test]
    fn certificate_structure() {
        let s = random_frame(5, 17, 3).unwrap();
        let c = dr_select(&s).unwrap();
        let d = 5;
        for (j, b) in c.basis.iter().enumerate() {
            for (k, b2) in c.basis.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((dot(b, b2) - want).abs() < 1e-10);
            }
            // x_j lies in span{b_1..b_j}
            let x = s.vector(c.indices[j]);
            let inside: f64 = c.basis[..=j].iter().map(|b| dot(b, x).powi(2)).sum();
            assert!((inside - 1.0).abs() < 1e-8);
            let expected_mass = (d - j) as f64;
            assert!((c.weighted_step_mass[j] - expected_mass).abs() < 1e-8);
            assert!(c.step_norms[j].powi(2) >= (d - j) as f64 / d as f64 - 1e-9);
        }
        assert!((c.det_squared - c.step_product()).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_isotropic() {
        let s = WeightedVectorSystem::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 1.0])
            .unwrap();
        assert!(matches!(dr_select(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn best_subset_values() {
        let b = best_subset(&simplex(2).unwrap()).unwrap();
        assert!((b.det_squared - 0.75).abs() < 1e-15);
        assert_eq!(b.indices, vec![0, 1]);
        let b = best_subset(&cross(2).unwrap()).unwrap();
        assert!((b.det_squared - 1.0).abs() < 1e-15);
        assert_eq!(b.indices, vec![0, 2]);
    }

    #[test]
    fn best_subset_guard() {
        let s = random_frame(5, 200, 1).unwrap();
        assert!(matches!(best_subset(&s), Err(Error::TooLarge { .. })));
    }
}
