//! Weighted unit-vector systems and their isotropy checks.
//!
//! A [`WeightedVectorSystem`] is a list of unit vectors `u_i` in `R^d` with
//! positive weights `c_i`. It is a decomposition of the identity when
//! `sum c_i u_i u_i^T = Id`, and centered when additionally `sum c_i u_i = 0`.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{householder_thin_q, norm, Matrix};
use crate::streams::StreamFactory;

/// Norms within this distance of 1 are accepted untouched.
pub const UNIT_TOL: f64 = 1e-10;
/// Norms within this distance of 1 are renormalized; anything further is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct WeightedVectorSystem {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Unvalidated file form of a system. Unknown fields (such as
/// `format_version`) are ignored.
#[derive(Deserialize)]
struct RawSystem {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawSystem> for WeightedVectorSystem {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        WeightedVectorSystem::new(raw.dim, raw.vectors, raw.weights)
    }
}

impl WeightedVectorSystem {
    pub fn new(dim: usize, mut vectors: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::InvalidArgument(
                "system needs at least one vector".into(),
            ));
        }
        if vectors.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} vectors but {} weights",
                vectors.len(),
                weights.len()
            )));
        }
        for (i, c) in weights.iter().enumerate() {
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight {i} must be positive and finite, got {c}"
                )));
            }
        }
        for (i, v) in vectors.iter_mut().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "vector {i} has length {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("vector {i} is not finite")));
            }
            let n = norm(v);
            let gap = (n - 1.0).abs();
            if gap <= UNIT_TOL {
                continue;
            }
            if gap <= RENORMALIZE_TOL {
                v.iter_mut().for_each(|x| *x /= n);
            } else {
                return Err(Error::InvalidArgument(format!(
                    "vector {i} has norm {n}, not a unit vector"
                )));
            }
        }
        Ok(Self {
            dim,
            vectors,
            weights,
        })
    }

    /// Builds a system from arbitrary nonzero vectors, normalizing each.
    pub fn from_directions(
        dim: usize,
        directions: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let mut units = Vec::with_capacity(directions.len());
        for (i, v) in directions.into_iter().enumerate() {
            let n = norm(&v);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "direction {i} has zero norm"
                )));
            }
            units.push(v.into_iter().map(|x| x / n).collect());
        }
        Self::new(dim, units, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors `m`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sampling probabilities `c_i / sum c`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.weight_sum();
        self.weights.iter().map(|c| c / total).collect()
    }

    /// `sum c_i u_i u_i^T`
    pub fn tensor_sum(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (u, &c) in self.vectors.iter().zip(&self.weights) {
            m.add_outer(c, u);
        }
        m
    }

    /// `sum c_i u_i`
    pub fn center_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for (u, &c) in self.vectors.iter().zip(&self.weights) {
            for (a, b) in s.iter_mut().zip(u) {
                *a += c * b;
            }
        }
        s
    }

    pub fn check(&self, tolerance: f64) -> IsotropyReport {
        check(self, tolerance)
    }

    /// Keeps the vectors at `indices` (in the given order) with new weights.
    pub fn restrict(&self, indices: &[usize], weights: Vec<f64>) -> Result<Self> {
        let vectors = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        Self::new(self.dim, vectors, weights)
    }

    /// `det(u_{i_1}, ..., u_{i_d})^2` for `d` indices.
    pub fn det_squared(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.dim);
        let d = self.dim;
        let mut buf = vec![0.0; d * d];
        for (j, &i) in indices.iter().enumerate() {
            buf[j * d..(j + 1) * d].copy_from_slice(&self.vectors[i]);
        }
        let det = crate::linalg::lu_det_in_place(&mut buf, d);
        det * det
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        to_measure(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// JSON document with a leading `format_version` field.
    pub fn to_json_document(&self) -> String {
        let doc = SystemDocument {
            format_version: FORMAT_VERSION,
            system: self,
        };
        serde_json::to_string_pretty(&doc).expect("system serialization cannot fail")
    }
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct SystemDocument<'a> {
    format_version: u32,
    #[serde(flatten)]
    system: &'a WeightedVectorSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    /// Frobenius norm of `sum c_i u_i u_i^T - Id`.
    pub tensor_residual: f64,
    /// Euclidean norm of `sum c_i u_i`.
    pub center_residual: f64,
    pub weight_sum: f64,
    pub tolerance: f64,
    pub is_isotropic: bool,
    pub is_centered: bool,
}

pub fn check(system: &WeightedVectorSystem, tolerance: f64) -> IsotropyReport {
    let tensor_residual = system
        .tensor_sum()
        .frobenius_distance(&Matrix::identity(system.dim));
    let center_residual = norm(&system.center_sum());
    IsotropyReport {
        tensor_residual,
        center_residual,
        weight_sum: system.weight_sum(),
        tolerance,
        is_isotropic: tensor_residual <= tolerance,
        is_centered: center_residual <= tolerance,
    }
}

/// Discrete probability measure with atoms `sqrt(d) u_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, Vec::len)
    }

    /// `sum mass_i atom_i atom_i^T`
    pub fn second_moment(&self) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for (a, &p) in self.atoms.iter().zip(&self.masses) {
            m.add_outer(p, a);
        }
        m
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for (a, &p) in self.atoms.iter().zip(&self.masses) {
            for (x, y) in s.iter_mut().zip(a) {
                *x += p * y;
            }
        }
        s
    }
}

pub const MEASURE_PRECONDITION_TOL: f64 = 1e-8;

/// Scales a decomposition of the identity into an isotropic probability measure.
///
/// Masses are `c_i / sum c`, which is `c_i / d` for an exact decomposition and
/// keeps the total mass at one when the weights carry rounding error.
pub fn to_measure(system: &WeightedVectorSystem) -> Result<DiscreteMeasure> {
    let report = system.check(MEASURE_PRECONDITION_TOL);
    if !report.is_isotropic {
        return Err(Error::Precondition(format!(
            "system is not isotropic (tensor residual {:e})",
            report.tensor_residual
        )));
    }
    let scale = (system.dim as f64).sqrt();
    let atoms = system
        .vectors
        .iter()
        .map(|u| u.iter().map(|x| x * scale).collect())
        .collect();
    Ok(DiscreteMeasure {
        atoms,
        masses: system.probabilities(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Simplex,
    Cross,
    RandomFrame,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Simplex => "simplex",
            GeneratorKind::Cross => "cross",
            GeneratorKind::RandomFrame => "random-frame",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(GeneratorKind::Simplex),
            "cross" => Ok(GeneratorKind::Cross),
            "random-frame" => Ok(GeneratorKind::RandomFrame),
            other => Err(Error::InvalidArgument(format!(
                "unknown generator kind {other:?}"
            ))),
        }
    }
}

pub fn generate(
    kind: GeneratorKind,
    d: usize,
    m: Option<usize>,
    seed: Option<u64>,
) -> Result<WeightedVectorSystem> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    match kind {
        GeneratorKind::Simplex => {
            if let Some(m) = m.filter(|&m| m != d + 1) {
                return Err(Error::InvalidArgument(format!(
                    "the simplex system in dimension {d} has {} vectors, not {m}",
                    d + 1
                )));
            }
            simplex(d)
        }
        GeneratorKind::Cross => {
            if let Some(m) = m.filter(|&m| m != 2 * d) {
                return Err(Error::InvalidArgument(format!(
                    "the cross-polytope system in dimension {d} has {} vectors, not {m}",
                    2 * d
                )));
            }
            cross(d)
        }
        GeneratorKind::RandomFrame => {
            let m = m.ok_or_else(|| Error::InvalidArgument("random-frame needs m".into()))?;
            let seed =
                seed.ok_or_else(|| Error::InvalidArgument("random-frame needs a seed".into()))?;
            random_frame(d, m, seed)
        }
    }
}

/// Vertices of the regular simplex inscribed in the unit sphere, weights `d/(d+1)`.
///
/// The first vertex is `e_1`; the others are `(-1/d, sqrt(1 - 1/d^2) w)` with
/// `w` running over the vertices of the simplex one dimension down.
pub fn simplex(d: usize) -> Result<WeightedVectorSystem> {
    let vectors = simplex_vertices(d);
    let c = d as f64 / (d + 1) as f64;
    WeightedVectorSystem::new(d, vectors, vec![c; d + 1])
}

fn simplex_vertices(d: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let df = d as f64;
    let tail = (1.0 - 1.0 / (df * df)).sqrt();
    let mut out = Vec::with_capacity(d + 1);
    let mut first = vec![0.0; d];
    first[0] = 1.0;
    out.push(first);
    for w in simplex_vertices(d - 1) {
        let mut v = Vec::with_capacity(d);
        v.push(-1.0 / df);
        v.extend(w.iter().map(|x| tail * x));
        out.push(v);
    }
    out
}

/// `+e_1, -e_1, +e_2, -e_2, ...` with weights `1/2`.
pub fn cross(d: usize) -> Result<WeightedVectorSystem> {
    let mut vectors = Vec::with_capacity(2 * d);
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[i] = sign;
            vectors.push(v);
        }
    }
    WeightedVectorSystem::new(d, vectors, vec![0.5; 2 * d])
}

/// Squared row norms below this count as a zero row.
const ZERO_ROW: f64 = 1e-24;

/// Rows of an `m x d` matrix with orthonormal columns, taken from the
/// Householder QR of a seeded Gaussian matrix. Row `r_i` becomes the unit
/// vector `r_i/|r_i|` with weight `|r_i|^2`, so the system decomposes the
/// identity but is in general not centered.
pub fn random_frame(d: usize, m: usize, seed: u64) -> Result<WeightedVectorSystem> {
    if m < d {
        return Err(Error::InvalidArgument(format!(
            "random-frame needs m >= d, got m={m}, d={d}"
        )));
    }
    let streams = StreamFactory::new(seed);
    for attempt in 0u64.. {
        let mut rng = streams.stream(attempt);
        let data: Vec<f64> = (0..m * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let g = Matrix::new(m, d, data)?;
        let q = householder_thin_q(&g)?;
        let mut vectors = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let mut degenerate = false;
        for i in 0..m {
            let row = q.row(i);
            let sq: f64 = row.iter().map(|x| x * x).sum();
            if sq <= ZERO_ROW {
                degenerate = true;
                break;
            }
            let n = sq.sqrt();
            vectors.push(row.iter().map(|x| x / n).collect());
            weights.push(sq);
        }
        if !degenerate {
            return WeightedVectorSystem::new(d, vectors, weights);
        }
    }
    unreachable!("stream counter exhausted")
}
