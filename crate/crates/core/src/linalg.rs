//! Small dense real linear algebra.
//!
//! Everything here works on row-major `f64` storage and is tuned for the
//! dimensions that come up with vector systems (a handful up to a few dozen).
//! No routine allocates more than a couple of scratch matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(
                "matrix must have at least one row and column".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix whose j-th column is `columns[j]`.
    pub fn from_columns<V: AsRef<[f64]>>(columns: &[V]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::Dimension("no columns".into()));
        }
        let rows = columns[0].as_ref().len();
        let mut data = vec![0.0; rows * cols];
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::Dimension(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `x^T A x` for square `A`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert!(self.is_square() && x.len() == self.rows);
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `self += s * u u^T`
    pub fn add_outer(&mut self, s: f64, u: &[f64]) {
        assert!(self.is_square() && u.len() == self.rows);
        let n = self.rows;
        for (row, &ui) in self.data.chunks_exact_mut(n).zip(u) {
            let su = s * ui;
            for (x, &uj) in row.iter_mut().zip(u) {
                *x += su * uj;
            }
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Determinant by LU factorization with partial pivoting.
pub fn det(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let mut buf = m.data.clone();
    Ok(lu_det_in_place(&mut buf, m.rows))
}

/// Determinant of the matrix whose columns are `columns`.
pub fn det_of_columns<V: AsRef<[f64]>>(columns: &[V]) -> Result<f64> {
    let n = columns.len();
    let mut buf = vec![0.0; n * n];
    for (j, c) in columns.iter().enumerate() {
        let c = c.as_ref();
        if c.len() != n {
            return Err(Error::Dimension(format!(
                "{n} columns of length {}",
                c.len()
            )));
        }
        // Stored transposed; det(A^T) = det(A).
        buf[j * n..(j + 1) * n].copy_from_slice(c);
    }
    Ok(lu_det_in_place(&mut buf, n))
}

/// Determinant of the row-major `n x n` matrix in `a`, destroying `a`.
///
/// Returns exactly `0.0` when a pivot column is identically zero.
pub fn lu_det_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in (k + 1)..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in (k + 1)..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det
}

/// `u u^T`.
pub fn sym_outer(u: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(u.len(), u.len());
    m.add_outer(1.0, u);
    m
}

/// Orthogonal projector that removes the span of a growing orthonormal set.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    dim: usize,
    removed: Vec<Vec<f64>>,
}

/// Below this fraction of its original norm a vector counts as lying in the span.
const SPAN_DROP: f64 = 1e-12;

impl Projector {
    /// The identity projector on `R^dim` (nothing projected out yet).
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            removed: Vec::new(),
        }
    }

    /// Projector removing the span of `vectors`.
    pub fn spanning_out<V: AsRef<[f64]>>(dim: usize, vectors: &[V]) -> Result<Self> {
        let mut p = Self::new(dim);
        for v in vectors {
            p.push(v.as_ref())?;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Orthonormal basis of the projected-out subspace.
    pub fn removed_basis(&self) -> &[Vec<f64>] {
        &self.removed
    }

    /// Rank of the projector, i.e. `dim - removed`.
    pub fn rank(&self) -> usize {
        self.dim - self.removed.len()
    }

    /// Adds `v` to the projected-out span by modified Gram-Schmidt and returns
    /// the new unit basis vector.
    pub fn push(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        let before = norm(v);
        let mut w = self.project_out(v)?;
        let mut after = norm(&w);
        // Second pass when cancellation ate more than half the norm.
        if after < 0.5 * before {
            w = self.project_out(&w)?;
            after = norm(&w);
        }
        if before == 0.0 || after <= SPAN_DROP * before {
            return Err(Error::Degenerate(
                "vector lies in the already projected-out span".into(),
            ));
        }
        w.iter_mut().for_each(|x| *x /= after);
        self.removed.push(w.clone());
        Ok(w)
    }

    /// Component of `x` orthogonal to the projected-out span.
    pub fn project_out(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "projector on R^{} applied to a {}-vector",
                self.dim,
                x.len()
            )));
        }
        let mut y = x.to_vec();
        for b in &self.removed {
            let c = dot(b, &y);
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi -= c * bi;
            }
        }
        Ok(y)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues (ascending) and the matrix whose columns are the
/// matching orthonormal eigenvectors.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "eigendecomposition of a non-square matrix".into(),
        ));
    }
    let n = m.rows;
    let mut a = m.clone();
    // Symmetrize so the rotations see one consistent matrix.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new_j)] = v[(k, old_j)];
        }
    }
    Ok((values, vectors))
}

const SYMMETRY_TOL: f64 = 1e-10;
const NEGATIVE_EIG_TOL: f64 = 1e-10;

/// Symmetric square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "square root of a non-square matrix".into(),
        ));
    }
    if m.symmetry_defect() > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (defect {:e})",
            m.symmetry_defect()
        )));
    }
    let (values, vectors) = symmetric_eigen(m)?;
    if let Some(&lowest) = values.first() {
        if lowest < -NEGATIVE_EIG_TOL {
            return Err(Error::NotPsd(lowest));
        }
    }
    let n = m.rows;
    let mut out = Matrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let root = lam.max(0.0).sqrt();
        let col = vectors.column(k);
        out.add_outer(root, &col);
    }
    Ok(out)
}

/// Inverse of a symmetric positive definite matrix through its Cholesky factor.
pub fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.rows;
    let l = cholesky(m)?;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[col] = 1.0;
        // L y = e
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
            y[i] = (e[i] - s) / l[(i, i)];
        }
        // L^T x = y
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[(k, i)] * x[k]).sum();
            x[i] = (y[i] - s) / l[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    // Clean up asymmetry from rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    Ok(inv)
}

/// Lower-triangular `L` with `L L^T = m`.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension("Cholesky of a non-square matrix".into()));
    }
    let n = m.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPsd(diag));
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Thin `Q` factor (`m x n`, orthonormal columns) of a Householder QR of a tall matrix.
pub fn householder_thin_q(a: &Matrix) -> Result<Matrix> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(Error::Dimension(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = norm(&v);
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm = norm(&v);
        v.iter_mut().for_each(|x| *x /= vnorm);
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * s * v[i - k];
            }
        }
        reflectors.push(v);
    }
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let s: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..m {
                q[(i, j)] -= 2.0 * s * v[i - k];
            }
        }
    }
    Ok(q)
}

/// Right singular vectors and singular values by one-sided (Hestenes) Jacobi.
///
/// Returns `(sigma, v)` where `sigma[j]` is the norm of the j-th rotated
/// column and column `j` of `v` is the matching right singular vector.
/// Works for any shape; with more columns than rows the surplus singular
/// values come out (numerically) zero.
pub fn right_singular(a: &Matrix) -> (Vec<f64>, Matrix) {
    let k = a.cols;
    // Column-major working copy.
    let mut u: Vec<Vec<f64>> = (0..k).map(|j| a.column(j)).collect();
    let mut v = Matrix::identity(k);
    // Columns this small are numerically zero; rotating them only churns.
    let tiny = (f64::EPSILON * a.frobenius_norm()).powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if alpha <= tiny || beta <= tiny {
                    continue;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = u.split_at_mut(q);
                for (xp, xq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (up, uq) = (*xp, *xq);
                    *xp = c * up - s * uq;
                    *xq = s * up + c * uq;
                }
                for i in 0..k {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = u.iter().map(|c| norm(c)).collect();
    (sigma, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn det_identity_and_repeated_column() {
        assert_eq!(det(&Matrix::identity(2)).unwrap(), 1.0);
        let m = Matrix::from_columns(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(det(&m).unwrap(), 0.0);
    }

    #[test]
    fn det_of_120_degree_pair() {
        let a = 120f64.to_radians();
        let d = det_of_columns(&[vec![1.0, 0.0], vec![a.cos(), a.sin()]]).unwrap();
        assert!(close(d * d, 0.75, 1e-15));
    }

    #[test]
    fn det_keeps_sign() {
        let m = Matrix::from_columns(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(det(&m).unwrap(), -1.0);
    }

    #[test]
    fn det_rejects_non_square() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(det(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn matrix_rejects_non_finite() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn outer_products() {
        let e1 = sym_outer(&[1.0, 0.0]);
        assert_eq!(e1.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = sym_outer(&[h, h]);
        for &x in m.as_slice() {
            assert!(close(x, 0.5, 1e-15));
        }
        assert!(sym_outer(&[0.0, 0.0, 0.0])
            .as_slice()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn projections() {
        let p = Projector::spanning_out(2, &[[1.0, 0.0]]).unwrap();
        assert_eq!(p.project_out(&[3.0, 4.0]).unwrap(), vec![0.0, 4.0]);

        let id = Projector::new(2);
        assert_eq!(id.project_out(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = Projector::spanning_out(2, &[[h, h]]).unwrap();
        let y = p.project_out(&[1.0, 0.0]).unwrap();
        assert!(close(y[0], 0.5, 1e-15) && close(y[1], -0.5, 1e-15));
    }

    #[test]
    fn projector_dimension_mismatch() {
        let p = Projector::new(3);
        assert!(matches!(
            p.project_out(&[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn projector_rejects_vector_in_span() {
        let mut p = Projector::new(3);
        p.push(&[1.0, 0.0, 0.0]).unwrap();
        p.push(&[1.0, 1.0, 0.0]).unwrap();
        assert!(p.push(&[2.0, -3.0, 0.0]).is_err());
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn sqrt_of_simple_matrices() {
        let s = psd_sqrt(&Matrix::identity(3)).unwrap();
        assert!(s.frobenius_distance(&Matrix::identity(3)) < 1e-14);

        let s = psd_sqrt(&Matrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!(s.frobenius_distance(&Matrix::from_diagonal(&[2.0, 3.0])) < 1e-14);

        let m = Matrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = psd_sqrt(&m).unwrap();
        assert!(s.matmul(&s).unwrap().frobenius_distance(&m) < 1e-12);
        // Eigenvalues 1 and 3 along (1,-1) and (1,1).
        let r1 = 0.5 * (3f64.sqrt() + 1.0);
        let r2 = 0.5 * (3f64.sqrt() - 1.0);
        assert!(close(s[(0, 0)], r1, 1e-14) && close(s[(0, 1)], r2, 1e-14));
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = Matrix::from_diagonal(&[1.0, -1e-3]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd(_))));
        let ok = Matrix::from_diagonal(&[1.0, -1e-12]);
        assert!(psd_sqrt(&ok).is_ok());
    }

    #[test]
    fn spd_inverse_round_trip() {
        let m = Matrix::new(3, 3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let inv = spd_inverse(&m).unwrap();
        let p = m.matmul(&inv).unwrap();
        assert!(p.frobenius_distance(&Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn thin_q_is_orthonormal() {
        let a = Matrix::new(4, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.5]).unwrap();
        let q = householder_thin_q(&a).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.frobenius_distance(&Matrix::identity(2)) < 1e-14);
        // Same column space: the residual of projecting A onto span(Q) vanishes.
        let proj = q.matmul(&q.transpose()).unwrap().matmul(&a).unwrap();
        assert!(proj.frobenius_distance(&a) < 1e-12);
    }

    #[test]
    fn singular_vector_of_rank_deficient() {
        // Third column = first + second.
        let a = Matrix::from_columns(&[[1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [1.0, 1.0, 3.0]]).unwrap();
        let (sigma, v) = right_singular(&a);
        let (jmin, _) = sigma
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(sigma[jmin] < 1e-14);
        let lam = v.column(jmin);
        let r = a.mul_vec(&lam).unwrap();
        assert!(norm(&r) < 1e-14);
        assert!(close(lam[0] / lam[2], -1.0, 1e-12));
    }
}
