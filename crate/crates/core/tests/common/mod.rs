//! Independent oracles shared by the integration suites. Nothing here calls
//! the routine it is used to check.

#![allow(dead_code)]

use isotropy_core::linalg::{lu_det_in_place, Matrix};
use isotropy_core::systems::{cross, random_frame, simplex};
use isotropy_core::WeightedVectorSystem;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

/// `gamma(d, m_bar)` as an exact rational `m^d (m-d)! / m!`.
pub fn gamma_rational(d: usize, m: usize) -> BigRational {
    let mb = m.min(d * (d + 1) / 2);
    let mut num = BigInt::one();
    for _ in 0..d {
        num *= BigInt::from(mb);
    }
    let mut den = BigInt::one();
    for k in 0..d {
        den *= BigInt::from(mb - k);
    }
    BigRational::new(num, den)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

/// Squared determinant of the given vectors by cofactor expansion.
pub fn det2_cofactor(cols: &[&[f64]]) -> f64 {
    fn det(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut acc = 0.0;
        for j in 0..n {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * m[0][j] * det(&minor);
        }
        acc
    }
    let rows: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
    let d = det(&rows);
    d * d
}

/// Enumerates every ordered index tuple of length `d` with probabilities `c_i/d`.
pub fn for_each_tuple(system: &WeightedVectorSystem, mut f: impl FnMut(&[usize], f64)) {
    let d = system.dim();
    let m = system.len();
    let p: Vec<f64> = system.weights().iter().map(|c| c / d as f64).collect();
    let mut idx = vec![0usize; d];
    loop {
        let prob: f64 = idx.iter().map(|&i| p[i]).product();
        f(&idx, prob);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                return;
            }
        }
    }
}

/// `E[det^2]` over all ordered tuples, repeated indices included.
pub fn tuple_expected_det2(system: &WeightedVectorSystem) -> f64 {
    let mut acc = 0.0;
    for_each_tuple(system, |idx, prob| {
        let cols: Vec<&[f64]> = idx.iter().map(|&i| system.vector(i)).collect();
        acc += prob * det2_cofactor(&cols);
    });
    acc
}

/// `P(det^2 >= threshold)` over all ordered tuples.
pub fn tuple_tail(system: &WeightedVectorSystem, threshold: f64) -> f64 {
    let mut acc = 0.0;
    for_each_tuple(system, |idx, prob| {
        let cols: Vec<&[f64]> = idx.iter().map(|&i| system.vector(i)).collect();
        if det2_cofactor(&cols) >= threshold {
            acc += prob;
        }
    });
    acc
}

/// `P(all d indices distinct)` over all ordered tuples drawn from `p`.
pub fn tuple_distinct_probability(p: &[f64], d: usize) -> f64 {
    let m = p.len();
    let mut acc = 0.0;
    let mut idx = vec![0usize; d];
    'outer: loop {
        let mut seen = vec![false; m];
        if idx.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
            acc += idx.iter().map(|&i| p[i]).product::<f64>();
        }
        let mut k = d;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                break 'outer;
            }
        }
    }
    acc
}

/// Cauchy-Binet: `sum_S prod_{i in S} c_i det(S)^2`, which is `det(sum c u u^T)`.
pub fn cauchy_binet_sum(system: &WeightedVectorSystem) -> f64 {
    let d = system.dim();
    let m = system.len();
    let mut acc = 0.0;
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let cols: Vec<&[f64]> = subset.iter().map(|&i| system.vector(i)).collect();
        let w: f64 = subset.iter().map(|&i| system.weights()[i]).product();
        acc += w * det2_cofactor(&cols);
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return acc;
            }
            i -= 1;
            if subset[i] < m - d + i {
                break;
            }
        }
        subset[i] += 1;
        for j in (i + 1)..d {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Maximum `det^2` over all ordered tuples.
pub fn tuple_max_det2(system: &WeightedVectorSystem) -> f64 {
    let mut best: f64 = 0.0;
    for_each_tuple(system, |idx, _| {
        let cols: Vec<&[f64]> = idx.iter().map(|&i| system.vector(i)).collect();
        best = best.max(det2_cofactor(&cols));
    });
    best
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `d!/d^d` by direct arithmetic.
pub fn dr_bound_direct(d: usize) -> f64 {
    factorial(d) / (d as f64).powi(d as i32)
}

/// Rotates a planar system by `angle`.
pub fn rotate_planar(system: &WeightedVectorSystem, angle: f64) -> Vec<Vec<f64>> {
    let (c, s) = (angle.cos(), angle.sin());
    system
        .vectors()
        .iter()
        .map(|u| vec![c * u[0] - s * u[1], s * u[0] + c * u[1]])
        .collect()
}

/// Two rotated copies of the planar simplex with halved weights: a centered
/// decomposition with six vectors.
pub fn doubled_planar_simplex(angle: f64) -> WeightedVectorSystem {
    let base = simplex(2).unwrap();
    let mut vectors = base.vectors().to_vec();
    vectors.extend(rotate_planar(&base, angle));
    let weights = vec![1.0 / 3.0; 6];
    WeightedVectorSystem::new(2, vectors, weights).unwrap()
}

/// Union of the simplex and its negative in any dimension, weights halved:
/// centered, `2(d+1)` vectors.
pub fn doubled_simplex(d: usize) -> WeightedVectorSystem {
    let base = simplex(d).unwrap();
    let mut vectors = base.vectors().to_vec();
    vectors.extend(
        base.vectors()
            .iter()
            .map(|u| u.iter().map(|x| -x).collect::<Vec<_>>()),
    );
    let c = 0.5 * d as f64 / (d + 1) as f64;
    WeightedVectorSystem::new(d, vectors, vec![c; 2 * (d + 1)]).unwrap()
}

/// Simplex plus a rotated copy in the first two coordinates, weights halved.
/// Centered with `2(d+1)` vectors in general position.
pub fn doubled_rotated_simplex(d: usize, angle: f64) -> WeightedVectorSystem {
    let base = simplex(d).unwrap();
    let (c, s) = (angle.cos(), angle.sin());
    let mut vectors = base.vectors().to_vec();
    for u in base.vectors() {
        let mut v = u.clone();
        if d >= 2 {
            v[0] = c * u[0] - s * u[1];
            v[1] = s * u[0] + c * u[1];
        } else {
            v[0] = -u[0];
        }
        vectors.push(v);
    }
    let w = 0.5 * d as f64 / (d + 1) as f64;
    WeightedVectorSystem::new(d, vectors, vec![w; 2 * (d + 1)]).unwrap()
}

/// Isotropic systems small enough for every enumeration oracle (d <= 4, m <= max_m).
pub fn enumerable_zoo(max_m: usize) -> Vec<(String, WeightedVectorSystem)> {
    let mut zoo = Vec::new();
    for d in 1..=4 {
        let s = simplex(d).unwrap();
        if s.len() <= max_m {
            zoo.push((format!("simplex d={d}"), s));
        }
        let c = cross(d).unwrap();
        if c.len() <= max_m {
            zoo.push((format!("cross d={d}"), c));
        }
        for m in d..=max_m {
            for seed in 0..3u64 {
                let s = random_frame(d, m, 1000 * d as u64 + 10 * m as u64 + seed).unwrap();
                zoo.push((format!("random-frame d={d} m={m} seed={seed}"), s));
            }
        }
    }
    zoo.push(("doubled planar simplex".into(), doubled_planar_simplex(0.3)));
    zoo.push(("doubled simplex d=3".into(), doubled_simplex(3)));
    zoo
}

/// D-optimal design by Titterington's multiplicative update `q_i <- q_i g_i / d`,
/// returning `ln det` of the unit-level shape `(d X)^{-1}`.
pub fn multiplicative_mvee_log_det(points: &[Vec<f64>], iterations: usize) -> f64 {
    let d = points[0].len();
    let n = points.len();
    let mut q = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut x = Matrix::zeros(d, d);
        for (p, &w) in points.iter().zip(&q) {
            x.add_outer(w, p);
        }
        let inv = gauss_jordan_inverse(&x);
        let mut worst: f64 = 0.0;
        for (p, w) in points.iter().zip(q.iter_mut()) {
            let g = inv.quadratic_form(p);
            worst = worst.max(g);
            *w *= g / d as f64;
        }
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|w| *w /= total);
        if worst <= d as f64 * (1.0 + 1e-10) {
            break;
        }
    }
    let mut x = Matrix::zeros(d, d);
    for (p, &w) in points.iter().zip(&q) {
        x.add_outer(w * d as f64, p);
    }
    let mut buf = x.as_slice().to_vec();
    -lu_det_in_place(&mut buf, d).ln()
}

fn gauss_jordan_inverse(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        for k in 0..n {
            let t = a[(col, k)];
            a[(col, k)] = a[(piv, k)];
            a[(piv, k)] = t;
            let t = inv[(col, k)];
            inv[(col, k)] = inv[(piv, k)];
            inv[(piv, k)] = t;
        }
        let p = a[(col, col)];
        for k in 0..n {
            a[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[(i, col)];
                for k in 0..n {
                    a[(i, k)] -= f * a[(col, k)];
                    inv[(i, k)] -= f * inv[(col, k)];
                }
            }
        }
    }
    inv
}

/// Seeded Gaussian point cloud.
pub fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_like::normal_stream;
    normal_stream(seed, n * d)
        .chunks(d)
        .map(|c| c.to_vec())
        .collect()
}

/// A tiny self-contained normal generator so the test clouds do not depend
/// on the library's own stream machinery.
mod rand_like {
    pub fn normal_stream(seed: u64, count: usize) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
        let mut next = move || {
            // splitmix64
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u1 = ((next() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            let u2 = ((next() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            out.push(r * t.cos());
            if out.len() < count {
                out.push(r * t.sin());
            }
        }
        out
    }
}

/// Rotates every vector in the `(a, b)` coordinate plane.
pub fn rotate_in_plane(vectors: &[Vec<f64>], a: usize, b: usize, angle: f64) -> Vec<Vec<f64>> {
    let (c, s) = (angle.cos(), angle.sin());
    vectors
        .iter()
        .map(|u| {
            let mut v = u.clone();
            v[a] = c * u[a] - s * u[b];
            v[b] = s * u[a] + c * u[b];
            v
        })
        .collect()
}

/// `copies` rotated simplices averaged together: centered, `copies (d+1)` vectors.
pub fn rotated_simplex_copies(d: usize, copies: usize) -> WeightedVectorSystem {
    assert!(d >= 2);
    let base = simplex(d).unwrap();
    let mut vectors = Vec::new();
    let mut current = base.vectors().to_vec();
    for k in 0..copies {
        vectors.extend(current.iter().cloned());
        let a = k % d;
        current = rotate_in_plane(&current, a, (a + 1) % d, 0.37 * k as f64 + 0.21);
    }
    let w = d as f64 / ((d + 1) * copies) as f64;
    WeightedVectorSystem::new(d, vectors, vec![w; copies * (d + 1)]).unwrap()
}
