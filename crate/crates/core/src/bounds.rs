//! Closed-form volume bounds.
//!
//! The improvement factor `gamma(d, m) = m^d / (d! C(m, d))` (with `m` capped
//! at `d(d+1)/2`), the greedy bound `d!/d^d`, the probability that `d`
//! independent draws are pairwise distinct, and the large-`d` asymptotics of
//! `gamma`. Everything that can overflow is carried in log space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonnegative quantity stored through its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_value: f64,
    /// `1` for a positive value, `0` for zero (then `log_value` is `-inf`).
    pub sign: i8,
}

impl LogValue {
    pub fn from_log(log_value: f64) -> Self {
        Self { log_value, sign: 1 }
    }

    pub fn zero() -> Self {
        Self {
            log_value: f64::NEG_INFINITY,
            sign: 0,
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.log_value.exp()
        }
    }
}

impl std::ops::Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> LogValue {
        if self.sign == 0 || other.sign == 0 {
            LogValue::zero()
        } else {
            LogValue::from_log(self.log_value + other.log_value)
        }
    }
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_MIN: f64 = 10.0;

/// Tail of the Stirling series, `ln Gamma(x) - ((x - 1/2) ln x - x + ln(2 pi)/2)`, for `x >= 10`.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    // Bernoulli coefficients B_2k / (2k (2k - 1)).
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let mut acc = 0.0;
    for &c in C.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

/// Shifts `x` up to at least the Stirling range: returns `(y, s)` with
/// `ln Gamma(x) = ln Gamma(y) - s`.
fn shift_up(x: f64) -> (f64, f64) {
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_MIN {
        prod *= y;
        y += 1.0;
    }
    (y, prod.ln())
}

/// Largest integer argument whose factorial is taken by direct product.
const DIRECT_FACTORIAL_MAX: f64 = 30.0;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    if x.fract() == 0.0 && x <= DIRECT_FACTORIAL_MAX {
        let n = x as usize - 1;
        return (1..=n).map(|k| k as f64).product::<f64>().ln();
    }
    let (y, s) = shift_up(x);
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + stirling_tail(y) - s
}

/// `ln Gamma(a) - ln Gamma(b)` without cancelling two huge logs against each other.
pub fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0);
    let (ya, sa) = shift_up(a);
    let (yb, sb) = shift_up(b);
    let diff = ya - yb;
    let main = (ya - 0.5) * (diff / yb).ln_1p() + diff * yb.ln() - diff;
    main + stirling_tail(ya) - stirling_tail(yb) - sa + sb
}

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    ln_gamma_ratio(n as f64 + 1.0, (n - k) as f64 + 1.0) - ln_factorial(k)
}

/// Carathéodory cap `d(d+1)/2` on the number of vectors worth considering.
pub fn isotropic_cap(d: usize) -> usize {
    d * (d + 1) / 2
}

/// `min(m, d(d+1)/2)`
pub fn m_bar(d: usize, m: usize) -> usize {
    m.min(isotropic_cap(d))
}

/// Up to this dimension `gamma` is taken as a direct product of `d` ratios.
const DIRECT_GAMMA_MAX_D: usize = 64;
/// Up to this dimension `ln gamma` is the sum of `-ln(1 - k/m)`, which avoids
/// cancelling `d ln m` against a log-gamma difference of the same size.
const DIRECT_LOG_SUM_MAX_D: usize = 1_000_000;

/// `gamma(d, m_bar) = m_bar^d / (d! C(m_bar, d))` with `m_bar = min(m, d(d+1)/2)`.
pub fn gamma(d: usize, m: usize) -> Result<LogValue> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if m < d {
        return Err(Error::InvalidArgument(format!(
            "need m >= d, got m={m}, d={d}"
        )));
    }
    let mb = m_bar(d, m);
    // d! cancels: gamma = m^d (m-d)! / m! = prod_k m / (m - k)
    if d <= DIRECT_GAMMA_MAX_D {
        let product: f64 = (0..d).map(|k| mb as f64 / (mb - k) as f64).product();
        return Ok(LogValue::from_log(product.ln()));
    }
    let mbf = mb as f64;
    let log = if d <= DIRECT_LOG_SUM_MAX_D {
        (0..d).map(|k| -(-(k as f64) / mbf).ln_1p()).sum()
    } else {
        d as f64 * mbf.ln() - ln_gamma_ratio(mbf + 1.0, mbf - d as f64 + 1.0)
    };
    Ok(LogValue::from_log(log))
}

/// `d!/d^d`, the squared volume guaranteed by greedy selection.
pub fn dr_volume_bound(d: usize) -> Result<LogValue> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    Ok(LogValue::from_log(
        ln_factorial(d) - d as f64 * (d as f64).ln(),
    ))
}

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Probability that `d` independent draws from `probabilities` are pairwise
/// distinct, i.e. `d!` times the elementary symmetric polynomial of degree `d`.
///
/// Runs the coefficient recurrence for `prod (1 + p_i t)` truncated at degree
/// `d`, carrying `k! e_k` so nothing overflows and all terms stay positive.
pub fn p1_exact(probabilities: &[f64], d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if probabilities.is_empty() {
        return Err(Error::InvalidArgument("empty probability vector".into()));
    }
    if let Some(p) = probabilities
        .iter()
        .find(|p| !(p.is_finite() && **p >= 0.0))
    {
        return Err(Error::InvalidArgument(format!("invalid probability {p}")));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    if d > probabilities.len() {
        return Ok(0.0);
    }
    // scaled[k] = k! e_k(p_1, ..., p_i)
    let mut scaled = vec![0.0; d + 1];
    scaled[0] = 1.0;
    for (i, &p) in probabilities.iter().enumerate() {
        for k in (1..=d.min(i + 1)).rev() {
            scaled[k] += k as f64 * p * scaled[k - 1];
        }
    }
    Ok(scaled[d])
}

/// `d! C(m, d) / m^d`, the value of [`p1_exact`] at the uniform distribution on `m` points.
pub fn p1_uniform(m: usize, d: usize) -> f64 {
    if d > m {
        return 0.0;
    }
    let mf = m as f64;
    (0..d).map(|k| (m - k) as f64 / mf).product()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// `m` about `c d` for a fixed `c > 1`.
    Linear(f64),
    /// `m = d + k` for a fixed integer `k >= 1`.
    Additive(u32),
}

/// Leading-order asymptotic expression for `gamma` in the given regime.
///
/// * linear: `sqrt((c-1)/c) ((c-1)/c)^((c-1)d) e^d`
/// * additive: `k! e^k / sqrt(2 pi) * e^d / (d+k)^(k+1/2)`
pub fn gamma_asymptotic(d: usize, regime: Regime) -> Result<LogValue> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let df = d as f64;
    let log = match regime {
        Regime::Linear(c) => {
            if !(c.is_finite() && c > 1.0 && c >= 1.0 + 1.0 / df) {
                return Err(Error::InvalidArgument(format!(
                    "linear regime needs c > 1 and c >= 1 + 1/d, got c={c}, d={d}"
                )));
            }
            let r = ((c - 1.0) / c).ln();
            0.5 * r + (c - 1.0) * df * r + df
        }
        Regime::Additive(k) => {
            if k == 0 {
                return Err(Error::InvalidArgument(
                    "additive regime needs k >= 1".into(),
                ));
            }
            let kf = k as f64;
            ln_factorial(k as usize) + kf - 0.5 * (2.0 * PI).ln() + df - (kf + 0.5) * (df + kf).ln()
        }
    };
    Ok(LogValue::from_log(log))
}
