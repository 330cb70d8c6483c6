//! Random parallelotopes: exact expectations by enumeration and seeded
//! Monte Carlo estimates.
//!
//! Every trial draws from its own counter-based stream keyed by
//! `(seed, trial index)`, and trials are accumulated in fixed-size chunks that
//! are merged in index order, so estimates are bit-identical for any thread
//! count.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{dr_volume_bound, gamma};
use crate::combinatorics::{binomial, factorial, for_each_subset};
use crate::error::{Error, Result};
use crate::linalg::lu_det_in_place;
use crate::streams::StreamFactory;
use crate::systems::WeightedVectorSystem;

pub const MIN_EXPECTATION_TRIALS: usize = 100;
pub const MIN_TAIL_TRIALS: usize = 1000;
pub const SUBSET_LIMIT: f64 = 1e6;
pub const TUPLE_LIMIT: f64 = 1e7;
const CHUNK: usize = 4096;

/// A probability measure on `R^d` with second moment `Id`.
#[derive(Clone, Debug)]
pub enum Sampler {
    /// Standard Gaussian vector.
    Gaussian(usize),
    /// Uniform on the sphere of radius `sqrt(d)`.
    Sphere(usize),
    /// Atom `sqrt(d) u_i` with probability `c_i / d`.
    Discrete(DiscreteSampler),
    /// Unit atom `u_i` with probability `c_i / d`; second moment `Id/d`.
    UnitDiscrete(DiscreteSampler),
}

#[derive(Clone, Debug)]
pub struct DiscreteSampler {
    system: WeightedVectorSystem,
    index: WeightedIndex<f64>,
}

impl DiscreteSampler {
    pub fn new(system: WeightedVectorSystem) -> Self {
        let index = WeightedIndex::new(system.weights().iter().copied())
            .expect("system weights are positive and finite");
        Self { system, index }
    }

    pub fn system(&self) -> &WeightedVectorSystem {
        &self.system
    }

    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

impl Sampler {
    pub fn discrete(system: WeightedVectorSystem) -> Self {
        Sampler::Discrete(DiscreteSampler::new(system))
    }

    pub fn unit_discrete(system: WeightedVectorSystem) -> Self {
        Sampler::UnitDiscrete(DiscreteSampler::new(system))
    }

    pub fn dim(&self) -> usize {
        match self {
            Sampler::Gaussian(d) | Sampler::Sphere(d) => *d,
            Sampler::Discrete(s) | Sampler::UnitDiscrete(s) => s.system.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Sampler::Gaussian(_) => "gaussian",
            Sampler::Sphere(_) => "sphere",
            Sampler::Discrete(_) => "discrete",
            Sampler::UnitDiscrete(_) => "unit-discrete",
        }
    }

    fn support_size(&self) -> Option<usize> {
        match self {
            Sampler::Discrete(s) | Sampler::UnitDiscrete(s) => Some(s.system.len()),
            _ => None,
        }
    }

    /// Writes one draw into `out` (length `dim`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Sampler::Gaussian(_) => {
                for x in out.iter_mut() {
                    *x = StandardNormal.sample(rng);
                }
            }
            Sampler::Sphere(d) => loop {
                for x in out.iter_mut() {
                    *x = StandardNormal.sample(rng);
                }
                let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    let s = (*d as f64).sqrt() / n;
                    out.iter_mut().for_each(|x| *x *= s);
                    break;
                }
            },
            Sampler::Discrete(s) => {
                let i = s.draw_index(rng);
                let scale = (s.system.dim() as f64).sqrt();
                for (o, u) in out.iter_mut().zip(s.system.vector(i)) {
                    *o = scale * u;
                }
            }
            Sampler::UnitDiscrete(s) => {
                let i = s.draw_index(rng);
                out.copy_from_slice(s.system.vector(i));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub kind: String,
    pub dim: usize,
    pub m: Option<usize>,
    pub trials: usize,
    pub estimate: f64,
    pub standard_error: f64,
    pub exact_reference: Option<f64>,
    pub threshold: Option<f64>,
}

pub const CSV_HEADER: &str = "seed,kind,d,m,trials,estimate,stderr,exact_reference,threshold";

impl ExperimentRecord {
    /// One CSV row in [`CSV_HEADER`] order; absent values are empty fields.
    pub fn to_csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.kind,
            self.dim,
            opt(&self.m),
            self.trials,
            self.estimate,
            self.standard_error,
            opt(&self.exact_reference),
            opt(&self.threshold)
        )
        .expect("writing to a String cannot fail");
        row
    }

    /// True when `|estimate - exact_reference| <= k * standard_error`.
    pub fn agrees_within(&self, k: f64) -> Option<bool> {
        self.exact_reference
            .map(|e| (self.estimate - e).abs() <= k * self.standard_error)
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn standard_error(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Runs `trials` independent evaluations of `f`, each with its own stream,
/// and returns `(mean, standard error)`.
fn run_trials<F>(trials: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let streams = StreamFactory::new(seed);
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::default();
            let end = ((c + 1) * CHUNK).min(trials);
            for t in c * CHUNK..end {
                let mut rng = streams.stream(t as u64);
                acc.push(f(&mut rng));
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(Moments::default(), Moments::merge);
    (total.mean, total.standard_error())
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Estimates `E[det(x_1, ..., x_d)^2]` with each `x_i` drawn from the same sampler.
pub fn estimate_expected_det2(
    sampler: &Sampler,
    trials: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    let samplers = vec![sampler.clone(); sampler.dim()];
    estimate_expected_det2_mixed(&samplers, trials, seed)
}

/// Estimates `E[det(x_1, ..., x_d)^2]` with `x_i` drawn from `samplers[i]`.
pub fn estimate_expected_det2_mixed(
    samplers: &[Sampler],
    trials: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    let d = samplers.len();
    if d == 0 {
        return Err(Error::InvalidArgument("need at least one sampler".into()));
    }
    if let Some(s) = samplers.iter().find(|s| s.dim() != d) {
        return Err(Error::Dimension(format!(
            "{d} samplers but one lives in dimension {}",
            s.dim()
        )));
    }
    if trials < MIN_EXPECTATION_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_EXPECTATION_TRIALS} trials, got {trials}"
        )));
    }
    let (estimate, standard_error) = run_trials(trials, seed, |rng| {
        let mut buf = vec![0.0; d * d];
        for (j, s) in samplers.iter().enumerate() {
            s.sample_into(rng, &mut buf[j * d..(j + 1) * d]);
        }
        let det = lu_det_in_place(&mut buf, d);
        det * det
    });
    let first = &samplers[0];
    let homogeneous = samplers.iter().all(|s| s.kind() == first.kind());
    let exact_reference = if !homogeneous {
        Some(factorial(d))
    } else {
        match first {
            Sampler::UnitDiscrete(s) => exact_expected_det2(&s.system).ok(),
            _ => Some(factorial(d)),
        }
    };
    Ok(ExperimentRecord {
        seed,
        kind: if homogeneous {
            first.kind().to_string()
        } else {
            "mixed".into()
        },
        dim: d,
        m: if homogeneous {
            first.support_size()
        } else {
            None
        },
        trials,
        estimate,
        standard_error,
        exact_reference,
        threshold: None,
    })
}

fn check_enumerable(system: &WeightedVectorSystem, allow_tuples: bool) -> Result<()> {
    let (m, d) = (system.len(), system.dim());
    let subsets = binomial(m, d);
    let tuples = (m as f64).powi(d as i32);
    if subsets <= SUBSET_LIMIT || (allow_tuples && tuples <= TUPLE_LIMIT) {
        Ok(())
    } else {
        Err(Error::TooLarge {
            count: subsets,
            limit: SUBSET_LIMIT,
        })
    }
}

/// `E[det(u_{i_1}, ..., u_{i_d})^2]` for independent indices with
/// `P(i) = c_i / d`, summed over `d`-subsets since repeated indices give
/// determinant zero.
pub fn exact_expected_det2(system: &WeightedVectorSystem) -> Result<f64> {
    check_enumerable(system, false)?;
    let d = system.dim();
    let p: Vec<f64> = system.weights().iter().map(|c| c / d as f64).collect();
    let mut sum = 0.0;
    for_each_subset(system.len(), d, |s| {
        let mass: f64 = s.iter().map(|&i| p[i]).product();
        sum += mass * system.det_squared(s);
        true
    });
    Ok(factorial(d) * sum)
}

/// `lambda * gamma(d, m) * d!/d^d`
pub fn tail_threshold(system: &WeightedVectorSystem, lambda: f64) -> Result<f64> {
    let d = system.dim();
    let g = gamma(d, system.len())?;
    Ok(lambda * (g * dr_volume_bound(d)?).value())
}

/// `P(det(u_{i_1}, ..., u_{i_d})^2 >= threshold)` for independent indices
/// drawn with probability proportional to `c_i`.
pub fn tail_exact(system: &WeightedVectorSystem, threshold: f64) -> Result<f64> {
    if threshold <= 0.0 {
        return Ok(1.0);
    }
    check_enumerable(system, true)?;
    let d = system.dim();
    let p = system.probabilities();
    let mut sum = 0.0;
    for_each_subset(system.len(), d, |s| {
        if system.det_squared(s) >= threshold {
            sum += s.iter().map(|&i| p[i]).product::<f64>();
        }
        true
    });
    Ok(factorial(d) * sum)
}

pub const TAIL_PRECONDITION_TOL: f64 = 1e-8;

/// Monte Carlo estimate of `P(det^2 >= lambda gamma(d, m) d!/d^d)`.
pub fn tail_probability(
    system: &WeightedVectorSystem,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TAIL_TRIALS} trials, got {trials}"
        )));
    }
    let report = system.check(TAIL_PRECONDITION_TOL);
    if !report.is_isotropic {
        return Err(Error::Precondition(format!(
            "system is not isotropic (tensor residual {:e})",
            report.tensor_residual
        )));
    }
    let threshold = tail_threshold(system, lambda)?;
    let sampler = DiscreteSampler::new(system.clone());
    let d = system.dim();
    let (estimate, standard_error) = run_trials(trials, seed, |rng| {
        let mut idx = vec![0usize; d];
        for i in idx.iter_mut() {
            *i = sampler.draw_index(rng);
        }
        if system.det_squared(&idx) >= threshold {
            1.0
        } else {
            0.0
        }
    });
    Ok(ExperimentRecord {
        seed,
        kind: "tail".into(),
        dim: d,
        m: Some(system.len()),
        trials,
        estimate,
        standard_error,
        exact_reference: tail_exact(system, threshold).ok(),
        threshold: Some(threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{cross, simplex};

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn one_dimensional_gaussian() {
        let r = estimate_expected_det2(&Sampler::Gaussian(1), 20_000, 3).unwrap();
        assert!((r.estimate - 1.0).abs() <= 4.0 * r.standard_error, "{r:?}");
        assert_eq!(r.exact_reference, Some(1.0));
    }

    #[test]
    fn scaled_simplex_atoms() {
        let s = Sampler::discrete(simplex(2).unwrap());
        let r = estimate_expected_det2(&s, 50_000, 9).unwrap();
        assert!((r.estimate - 2.0).abs() <= 4.0 * r.standard_error, "{r:?}");
    }

    #[test]
    fn exact_expectations() {
        assert!((exact_expected_det2(&simplex(2).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_expected_det2(&cross(2).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        let frame = WeightedVectorSystem::new(
            3,
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![1.0; 3],
        )
        .unwrap();
        assert!((exact_expected_det2(&frame).unwrap() - 6.0 / 27.0).abs() < 1e-16);
    }

    #[test]
    fn exact_tails() {
        let s = simplex(2).unwrap();
        assert!((tail_exact(&s, 0.375).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tail_exact(&s, 1.5).unwrap(), 0.0);
        assert_eq!(tail_exact(&s, 0.0).unwrap(), 1.0);
        let c = cross(2).unwrap();
        let thr = tail_threshold(&c, 0.9).unwrap();
        assert!((thr - 0.675).abs() < 1e-14);
        assert!((tail_exact(&c, thr).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simplex_tail_estimate() {
        let s = simplex(2).unwrap();
        let r = tail_probability(&s, 0.5, 20_000, 5).unwrap();
        assert!((r.threshold.unwrap() - 0.375).abs() < 1e-14);
        assert!(
            (r.estimate - 2.0 / 3.0).abs() <= 4.0 * r.standard_error,
            "{r:?}"
        );
        assert!(r.estimate >= 0.5 * (-2f64).exp());
    }

    #[test]
    fn argument_checks() {
        let s = simplex(2).unwrap();
        assert!(tail_probability(&s, 0.0, 5000, 1).is_err());
        assert!(tail_probability(&s, 1.0, 5000, 1).is_err());
        assert!(tail_probability(&s, 0.5, 999, 1).is_err());
        assert!(estimate_expected_det2(&Sampler::Gaussian(2), 99, 1).is_err());
        let mixed = vec![Sampler::Gaussian(2), Sampler::Sphere(3)];
        assert!(estimate_expected_det2_mixed(&mixed, 1000, 1).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let r = ExperimentRecord {
            seed: 42,
            kind: "tail".into(),
            dim: 2,
            m: Some(3),
            trials: 1000,
            estimate: 0.5,
            standard_error: 0.01,
            exact_reference: None,
            threshold: Some(0.375),
        };
        assert_eq!(r.to_csv_row(), "42,tail,2,3,1000,0.5,0.01,,0.375");
        assert_eq!(
            CSV_HEADER.split(',').count(),
            r.to_csv_row().split(',').count()
        );
    }
}
