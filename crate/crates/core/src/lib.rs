//! Discrete isotropic vector systems.
//!
//! A weighted system of unit vectors `u_i` with weights `c_i > 0` is a
//! decomposition of the identity when `sum c_i u_i u_i^T = Id`. This crate
//! builds such systems ([`systems`], [`mvee`]), shrinks them ([`reduction`]),
//! picks large-volume subsets from them ([`selection`]), evaluates the
//! closed-form volume bounds ([`bounds`]), and checks the expected squared
//! volume of random parallelotopes ([`montecarlo`]).

pub mod bounds;
pub mod combinatorics;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod mvee;
pub mod reduction;
pub mod selection;
pub mod streams;
pub mod systems;

pub use bounds::{dr_volume_bound, gamma, gamma_asymptotic, p1_exact, LogValue, Regime};
pub use error::{Error, Result};
pub use linalg::{det, psd_sqrt, sym_outer, Matrix, Projector};
pub use montecarlo::{
    estimate_expected_det2, exact_expected_det2, tail_exact, tail_probability, ExperimentRecord,
    Sampler,
};
pub use mvee::{john_from_points, solve_central_mvee, MveeResult};
pub use reduction::{affine_dependence, reduce_centered, reduce_isotropic, AffineDependence};
pub use selection::{best_subset, dr_select, BestSubset, SelectionCertificate};
pub use systems::{
    check, generate, DiscreteMeasure, GeneratorKind, IsotropyReport, WeightedVectorSystem,
};
