//! Weighted arithmetic/geometric means and the comparison of AM-GM gaps
//! across different weight sequences.
//!
//! The crate is organised in five layers:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`inequality`] | weighted means, the AM-GM gap, two-sided gap comparison, equality sets, ratio bounds |
//! | [`jensen`] | the same two-sided comparison for Jensen gaps of a convex function |
//! | [`holder`] | refined Young and Hölder envelopes over finite discrete measures |
//! | [`sampling`] | seeded exponential / ℓ1-sphere samplers, the GM/AM ratio, cross-polytope constants |
//! | [`experiment`] | concentration experiments around `e^{-γ}` and the randomized inequality suite |
//!
//! Every public operation is a pure function of its inputs.
//!
//! ```
//! use amgm_core::{WeightVector, DataVector, gap_comparison};
//!
//! let alpha = WeightVector::new(vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
//! let beta = WeightVector::uniform(3).unwrap();
//! let x = DataVector::new(vec![1.0, 4.0, 9.0]).unwrap();
//! let cmp = gap_comparison(&alpha, &beta, &x).unwrap();
//! assert!(cmp.lower <= cmp.gap_alpha && cmp.gap_alpha <= cmp.upper);
//! ```

pub mod error;
pub mod experiment;
pub mod holder;
pub mod inequality;
pub mod jensen;
pub mod sampling;
mod suite;
mod sum;

pub use error::{Error, Result};
pub use experiment::{
    inequality_suite, ratio_concentration_experiment, run_experiment, weighted_gap_experiment,
    weighted_ratio_experiment, CheckSummary, ExperimentConfig, ExperimentKind, ExperimentResult,
    SuiteOptions, SuiteReport, WeightScheme,
};
pub use holder::{
    angular_distance, holder_multi, holder_refinement, young_refinement, ConjugatePair,
    DiscreteMeasure, HolderEnvelope, YoungEnvelope,
};
pub use inequality::{
    amgm_gap, equal_weight_bounds, equality_diagnosis, gap_comparison, quotient_profile,
    ratio_bounds, variance_lower_bound, weighted_arithmetic_mean, weighted_geometric_mean,
    weighted_ratio, DataVector, EqualityDiagnosis, GapComparison, QuotientProfile, WeightVector,
};
pub use jensen::{
    jensen_equality_diagnosis, jensen_gap, jensen_gap_comparison, ConvexFunction,
    JensenGapComparison, NamedConvex,
};
pub use sampling::{
    ball_volume_mc_check, gm_am_ratio, sample_exponential, sample_l1_sphere_positive,
    sampler_equivalence_check, GeometryConstants, SeededStream,
};

/// `e^{-γ}`, γ the Euler–Mascheroni constant. Almost-sure limit of the
/// equal-weights GM/AM ratio of iid exponential samples.
pub const EXP_NEG_EULER_GAMMA: f64 = 0.561_459_483_566_885_2;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
