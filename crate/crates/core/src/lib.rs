//! Generalized sumsets `A_{s,d} = A + ... + A - ... - A` of random subsets of
//! `{0, ..., N}`.
//!
//! The crate has three layers:
//!
//! * exact counting ([`combinat`]): the representation function `R(n, s, d)`
//!   and brute-force oracles for it;
//! * limit theory ([`density`]): the limit density of `R`, the phase constants
//!   `b_{h,k}`, the critical-decay series `g(c; s, d)` and the predicted
//!   cardinalities in the fast, critical and slow (`h = 2`) regimes;
//! * Monte Carlo ([`sampling`], [`sumset`], [`experiments`]): reproducible
//!   binomial subsets, word-parallel sumset kernels, and experiment runners that
//!   compare measured statistics with the predictions.
//!
//! The real-valued math is generic over [`Scalar`]; [`Real`] is the
//! precision used by the experiment layer.

pub mod budget;
pub mod combinat;
pub mod density;
pub mod error;
pub mod experiments;
pub mod quadrature;
pub mod rational_serde;
pub mod sampling;
pub mod scalar;
pub mod sumset;

pub use budget::Budgets;
pub use combinat::{RepresentationCounts, SignedCombination};
pub use density::{PhaseConstants, Prediction, Regime};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, ExperimentReport};
pub use sampling::{ProbabilitySpec, SampleParameters, SampledSet};
pub use scalar::Scalar;
pub use sumset::{BitSet, GenSumsetResult, TupleStatistics};

/// Floating point type used by the experiment layer and the CLI.
pub type Real = f64;

/// Exact rational used for the decay exponent `delta`.
pub type Rational = num_rational::Ratio<i64>;

/// Exact non-negative count (representation counts, binomials, `X_k`).
pub type Count = num_bigint::BigUint;

/// Phase constants at the experiment precision.
pub type PhaseConstantsF64 = PhaseConstants<f64>;

/// Phase constants at single precision.
pub type PhaseConstantsF32 = PhaseConstants<f32>;

/// Crate version, embedded in every provenance header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
