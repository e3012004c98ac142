//! Generalized Riesz products, integer-sequence families and circle-subgroup
//! diagnostics, computed with exact rationals and rigorous ball arithmetic.

pub mod error;
pub mod experiments;
pub mod groups;
pub mod ipcheck;
pub mod kernels;
pub mod numeric;
pub mod oracle;
pub mod riesz;
pub mod sequences;

pub use error::{Error, Result};
pub use experiments::{run_experiment, Experiment, ExperimentConfig, ExperimentOutput};
pub use numeric::{
    circle_dist, frac_dist, frac_dist_ball, nearest_int, signed_frac, BigInt, Dyadic, Rational,
    RealBall, UnimodularPoint, DEFAULT_PRECISION,
};
pub use riesz::RieszSpec;
pub use sequences::IndexedSequence;
