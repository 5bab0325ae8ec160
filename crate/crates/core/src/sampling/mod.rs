//! Importance sampling engines.

pub mod estimate;
pub mod importance;
pub mod learn;
pub mod runner;

pub use estimate::{estimate, PosteriorAccumulator, PosteriorEstimate};
pub use importance::{draw_sample, Factor, ImportanceFunction, WeightedSample};
pub use learn::WeightedCounts;
pub use runner::{
    check_support, geometric_schedule, run, run_ais, run_lw, run_ris, run_sis, stream_rng,
    SamplerConfig, SamplingRun, SupportMode, Variant,
};
