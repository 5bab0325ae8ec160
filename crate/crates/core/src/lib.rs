//! Discrete Bayesian networks and refractor importance sampling.
//!
//! The crate covers network representation ([`network`], [`graph`]),
//! d-separation ([`dsep`]), brute-force exact inference ([`exact`]), evidence
//! shields and the refractor rewrite ([`shield`], [`refractor`]), likelihood
//! weighting, SIS and AIS-BN samplers with their refractored forms
//! ([`sampling`]), error and divergence measures ([`metrics`]) and random
//! network generation ([`netgen`]).

pub mod config;
pub mod dsep;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod graph;
pub mod metrics;
pub mod netgen;
pub mod network;
pub mod refractor;
pub mod sampling;
pub mod shield;

pub use config::{Configuration, Table, DEFAULT_ENUM_CAP};
pub use error::{Error, Result};
pub use exact::{ExactInference, PosteriorJoint};
pub use graph::{Dag, VertexId};
pub use network::{BayesianNetwork, Cpt, Evidence, NetworkBuilder, Variable};
pub use refractor::{refractor, RefractorScope, RefractoredNetwork};
pub use shield::{compute_shield, verify_shield, Shield};
