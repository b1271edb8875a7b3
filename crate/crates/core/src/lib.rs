//! Bounded-confidence opinion dynamics among Bayesian binary detectors.
//!
//! Agents hold decision weights (believed priors on h0) for a shared Gaussian
//! detection task. They repeatedly average with the agents whose weights are
//! close, where closeness is measured either by absolute difference or by the
//! Bayes risk error divergence. Once the weights settle into clusters, the
//! agents' local decisions are fused by majority vote and compared with
//! centralized and decentralized optimal baselines.

pub mod detection;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod fusion;
pub mod io;
pub mod normal;
pub mod plan;

pub use detection::{CostPair, DetectionProblem, ErrorPair, GaussianModel};
pub use dynamics::{ClusterSummary, DynamicsConfig, Population, ProximityMeasure, Trajectory};
pub use error::{Error, Result};
pub use experiments::{ExperimentPlan, InitialDistribution, SweepRecord, SweepResult};
pub use fusion::{BaselineRisks, RiskReport};
