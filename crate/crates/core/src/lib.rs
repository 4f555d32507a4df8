//! Differentially private link recommendation on social graphs.
//!
//! The crate covers the full pipeline: loading an undirected graph, scoring candidate
//! recommendations with a graph utility, turning scores into private recommendation
//! distributions, bounding the accuracy any private recommender can reach, and
//! running whole-graph accuracy experiments.

pub mod audit;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod mechanisms;
pub mod quadrature;
pub mod rng;
pub mod utility;

pub use error::{Error, Result};
pub use graph::{EdgeFlip, FlipDirection, Graph, GraphStats, NodeId};
pub use mechanisms::{Mechanism, MechanismParams, RecommendationDistribution};
pub use utility::{UtilityFunctionSpec, UtilityVector};
