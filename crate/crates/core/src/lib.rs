//! Random intersection graphs with random set sizes: sampling, component
//! statistics, the branching-process prediction of the giant component,
//! the hypergeometric intersection estimates and the exploration
//! procedures behind them.

pub mod branching;
pub mod dist;
pub mod error;
pub mod explore;
pub mod graph;
pub mod harness;
pub mod hypergeom;
pub mod seed;

pub use branching::{predict_giant_fraction, GiantPrediction, OffspringKernel, SurvivalSolution};
pub use dist::{make_distribution, parse_pmf, Family, SizeDistribution};
pub use error::{Error, Result};
pub use explore::{
    big_vertex_census, explore_component, ExplorationConfig, ExplorationRecord, Mode, OmegaRule,
};
pub use graph::{sample_graph, GraphParams, GraphSample};
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
