//! Online facility assignment.
//!
//! Facilities with fixed capacities sit in a metric space (line, grid,
//! unweighted graph or plane); customers arrive one at a time and must be
//! assigned before the next one shows up. This crate provides the online
//! algorithms (Greedy, Optimal-Fill, capacity-sensitive Voronoi), the offline
//! optimum they are measured against, generators for adversarial input
//! families, a cow-path simulator with its reduction to line instances, and an
//! experiment harness producing competitive-ratio reports.

pub mod adversary;
pub mod cowpath;
pub mod error;
pub mod harness;
pub mod metric;
pub mod model;
pub mod online;
pub mod opt;
pub mod sample;

pub use error::{Error, Result};
pub use metric::{Graph, GraphMetrics, Location, MetricSpace};
pub use model::{AssignmentRecord, AssignmentTrace, Facility, Instance, RatioReport};
pub use online::{run, Algorithm, VoronoiWeight};
pub use opt::{brute_force_optimal, solve_optimal, OptimalSolution};
