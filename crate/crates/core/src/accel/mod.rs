//! Acceleration functions and the continuous-time accelerated walk.

mod ctmc;
mod graph;
mod kernel;
mod lattice_sum;

pub use ctmc::{simulate_accelerated, AccelConfig, AcceleratedTrajectory};
pub use graph::{contract_region, contract_to_finite, gamma_finite, path_sum_finite, FiniteGraph, PathSum};
pub use lattice_sum::{gamma_lattice, gamma_lattice_in, gamma_partial, path_sum_lattice, RegionShape, DEFAULT_M_MAX};

/// Running products below this are dropped from path sums.
pub const UNDERFLOW_CUTOFF: f64 = 1e-280;
