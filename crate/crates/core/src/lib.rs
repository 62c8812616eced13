//! Random walks in i.i.d. Dirichlet environments on Z^d.
//!
//! The crate is split along the simulation pipeline:
//!
//! * [`env`] samples the environment lazily and computes the Dirichlet exponents;
//! * [`walk`] runs the discrete walk and extracts renewal slabs;
//! * [`traps`] detects traps, erases in-trap oscillations and tests strength tails;
//! * [`accel`] computes acceleration functions and simulates the accelerated walk;
//! * [`stable`] samples stable subordinators and runs the auxiliary inequality suites;
//! * [`experiments`] wires everything into configuration-driven reports.

pub mod accel;
pub mod env;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod rng;
pub mod stable;
pub mod stats;
pub mod traps;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{Site, MAX_DIM};
