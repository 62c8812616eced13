//! Dirichlet parameterization, derived exponents and the lazily sampled environment.

mod alpha;
mod dirichlet;
mod environment;

pub use alpha::{compute_exponents, AlphaParams, DirectionPermutation, ExponentSet};
pub use dirichlet::{log_gamma_variate, sample_dirichlet};
pub use environment::{
    DirichletEnvironment, Environment, FixedEnvironment, SiteDistribution, NORMALIZATION_TOL,
    STEP_NORMALIZATION_TOL,
};
