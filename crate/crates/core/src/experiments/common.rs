use rustc_hash::FxHashSet;

use super::config::ExperimentConfig;
use super::csv_io::Table;
use super::report::ExperimentReport;
use crate::env::{AlphaParams, DirichletEnvironment, ExponentSet};
use crate::error::{Error, Result};
use crate::rng;
use crate::traps::TrapIndex;
use crate::walk::{walk_replica, ReplicaConfig, ReplicaWalk, Trajectory};

/// Report plus CSV tables of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// `(file stem, table)` pairs.
    pub tables: Vec<(String, Table)>,
}

impl ExperimentOutput {
    pub fn new(report: ExperimentReport) -> Self {
        Self { report, tables: Vec::new() }
    }
}

/// Environment seed of replica `i`.
pub fn env_seed(cfg: &ExperimentConfig, i: usize) -> u64 {
    rng::derive(cfg.seed, &[rng::tag::ENVIRONMENT, i as u64])
}

pub fn env_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.replicas).map(|i| env_seed(cfg, i)).collect()
}

/// Walk seed paired with an environment seed, as used by `run_replicas`.
pub fn walk_seed(env_seed: u64) -> u64 {
    rng::derive(env_seed, &[rng::tag::WALK])
}

pub fn replica_env(alpha: &AlphaParams, env_seed: u64) -> DirichletEnvironment {
    DirichletEnvironment::new(alpha.clone(), env_seed)
}

/// Full-horizon walk of one replica (no early stop).
pub fn full_walk(env: &DirichletEnvironment, env_seed: u64, horizon: u64) -> Result<ReplicaWalk> {
    walk_replica(env, walk_seed(env_seed), &ReplicaConfig::new(horizon as usize, usize::MAX / 4))
}

pub fn visited_traps(env: &DirichletEnvironment, traj: &Trajectory) -> Result<TrapIndex> {
    let sites: FxHashSet<_> = traj.positions().collect();
    let mut sites: Vec<_> = sites.into_iter().collect();
    sites.sort();
    TrapIndex::scan(env, sites)
}

/// Renewal-based experiments need directional transience along `+e_1`.
pub fn require_e1_transience(e: &ExponentSet, experiment: &str) -> Result<()> {
    if !e.has_drift() {
        return Err(Error::Refused(format!(
            "{experiment}: the weights have zero drift, so the walk has no renewal structure; \
             choose weights with α_j ≠ α_(j+d) for some j"
        )));
    }
    if e.drift[0] <= 0.0 {
        return Err(Error::Refused(format!(
            "{experiment}: the drift has no positive e_1 component; set relabel = true to move it onto +e_1"
        )));
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).unzip();
    if lx.len() < 2 {
        return f64::NAN;
    }
    crate::stats::least_squares(&lx, &ly).slope
}

/// Number of adjacent pairs that move against a decreasing trend.
pub fn increases(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}
