use rand::distr::OpenClosed01;
use rand::Rng;
use rustc_hash::FxHashMap;

use super::graph::PathSum;
use super::lattice_sum::{path_sum_lattice, RegionShape, DEFAULT_M_MAX};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rng;
use crate::walk::{Trajectory, Walker};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccelConfig {
    pub m: usize,
    pub m_max: usize,
    pub shape: RegionShape,
    /// Cap on the total number of path-search expansions.
    pub budget: u64,
}

impl AccelConfig {
    pub fn new(m: usize) -> Self {
        Self { m, m_max: DEFAULT_M_MAX, shape: RegionShape::SupBox, budget: 2_000_000_000 }
    }
}

/// Jump chain with holding times of the accelerated walk.
#[derive(Clone, Debug)]
pub struct AcceleratedTrajectory {
    pub trajectory: Trajectory,
    /// `jump_times[k]` is the time of the k-th jump, starting at 0.
    pub jump_times: Vec<f64>,
    /// `γ^m` at each position the chain leaves.
    pub rates: Vec<f64>,
    pub distinct_sites: usize,
    pub expansions: u64,
}

impl AcceleratedTrajectory {
    pub fn holding_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jump_times.windows(2).map(|w| w[1] - w[0])
    }
}

/// Simulates `horizon` jumps; the jump chain uses the same stream as the
/// discrete walk with seed `seed`, holding times use a separate stream.
pub fn simulate_accelerated<E: Environment + ?Sized>(
    env: &E,
    cfg: &AccelConfig,
    horizon: usize,
    seed: u64,
) -> Result<AcceleratedTrajectory> {
    if cfg.m == 0 || cfg.m > cfg.m_max {
        return Err(Error::Capability(format!("m = {} outside 1..={}", cfg.m, cfg.m_max)));
    }
    let mut walker = Walker::new(env, rng::stream(seed, rng::tag::WALK));
    let mut clock = rng::stream(seed, rng::tag::HOLDING);
    let mut memo: FxHashMap<Site, f64> = FxHashMap::default();
    let mut traj = Trajectory::with_capacity(env.dim(), horizon);
    let mut jump_times = Vec::with_capacity(horizon + 1);
    let mut rates = Vec::with_capacity(horizon);
    let mut expansions = 0u64;
    let mut t = 0.0;
    jump_times.push(t);
    for _ in 0..horizon {
        let x = walker.position();
        let gamma = match memo.get(&x) {
            Some(&g) => g,
            None => {
                let s: PathSum = path_sum_lattice(env, &x, cfg.m, cfg.shape)?;
                expansions += s.expansions;
                if expansions > cfg.budget {
                    return Err(Error::Capability(format!(
                        "path enumeration over {} sites exceeded the budget of {} expansions",
                        memo.len() + 1,
                        cfg.budget
                    )));
                }
                if s.weight <= 0.0 {
                    return Err(Error::Divergence(format!("no path from {x:?} reaches the border")));
                }
                let g = 1.0 / s.weight;
                memo.insert(x, g);
                g
            }
        };
        let e: f64 = -clock.sample::<f64, _>(OpenClosed01).ln();
        t += e / gamma;
        rates.push(gamma);
        jump_times.push(t);
        traj.push(walker.advance()?);
    }
    Ok(AcceleratedTrajectory { trajectory: traj, jump_times, rates, distinct_sites: memo.len(), expansions })
}
