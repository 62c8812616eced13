use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::renewal::{ConfirmPolicy, RenewalLog, StreamingRenewals};
use super::trajectory::Trajectory;
use super::walker::Walker;
use crate::env::{AlphaParams, DirichletEnvironment, Environment};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rng;

/// Statistics of the slab between two consecutive renewals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlabRecord {
    pub replica: u32,
    /// Index `i` of the renewal `τ_i` opening the slab (1-based).
    pub slab: u32,
    pub tau_start: u64,
    pub tau_gap: u64,
    pub displacement: Site,
    pub distinct_points: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicaConfig {
    pub horizon: usize,
    /// Stop a replica once this many slabs are settled.
    pub slab_budget: usize,
    pub policy: ConfirmPolicy,
}

impl ReplicaConfig {
    pub fn new(horizon: usize, slab_budget: usize) -> Self {
        Self { horizon, slab_budget, policy: ConfirmPolicy::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaDiagnostics {
    pub launched: usize,
    pub kept: usize,
    pub dropped: usize,
    pub dropped_replicas: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct ReplicaBatch {
    /// Slabs `i >= 2`, sorted by (replica, slab).
    pub records: Vec<SlabRecord>,
    /// The `[τ_1, τ_2)` slab of every kept replica.
    pub first_slabs: Vec<SlabRecord>,
    pub diagnostics: ReplicaDiagnostics,
}

impl ReplicaBatch {
    pub fn gaps(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.tau_gap).collect()
    }
}

/// A finished single-replica walk.
pub struct ReplicaWalk {
    pub trajectory: Trajectory,
    pub renewals: RenewalLog,
}

/// Walks up to `cfg.horizon` steps, stopping early once the slab budget is settled.
pub fn walk_replica<E: Environment + ?Sized>(env: &E, walk_seed: u64, cfg: &ReplicaConfig) -> Result<ReplicaWalk> {
    let mut walker = Walker::new(env, rng::stream(walk_seed, rng::tag::WALK));
    let mut traj = Trajectory::with_capacity(env.dim(), cfg.horizon.min(1 << 24));
    let mut ren = StreamingRenewals::new();
    ren.push(0);
    let target = cfg.slab_budget.saturating_add(cfg.policy.k_discard + 2);
    for n in 1..=cfg.horizon {
        let dir = walker.advance()?;
        traj.push(dir);
        ren.push(walker.position().level());
        if n % 4096 == 0 && ren.settled(cfg.policy.safety_band) >= target {
            break;
        }
    }
    let renewals = ren.finish(&cfg.policy);
    Ok(ReplicaWalk { trajectory: traj, renewals })
}

/// Slab records between consecutive confirmed renewals.
pub fn slabs_from(replica: u32, traj: &Trajectory, log: &RenewalLog) -> Vec<SlabRecord> {
    let taus = log.confirmed();
    if taus.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(taus.len() - 1);
    let mut seen = FxHashSet::default();
    let mut positions = traj.positions().enumerate().skip(taus[0]);
    let mut cur = positions.next().map(|(_, p)| p).expect("renewal inside trajectory");
    for (k, w) in taus.windows(2).enumerate() {
        let start = cur;
        seen.clear();
        seen.insert(cur);
        for (n, p) in positions.by_ref() {
            cur = p;
            if n == w[1] {
                break;
            }
            seen.insert(p);
        }
        out.push(SlabRecord {
            replica,
            slab: k as u32 + 1,
            tau_start: w[0] as u64,
            tau_gap: (w[1] - w[0]) as u64,
            displacement: cur.sub(&start),
            distinct_points: seen.len() as u64,
        });
    }
    out
}

/// Runs one replica per environment seed and pools slabs `i >= 2`.
pub fn run_replicas(env_seeds: &[u64], alpha: &AlphaParams, cfg: &ReplicaConfig) -> Result<ReplicaBatch> {
    if cfg.horizon == 0 || cfg.slab_budget == 0 {
        return Err(Error::Parameter("horizon and slab_budget must be positive".into()));
    }
    let per: Vec<Result<Vec<SlabRecord>>> = env_seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let env = DirichletEnvironment::new(alpha.clone(), seed);
            let walk = walk_replica(&env, rng::derive(seed, &[rng::tag::WALK]), cfg)?;
            Ok(slabs_from(i as u32, &walk.trajectory, &walk.renewals))
        })
        .collect();
    let mut batch = ReplicaBatch::default();
    batch.diagnostics.launched = env_seeds.len();
    for (i, slabs) in per.into_iter().enumerate() {
        let mut slabs = slabs?;
        if slabs.len() < 2 {
            batch.diagnostics.dropped += 1;
            batch.diagnostics.dropped_replicas.push(i as u32);
            continue;
        }
        batch.diagnostics.kept += 1;
        batch.first_slabs.push(slabs.remove(0));
        slabs.truncate(cfg.slab_budget);
        batch.records.extend(slabs);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::renewal::detect_renewals_with;

    #[test]
    fn slab_fields_on_a_hand_path() {
        // e_1 levels 0,1,1,2,3 (the repeated level moves along e_2)
        let t = Trajectory::from_directions(2, vec![0, 1, 0, 0]).unwrap();
        let log = detect_renewals_with(&t, &ConfirmPolicy { k_discard: 0, safety_band: 0 });
        assert_eq!(log.renewal_indices, vec![0, 3, 4]);
        let s = slabs_from(0, &t, &log);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].tau_gap, s[0].distinct_points), (3, 3));
        assert_eq!(s[0].displacement, Site::from_coords(&[2, 1]));
        assert_eq!((s[1].tau_gap, s[1].distinct_points), (1, 1));
    }

    #[test]
    fn symmetric_short_runs_degrade_gracefully() {
        let alpha = AlphaParams::symmetric(3, 0.1).unwrap();
        let seeds: Vec<u64> = (0..8).collect();
        let b = run_replicas(&seeds, &alpha, &ReplicaConfig::new(1000, 100)).unwrap();
        assert_eq!(b.diagnostics.kept + b.diagnostics.dropped, 8);
        assert!(b.diagnostics.dropped >= 4, "{:?}", b.diagnostics);
    }

    #[test]
    fn replay_is_identical() {
        let alpha = AlphaParams::new(3, vec![0.3, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let seeds = [1u64, 2, 3];
        let cfg = ReplicaConfig::new(20_000, 50);
        let a = run_replicas(&seeds, &alpha, &cfg).unwrap();
        let b = run_replicas(&seeds, &alpha, &cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert!(!a.records.is_empty());
        for r in &a.records {
            assert!(r.tau_gap >= 1 && r.displacement.0[0] >= 1);
            assert!(r.distinct_points >= 1 && r.distinct_points <= r.tau_gap + 1);
        }
    }
}
