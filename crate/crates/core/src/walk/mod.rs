//! Discrete-time walk, renewal detection and slab extraction.

mod renewal;
mod replicas;
mod trajectory;
mod walker;

pub use renewal::{
    brute_force_renewals, detect_renewals, detect_renewals_with, ConfirmPolicy, RenewalLog,
    StreamingRenewals,
};
pub use replicas::{
    run_replicas, slabs_from, walk_replica, ReplicaBatch, ReplicaConfig, ReplicaDiagnostics,
    ReplicaWalk, SlabRecord,
};
pub use trajectory::Trajectory;
pub use walker::{pick_direction, step, SiteCache, Walker};
