//! Traps: detection, the partially forgotten path, visit statistics, the
//! conditioned-edge oracle and the strength-tail tests.

mod forget;
mod oracle;
mod tail;
mod trap;
mod visits;

pub use forget::{forget_path, ForgottenPath};
pub use oracle::{exit_probabilities, from_rk, to_rk, ConditionedEdgeSampler, EdgeLaw, EdgeSample};
pub use tail::{
    conditional_tail_test, strength_vs_visits_test, tail_slope, ConfigFilter, StrengthSample,
    TailOptions, TailPoint, TailReport, VisitCell, VisitOptions, VisitReport,
};
pub use trap::{find_traps, is_trap, strength, Trap, TrapIndex, TRAP_THRESHOLD};
pub use visits::{configurations_from_forgotten, trap_visit_stats, TrapConfiguration, TrapStats, TrapVisitReport};
