//! One-sided stable subordinators, their inverses, tail-index estimation and
//! Monte Carlo checks of the auxiliary inequalities used by the limit theory.

mod cadlag;
mod majorant;
mod sampler;
pub mod suites;
mod tail_index;

pub use cadlag::{invert_cadlag, CadlagStep};
pub use majorant::{build_concave_majorant, ConcaveMajorant};
pub use sampler::{sample_stable_increment, sample_unit_stable, stable_cf, SubordinatorPath};
pub use suites::{SuiteCell, SuiteReport, Verdict};
pub use tail_index::{hill, tail_index, TailIndex, TailMethod, BOOTSTRAP_RESAMPLES};
