use rayon::prelude::*;

use super::common::{env_seeds, replica_env, require_e1_transience, walk_seed, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{SeriesRow, Table};
use super::report::ExperimentReport;
use crate::error::Result;
use crate::rng;
use crate::stats::{dyadic_points, quantile_sorted, sorted};
use crate::walk::Walker;

pub const NAME: &str = "kappa_scaling";

/// `ln(Y_n·e_1) / ln n` at dyadic `n`, per replica.
fn exponents_along(env_seed: u64, cfg: &ExperimentConfig, points: &[usize]) -> Result<Vec<f64>> {
    let env = replica_env(&cfg.alpha()?, env_seed);
    let mut walker = Walker::new(&env, rng::stream(walk_seed(env_seed), rng::tag::WALK));
    let mut out = Vec::with_capacity(points.len());
    let mut n = 0;
    for &p in points {
        while n < p {
            walker.advance()?;
            n += 1;
        }
        let level = walker.position().level().max(1) as f64;
        out.push(level.ln() / (p as f64).ln());
    }
    Ok(out)
}

/// Median scaling exponent of the `e_1` displacement against `min(κ, 1)`.
pub fn exp_kappa_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    require_e1_transience(&e, NAME)?;
    let t = &cfg.thresholds;
    let mut rep = ExperimentReport::new(NAME, &cfg.digest());
    let target = e.kappa.min(1.0);
    if e.is_ballistic() {
        rep.note(format!("ballistic regime (kappa = {:.4} > 1): linear scaling, exponent near 1 expected", e.kappa));
    }
    if cfg.horizon < t.asymptotic_horizon {
        rep.flag(
            "insufficient_asymptotics",
            cfg.horizon as f64,
            format!("horizon below {}; exponents are pre-asymptotic", t.asymptotic_horizon),
        );
    }
    let points = dyadic_points(16, cfg.horizon as usize);
    let per: Vec<Vec<f64>> =
        env_seeds(cfg).par_iter().map(|&s| exponents_along(s, cfg, &points)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut medians = Vec::new();
    for (k, &p) in points.iter().enumerate() {
        let col = sorted(&per.iter().map(|r| r[k]).collect::<Vec<_>>());
        let med = quantile_sorted(&col, 0.5);
        medians.push(med);
        rows.push(SeriesRow::band("median_exponent", p as f64, med, (quantile_sorted(&col, 0.25), quantile_sorted(&col, 0.75))));
    }
    let last = *medians.last().expect("horizon admits a dyadic point");
    rep.estimate("kappa", e.kappa, None)
        .estimate("target_exponent", target, None)
        .estimate("final_n", *points.last().unwrap() as f64, None)
        .estimate("median_exponent", last, None)
        .estimate("distance_to_target", (last - target).abs(), None)
        .check(
            "median_exponent_near_target",
            last,
            format!("|median - {target:.4}| <= {}", t.exponent_tolerance),
            (last - target).abs() <= t.exponent_tolerance,
        );
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("exponents".into(), Table::Series(rows)));
    Ok(out)
}
