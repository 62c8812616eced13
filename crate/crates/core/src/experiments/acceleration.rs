use rayon::prelude::*;

use super::common::{env_seeds, replica_env, walk_seed, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{SeriesRow, Table};
use super::report::ExperimentReport;
use crate::accel::{simulate_accelerated, AccelConfig};
use crate::error::Result;
use crate::stats::{kolmogorov_survival, ks_one_sample};

pub const NAME: &str = "acceleration";

/// Replicas used by the experiment, at most.
pub const MAX_REPLICAS: usize = 4;

/// Holding times of the accelerated walk against their exponential law.
pub fn exp_acceleration(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let t = &cfg.thresholds;
    let alpha = cfg.alpha()?;
    let ac = AccelConfig::new(cfg.m);
    let seeds: Vec<u64> = env_seeds(cfg).into_iter().take(MAX_REPLICAS).collect();
    let runs: Vec<(Vec<f64>, f64, f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let env = replica_env(&alpha, s);
            let a = simulate_accelerated(&env, &ac, t.accel_steps, walk_seed(s))?;
            let normalized: Vec<f64> = a.holding_times().zip(&a.rates).map(|(h, g)| h * g).collect();
            let mean_time: f64 = a.rates.iter().map(|g| 1.0 / g).sum();
            let var_time: f64 = a.rates.iter().map(|g| 1.0 / (g * g)).sum();
            Ok((normalized, *a.jump_times.last().unwrap(), mean_time, var_time))
        })
        .collect::<Result<_>>()?;
    let mut rep = ExperimentReport::new(NAME, &cfg.digest());
    rep.estimate("m", cfg.m as f64, None).estimate("replicas", runs.len() as f64, None);
    let pooled: Vec<f64> = runs.iter().flat_map(|r| r.0.iter().copied()).collect();
    let ks = ks_one_sample(&pooled, |x| 1.0 - (-x.max(0.0)).exp());
    let p = kolmogorov_survival(ks * (pooled.len() as f64).sqrt());
    rep.estimate("holding_ks", ks, None).check(
        "normalized_holding_exponential",
        p,
        format!("p-value >= {}", t.ks_significance),
        p >= t.ks_significance,
    );
    let mut rows = Vec::new();
    for (i, (_, total, m, v)) in runs.iter().enumerate() {
        let z = (total - m) / v.sqrt();
        rows.push(SeriesRow::band("total_time", i as f64, *total, (m - 3.0 * v.sqrt(), m + 3.0 * v.sqrt())));
        rep.check(&format!("occupation_identity_{i}"), z, "|T - sum 1/gamma| <= 3 sd", z.abs() <= 3.0);
    }
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("holding".into(), Table::Series(rows)));
    Ok(out)
}
