use rayon::prelude::*;

use super::common::{env_seeds, full_walk, replica_env, visited_traps, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{Table, TrapRow};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::pearson;
use crate::traps::{
    conditional_tail_test, strength_vs_visits_test, tail_slope, trap_visit_stats, ConditionedEdgeSampler, ConfigFilter,
    EdgeLaw, StrengthSample, TailOptions, VisitOptions,
};

pub const NAME: &str = "trap_tails";

/// Strength threshold of the decorrelation check.
pub const STRONG_TRAP: f64 = 10.0;

/// Log-log tail slope of unconditioned oracle strengths along `axis`.
pub fn oracle_slope(cfg: &ExperimentConfig, axis: usize, opts: &TailOptions) -> Result<(f64, (f64, f64))> {
    let alpha = cfg.alpha()?;
    let sampler = ConditionedEdgeSampler::unconditioned(EdgeLaw::new(&alpha, axis, true));
    let mut r = rng::stream(rng::derive(cfg.seed, &[rng::tag::ORACLE, axis as u64]), 0);
    let pairs: Vec<(f64, f64)> =
        (0..cfg.thresholds.oracle_samples).map(|_| (sampler.sample_rejection(&mut r).strength(), 1.0)).collect();
    Ok(tail_slope(&pairs, opts))
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Oracle and observed trap-strength tails per axis, and their dependence on
/// the number of visits.
pub fn exp_trap_tails(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    if e.kappa > 1.0 {
        return Err(Error::Refused(format!("{NAME}: kappa = {:.4} > 1; traps do not drive the scaling", e.kappa)));
    }
    let t = &cfg.thresholds;
    let alpha = cfg.alpha()?;
    let d = cfg.d;
    let per: Vec<Vec<TrapRow>> = env_seeds(cfg)
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let env = replica_env(&alpha, s);
            let w = full_walk(&env, s, cfg.horizon)?;
            let traps = visited_traps(&env, &w.trajectory)?;
            let rep = trap_visit_stats(&w.trajectory, &traps);
            Ok(rep.stats.iter().map(|st| TrapRow::from_stats(i as u32, st, d)).collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<TrapRow> = per.concat();
    let samples: Vec<StrengthSample> = rows
        .iter()
        .map(|r| StrengthSample {
            strength: r.strength,
            weight: 1.0,
            config: crate::traps::TrapConfiguration {
                axis: r.axis as usize - 1,
                forward: r.forward,
                n_xx: r.n_xx,
                n_xy: r.n_xy,
                n_yx: r.n_yx,
                n_yy: r.n_yy,
            },
        })
        .collect();

    let mut rep = ExperimentReport::new(NAME, &cfg.digest());
    rep.estimate("kappa", e.kappa, None).estimate("observed_traps", rows.len() as f64, None);
    let opts = TailOptions { min_samples: t.min_trap_samples, seed: rng::derive(cfg.seed, &[rng::tag::BOOTSTRAP]), ..Default::default() };
    let oracle: Vec<(f64, (f64, f64))> = (0..d).into_par_iter().map(|j| oracle_slope(cfg, j, &opts)).collect::<Result<_>>()?;
    for (j, &(slope, ci)) in oracle.iter().enumerate() {
        let axis = j + 1;
        let kj = e.kappa_j[j];
        rep.estimate(&format!("kappa_{axis}"), kj, None)
            .estimate(&format!("oracle_slope_{axis}"), slope, Some(ci))
            .check(
                &format!("oracle_slope_{axis}"),
                slope,
                format!("|slope + {kj:.3}| <= {}", t.slope_tolerance),
                (slope + kj).abs() <= t.slope_tolerance,
            );
        let filter = ConfigFilter { axis: Some(j), ..Default::default() };
        match conditional_tail_test(&filter, &samples, kj, e.alpha_bar, &opts) {
            Ok(obs) => {
                rep.estimate(&format!("observed_slope_{axis}"), obs.slope, Some(obs.slope_ci))
                    .estimate(&format!("observed_samples_{axis}"), obs.samples as f64, None)
                    .check(
                        &format!("observed_matches_oracle_{axis}"),
                        obs.slope,
                        "observed and oracle slope intervals overlap",
                        overlap(obs.slope_ci, ci),
                    );
            }
            Err(Error::StatisticalPower(msg)) => {
                rep.note(format!("axis {axis} skipped for the observed tail: {msg}"));
            }
            Err(err) => return Err(err),
        }
        let visits: Vec<(f64, u32)> =
            samples.iter().filter(|s| s.config.axis == j).map(|s| (s.strength, s.config.n())).collect();
        match strength_vs_visits_test(&visits, kj, &VisitOptions::default()) {
            Ok(v) => {
                rep.check(
                    &format!("strength_vs_visits_{axis}"),
                    v.cells.iter().map(|c| c.ratio_validation / c.bound).fold(0.0, f64::max),
                    "validation ratio <= fitted bound on every cell",
                    v.pass,
                );
            }
            Err(Error::StatisticalPower(msg)) => {
                rep.note(format!("axis {axis} skipped for the visit test: {msg}"));
            }
            Err(err) => return Err(err),
        }
    }
    if samples.len() >= 2 {
        let strong: Vec<f64> = samples.iter().map(|s| f64::from(u8::from(s.strength >= STRONG_TRAP))).collect();
        let n: Vec<f64> = samples.iter().map(|s| s.config.n() as f64).collect();
        let rho = pearson(&strong, &n);
        let rho = if rho.is_finite() { rho } else { 0.0 };
        rep.estimate("strong_visit_correlation", rho, None).check(
            "decorrelation",
            rho,
            format!("pearson(1{{s >= {STRONG_TRAP}}}, N) <= {}", t.decorrelation),
            rho <= t.decorrelation,
        );
    } else {
        rep.note("no traps observed; decorrelation skipped");
    }
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("traps".into(), Table::Traps(rows)));
    Ok(out)
}
