use rand::distr::OpenClosed01;
use rand::Rng;
use rayon::prelude::*;

use super::common::{env_seeds, replica_env, require_e1_transience, walk_seed, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{SeriesRow, SlabRow, Table};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::rng;
use crate::stable::{sample_unit_stable, tail_index};
use crate::stats::{bootstrap_ci, ks_two_sample, median, quantile_sorted, sorted};
use crate::walk::{run_replicas, walk_replica, ReplicaConfig, ReplicaDiagnostics};

pub const TAIL_NAME: &str = "tau_tail";
pub const LOG_NAME: &str = "tau_log";

/// Scale-fitted comparison of normalized block sums with `c·S_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StableFit {
    pub scale: f64,
    pub ks: f64,
    pub sums: usize,
}

/// Draws `resamples` sums of `block` values from `pool` with replacement,
/// normalizes by `block^{-1/κ}`, fits `c` by matching medians against
/// `reference` draws of `S_1` and returns the two-sample KS distance.
pub fn stable_block_fit<R: Rng + ?Sized>(
    pool: &[f64],
    kappa: f64,
    block: usize,
    resamples: usize,
    reference: usize,
    rng: &mut R,
) -> Result<StableFit> {
    if pool.is_empty() {
        return Err(Error::StatisticalPower("empty pool".into()));
    }
    let norm = (block as f64).powf(-1.0 / kappa);
    let sums: Vec<f64> = (0..resamples)
        .map(|_| (0..block).map(|_| pool[rng.random_range(0..pool.len())]).sum::<f64>() * norm)
        .collect();
    let s1: Vec<f64> = (0..reference).map(|_| sample_unit_stable(kappa, rng)).collect::<Result<_>>()?;
    let scale = median(&sums) / median(&s1);
    let scaled: Vec<f64> = s1.iter().map(|v| v * scale).collect();
    Ok(StableFit { scale, ks: ks_two_sample(&sums, &scaled), sums: resamples })
}

/// Exact Pareto sample `U^{-1/κ}`.
pub fn pareto_pool<R: Rng + ?Sized>(kappa: f64, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(OpenClosed01).powf(-1.0 / kappa)).collect()
}

/// Tail index of slab durations and the stable limit of their sums.
pub fn exp_tau_tail(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    if e.kappa >= 1.0 {
        return Err(Error::Refused(format!(
            "{TAIL_NAME}: kappa = {:.4} >= 1 has no stable renewal tail; use {LOG_NAME} for kappa = 1",
            e.kappa
        )));
    }
    require_e1_transience(&e, TAIL_NAME)?;
    let t = &cfg.thresholds;
    let alpha = cfg.alpha()?;
    let batch = run_replicas(&env_seeds(cfg), &alpha, &ReplicaConfig::new(cfg.horizon as usize, t.slab_budget))?;
    let gaps: Vec<f64> = batch.gaps().iter().map(|&g| g as f64).collect();
    if gaps.len() < t.min_gaps {
        return Err(Error::StatisticalPower(format!(
            "{TAIL_NAME}: {} slab gaps pooled from {} kept replicas, need {}",
            gaps.len(),
            batch.diagnostics.kept,
            t.min_gaps
        )));
    }
    let mut r = rng::stream(rng::derive(cfg.seed, &[rng::tag::BOOTSTRAP]), 0);
    let k = ((gaps.len() as f64 * t.hill_fraction) as usize).max(1);
    let hill = tail_index(&gaps, k, &mut r)?;
    let fit = stable_block_fit(&gaps, e.kappa, t.block_size, t.block_resamples, t.stable_reference, &mut r)?;
    let mut sr = rng::stream(rng::derive(cfg.seed, &[rng::tag::ORACLE]), 0);
    let surrogate = pareto_pool(e.kappa, gaps.len(), &mut sr);
    let sur = stable_block_fit(&surrogate, e.kappa, t.block_size, t.block_resamples, t.stable_reference, &mut sr)?;

    let short = count_short(&batch.records, t.slab_budget) + batch.diagnostics.dropped;
    let mut rep = ExperimentReport::new(TAIL_NAME, &cfg.digest());
    if short > 0 {
        rep.note(format!(
            "{short} replicas hit the horizon before {} slabs; their unfinished slab is censored",
            t.slab_budget
        ));
    }
    let (lo, hi) = (e.kappa - t.hill_tolerance, e.kappa + t.hill_tolerance);
    rep.estimate("kappa", e.kappa, None)
        .estimate("gaps", gaps.len() as f64, None)
        .estimate("hill_k", k as f64, None)
        .estimate("hill", hill.alpha, Some(hill.ci))
        .estimate("stable_scale", fit.scale, None)
        .estimate("ks", fit.ks, None)
        .estimate("surrogate_scale", sur.scale, None)
        .estimate("surrogate_ks", sur.ks, None)
        .check("hill_in_band", hill.alpha, format!("{lo:.3} <= hill <= {hi:.3}"), lo <= hill.alpha && hill.alpha <= hi)
        .check("ks_block_sums", fit.ks, format!("ks <= {}", t.ks_tau), fit.ks <= t.ks_tau);
    if sur.ks > t.ks_tau {
        rep.flag("surrogate_ks", sur.ks, format!("exact-Pareto surrogate exceeds ks <= {}", t.ks_tau));
    }
    for frac in [0.01, 0.05, 0.1] {
        let kk = ((gaps.len() as f64 * frac) as usize).max(1);
        rep.estimate(&format!("hill_k{kk}"), crate::stable::hill(&gaps, kk)?, None);
    }
    rep.note(format!(
        "block sums of {} gaps resampled {} times from the pooled slabs; {} reference draws of S_1",
        t.block_size, t.block_resamples, t.stable_reference
    ));
    rep.diagnostics = Some(batch.diagnostics.clone());
    let rows = batch.records.iter().map(|s| SlabRow::from_record(s, cfg.d)).collect();
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("slabs".into(), Table::Slabs(rows)));
    Ok(out)
}

fn count_short(records: &[crate::walk::SlabRecord], budget: usize) -> usize {
    let mut per = std::collections::BTreeMap::<u32, usize>::new();
    for r in records {
        *per.entry(r.replica).or_default() += 1;
    }
    per.values().filter(|&&n| n < budget).count()
}

/// `τ_n` (1-based) for the requested `n`, per replica; `None` past the
/// confirmed renewals.
fn renewal_times(cfg: &ExperimentConfig, ns: &[usize]) -> Result<(Vec<Vec<Option<u64>>>, ReplicaDiagnostics)> {
    let alpha = cfg.alpha()?;
    let budget = *ns.last().unwrap_or(&1);
    let seeds = env_seeds(cfg);
    let per: Vec<Vec<Option<u64>>> = seeds
        .par_iter()
        .map(|&s| {
            let env = replica_env(&alpha, s);
            let w = walk_replica(&env, walk_seed(s), &ReplicaConfig::new(cfg.horizon as usize, budget))?;
            let taus = w.renewals.confirmed();
            Ok(ns.iter().map(|&n| taus.get(n - 1).map(|&v| v as u64)).collect())
        })
        .collect::<Result<_>>()?;
    let mut diag = ReplicaDiagnostics { launched: seeds.len(), ..Default::default() };
    for (i, row) in per.iter().enumerate() {
        if row.first().copied().flatten().is_some() {
            diag.kept += 1;
        } else {
            diag.dropped += 1;
            diag.dropped_replicas.push(i as u32);
        }
    }
    Ok((per, diag))
}

/// Stability of `τ_n / (n ln n)` over dyadic `n`.
pub fn exp_tau_log(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    if (e.kappa - 1.0).abs() > 1e-9 {
        let hint = if e.kappa < 1.0 { format!("use {TAIL_NAME}") } else { "the walk is ballistic".into() };
        return Err(Error::Refused(format!("{LOG_NAME}: kappa = {:.4} is not 1; {hint}", e.kappa)));
    }
    let t = &cfg.thresholds;
    let ns: Vec<usize> = (t.plateau_min_exp..=t.plateau_max_exp).map(|k| 1usize << k).collect();
    let (per, diag) = renewal_times(cfg, &ns)?;
    let mut rep = ExperimentReport::new(LOG_NAME, &cfg.digest());
    rep.estimate("kappa", e.kappa, None).estimate("drift_norm", e.drift_norm(), None);
    rep.diagnostics = Some(diag.clone());
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut r = rng::stream(rng::derive(cfg.seed, &[rng::tag::BOOTSTRAP]), 1);
    for (k, &n) in ns.iter().enumerate() {
        let vals: Vec<f64> =
            per.iter().filter_map(|row| row[k]).map(|tau| tau as f64 / (n as f64 * (n as f64).ln())).collect();
        if vals.is_empty() {
            rep.note(format!("n = {n}: no replica reached {n} confirmed renewals"));
            continue;
        }
        let m = median(&vals);
        let ci = if vals.len() >= 2 { Some(bootstrap_ci(&vals, median, 500, 0.95, &mut r)) } else { None };
        rows.push(match ci {
            Some(c) => SeriesRow::band("tau_over_nlogn", n as f64, m, c),
            None => SeriesRow::point("tau_over_nlogn", n as f64, m),
        });
        rep.estimate(&format!("ratio_n{n}"), m, ci);
        ratios.push(m);
    }
    if cfg.replicas == 1 {
        rep.flag("single_replica", 1.0, "confidence intervals omitted");
    }
    if ratios.len() < 2 {
        let reason = if e.has_drift() {
            "the horizon is too short for the requested renewal counts"
        } else {
            "the weights have zero drift, so the walk has no renewal times"
        };
        return Err(Error::StatisticalPower(format!(
            "{LOG_NAME}: {} of {} dyadic points have data ({} of {} replicas produced renewals); {reason}",
            ratios.len(),
            ns.len(),
            diag.kept,
            diag.launched
        )));
    }
    let spread = |v: &[f64]| {
        let s = sorted(v);
        quantile_sorted(&s, 1.0) / quantile_sorted(&s, 0.0)
    };
    let full = spread(&ratios);
    let rule = format!("max/min <= {}", t.plateau_ratio);
    if full <= t.plateau_ratio {
        rep.check("plateau", full, rule, true);
    } else {
        let single_excursion = (0..ratios.len()).any(|skip| {
            let rest: Vec<f64> = ratios.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
            spread(&rest) <= t.plateau_ratio
        });
        match single_excursion {
            true => rep.flag("plateau", full, format!("{rule} breached at a single dyadic point")),
            false => rep.check("plateau", full, rule, false),
        };
    }
    if ratios.len() < ns.len() {
        rep.flag("missing_points", (ns.len() - ratios.len()) as f64, "some dyadic points had no data");
    }
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("ratios".into(), Table::Series(rows)));
    Ok(out)
}
