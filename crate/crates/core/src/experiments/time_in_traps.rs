use rand::Rng;
use rayon::prelude::*;

use super::common::{env_seeds, increases, log_log_slope, replica_env, require_e1_transience, visited_traps, walk_seed, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{SeriesRow, Table};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{dyadic_points, median, quantile_sorted, sorted};
use crate::walk::{walk_replica, ReplicaConfig};

pub const NAME: &str = "time_in_traps";

/// Step counts before `τ_n` for one replica.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Split {
    total: f64,
    outside: f64,
    non_minimal: f64,
}

fn replica_splits(cfg: &ExperimentConfig, env_seed: u64, ns: &[usize], kappa: f64, kappa_j: &[f64]) -> Result<Vec<Option<Split>>> {
    let env = replica_env(&cfg.alpha()?, env_seed);
    let budget = *ns.last().unwrap_or(&1);
    let w = walk_replica(&env, walk_seed(env_seed), &ReplicaConfig::new(cfg.horizon as usize, budget))?;
    let traps = visited_traps(&env, &w.trajectory)?;
    let taus = w.renewals.confirmed();
    let mut out = vec![None; ns.len()];
    let (mut outside, mut non_minimal) = (0u64, 0u64);
    let mut k = 0;
    for (step, p) in w.trajectory.positions().enumerate() {
        while k < ns.len() && ns[k] <= taus.len() && taus[ns[k] - 1] == step {
            out[k] = Some(Split { total: step as f64, outside: outside as f64, non_minimal: non_minimal as f64 });
            k += 1;
        }
        if k == ns.len() {
            break;
        }
        match traps.trap_of(&p) {
            None => outside += 1,
            Some(tr) if kappa_j[tr.axis] > kappa + 1e-12 => non_minimal += 1,
            Some(_) => {}
        }
    }
    Ok(out)
}

fn slope_ci<R: Rng + ?Sized>(per: &[Vec<Option<Split>>], ns: &[usize], pick: fn(&Split) -> f64, rng: &mut R) -> (f64, (f64, f64)) {
    let fit = |rows: &[&Vec<Option<Split>>]| {
        let (x, y): (Vec<f64>, Vec<f64>) = ns
            .iter()
            .enumerate()
            .filter_map(|(k, &n)| {
                let v: Vec<f64> = rows.iter().filter_map(|r| r[k].as_ref().map(pick)).collect();
                (!v.is_empty()).then(|| (n as f64, median(&v)))
            })
            .unzip();
        log_log_slope(&x, &y)
    };
    let all: Vec<&Vec<Option<Split>>> = per.iter().collect();
    let point = fit(&all);
    let mut boot: Vec<f64> = (0..200)
        .map(|_| {
            let pick_rows: Vec<&Vec<Option<Split>>> = (0..per.len()).map(|_| &per[rng.random_range(0..per.len())]).collect();
            fit(&pick_rows)
        })
        .filter(|s| s.is_finite())
        .collect();
    boot = sorted(&boot);
    let ci = if boot.is_empty() { (f64::NAN, f64::NAN) } else { (quantile_sorted(&boot, 0.025), quantile_sorted(&boot, 0.975)) };
    (point, ci)
}

/// Scaling of the time spent outside traps and inside traps of non-minimal
/// direction before the `n`-th renewal.
pub fn exp_time_in_traps(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    if e.kappa >= 1.0 {
        return Err(Error::Refused(format!("{NAME}: requires kappa < 1, got {:.4}", e.kappa)));
    }
    require_e1_transience(&e, NAME)?;
    let t = &cfg.thresholds;
    let ns = dyadic_points(16, t.renewal_budget);
    let per: Vec<Vec<Option<Split>>> = env_seeds(cfg)
        .par_iter()
        .map(|&s| replica_splits(cfg, s, &ns, e.kappa, &e.kappa_j))
        .collect::<Result<_>>()?;
    let half = per.len().div_ceil(2);
    let reach: Vec<usize> = (0..ns.len()).map(|k| per.iter().filter(|r| r[k].is_some()).count()).collect();
    let keep: Vec<usize> = (0..ns.len()).filter(|&k| reach[k] >= half.max(1)).collect();
    if keep.len() < 3 {
        return Err(Error::StatisticalPower(format!(
            "{NAME}: only {} dyadic renewal counts are reached by half the replicas",
            keep.len()
        )));
    }
    let ns_kept: Vec<usize> = keep.iter().map(|&k| ns[k]).collect();
    let per_kept: Vec<Vec<Option<Split>>> = per.iter().map(|r| keep.iter().map(|&k| r[k]).collect()).collect();

    let mut rows = Vec::new();
    let mut fractions = Vec::new();
    for (k, &n) in ns_kept.iter().enumerate() {
        let col: Vec<Split> = per_kept.iter().filter_map(|r| r[k]).collect();
        let med = |f: fn(&Split) -> f64| median(&col.iter().map(f).collect::<Vec<_>>());
        let frac = median(&col.iter().map(|s| s.non_minimal / s.total.max(1.0)).collect::<Vec<_>>());
        rows.push(SeriesRow::point("total", n as f64, med(|s| s.total)));
        rows.push(SeriesRow::point("outside", n as f64, med(|s| s.outside)));
        rows.push(SeriesRow::point("non_minimal_fraction", n as f64, frac));
        fractions.push(frac);
    }
    let mut r = rng::stream(rng::derive(cfg.seed, &[rng::tag::BOOTSTRAP]), 2);
    let (out_slope, out_ci) = slope_ci(&per_kept, &ns_kept, |s| s.outside, &mut r);
    let (tot_slope, tot_ci) = slope_ci(&per_kept, &ns_kept, |s| s.total, &mut r);
    let inv = 1.0 / e.kappa;
    let mut rep = ExperimentReport::new(NAME, &cfg.digest());
    rep.estimate("kappa", e.kappa, None)
        .estimate("inverse_kappa", inv, None)
        .estimate("outside_slope", out_slope, Some(out_ci))
        .estimate("total_slope", tot_slope, Some(tot_ci))
        .check("outside_slope_below_inverse_kappa", out_slope, format!("slope < {inv:.3}"), out_slope < inv)
        .check(
            "total_slope_near_inverse_kappa",
            tot_slope,
            format!("|slope - {inv:.3}| <= {}", t.total_time_slope_tolerance),
            (tot_slope - inv).abs() <= t.total_time_slope_tolerance,
        );
    if e.kappa_j.iter().any(|&k| k > e.kappa + 1e-12) {
        let (frac_slope, frac_ci) = slope_ci(&per_kept, &ns_kept, |s| s.non_minimal / s.total.max(1.0), &mut r);
        rep.estimate("non_minimal_fraction_slope", frac_slope, Some(frac_ci))
            .estimate("non_minimal_fraction_increases", increases(&fractions) as f64, None)
            .check("non_minimal_fraction_decreasing", frac_slope, "log-log slope of the median fraction < 0", frac_slope < 0.0);
    } else {
        rep.note("every direction attains the minimal exponent; non-minimal fraction not tested");
    }
    let short = per.iter().filter(|r| r.last().is_some_and(Option::is_none)).count();
    if short > 0 {
        rep.note(format!("{short} replicas hit the horizon before {} renewals", ns.last().unwrap()));
    }
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("times".into(), Table::Series(rows)));
    Ok(out)
}
