use rand::Rng;
use rayon::prelude::*;

use super::common::{env_seeds, replica_env, require_e1_transience, walk_seed, ExperimentOutput};
use super::config::ExperimentConfig;
use super::csv_io::{SeriesRow, Table};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::rng;
use crate::stable::{invert_cadlag, sample_stable_increment, CadlagStep};
use crate::stats::{ks_two_sample, median};
use crate::walk::Walker;

pub const NAME: &str = "position_law";

/// Number of draws of the inverse subordinator per time.
pub const REFERENCE_DRAWS: usize = 5000;

/// Grid step of the subordinator paths used for the inverse.
pub const REFERENCE_DT: f64 = 1e-3;

/// Draws of `inf{s : S_s > t}` for each `t`, from one grid path per draw.
pub fn inverse_subordinator_draws<R: Rng + ?Sized>(kappa: f64, times: &[f64], draws: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let mut out = vec![Vec::with_capacity(draws); times.len()];
    for _ in 0..draws {
        let (mut locs, mut vals) = (vec![0.0], vec![0.0]);
        let mut s = 0.0;
        while s <= t_max {
            s += sample_stable_increment(kappa, REFERENCE_DT, rng)?;
            locs.push(locs.len() as f64 * REFERENCE_DT);
            vals.push(s);
        }
        let f = CadlagStep::new(locs, vals)?;
        for (k, &t) in times.iter().enumerate() {
            out[k].push(invert_cadlag(&f, t));
        }
    }
    Ok(out)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `(longitudinal, |transverse|)` components of `y` along `u`.
fn split(y: &Site, u: &[f64]) -> (f64, f64) {
    let c = y.coords(u.len());
    let lon: f64 = c.iter().zip(u).map(|(&a, b)| a as f64 * b).sum();
    let tr2: f64 = c.iter().zip(u).map(|(&a, b)| (a as f64 - lon * b).powi(2)).sum();
    (lon, tr2.sqrt())
}

/// Positions of one replica at the requested step indices (sorted).
fn positions_at(cfg: &ExperimentConfig, env_seed: u64, at: &[usize]) -> Result<Vec<Site>> {
    let env = replica_env(&cfg.alpha()?, env_seed);
    let mut w = Walker::new(&env, rng::stream(walk_seed(env_seed), rng::tag::WALK));
    let mut n = 0;
    let mut out = Vec::with_capacity(at.len());
    for &k in at {
        while n < k {
            w.advance()?;
            n += 1;
        }
        out.push(w.position());
    }
    Ok(out)
}

/// Marginal law of the rescaled position along the drift against the
/// inverse stable subordinator, and the shrinking transverse spread.
pub fn exp_position_law(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = cfg.exponents()?;
    if e.kappa >= 1.0 {
        return Err(Error::Refused(format!("{NAME}: requires kappa < 1, got {:.4}", e.kappa)));
    }
    require_e1_transience(&e, NAME)?;
    let t = &cfg.thresholds;
    let n = cfg.horizon as usize;
    let u = unit(&e.drift);
    let law_steps: Vec<usize> = t.position_times.iter().map(|&s| (n as f64 * s).floor() as usize).collect();
    let spread_steps: Vec<usize> = t.spread_exps.iter().map(|&k| 1usize << k).collect();
    let mut at: Vec<usize> = law_steps.iter().chain(&spread_steps).copied().collect();
    at.sort_unstable();
    at.dedup();
    let per: Vec<Vec<Site>> = env_seeds(cfg).par_iter().map(|&s| positions_at(cfg, s, &at)).collect::<Result<_>>()?;
    let column = |step: usize| -> Vec<(f64, f64)> {
        let k = at.binary_search(&step).expect("requested step recorded");
        per.iter().map(|r| split(&r[k], &u)).collect()
    };

    let mut rep = ExperimentReport::new(NAME, &cfg.digest());
    rep.estimate("kappa", e.kappa, None).estimate("n", n as f64, None);
    let mut r = rng::stream(rng::derive(cfg.seed, &[rng::tag::STABLE]), 0);
    let positive: Vec<f64> = t.position_times.iter().copied().filter(|&s| s > 0.0).collect();
    let reference = inverse_subordinator_draws(e.kappa, &positive, REFERENCE_DRAWS, &mut r)?;
    let mut rows = Vec::new();
    for (&time, &step) in t.position_times.iter().zip(&law_steps) {
        let lon: Vec<f64> = column(step).iter().map(|p| p.0 * (n as f64).powf(-e.kappa)).collect();
        if time == 0.0 {
            let exact = lon.iter().all(|&v| v == 0.0);
            rep.check("degenerate_at_0", 0.0, "all positions at 0", exact);
            continue;
        }
        let k = positive.iter().position(|&s| s == time).expect("positive time has a reference");
        let scale = median(&lon) / median(&reference[k]);
        let fitted: Vec<f64> = reference[k].iter().map(|v| v * scale).collect();
        let ks = ks_two_sample(&lon, &fitted);
        rep.estimate(&format!("scale_t{time}"), scale, None).check(
            &format!("longitudinal_ks_t{time}"),
            ks,
            format!("ks <= {}", t.ks_position),
            ks <= t.ks_position,
        );
        rows.push(SeriesRow::point("longitudinal_ks", time, ks));
    }
    let mut ratios = Vec::new();
    for &step in &spread_steps {
        let col = column(step);
        let lon = median(&col.iter().map(|p| p.0).collect::<Vec<_>>());
        let tr = median(&col.iter().map(|p| p.1).collect::<Vec<_>>());
        let ratio = tr / lon;
        rep.estimate(&format!("spread_ratio_n{step}"), ratio, None);
        rows.push(SeriesRow::point("spread_ratio", step as f64, ratio));
        ratios.push(ratio);
    }
    if ratios.len() >= 2 {
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        rep.check(
            "transverse_spread_decreasing",
            *ratios.last().unwrap(),
            "median |transverse| / median longitudinal decreases in n",
            decreasing,
        );
    }
    let mut out = ExperimentOutput::new(rep);
    out.tables.push(("positions".into(), Table::Series(rows)));
    Ok(out)
}
