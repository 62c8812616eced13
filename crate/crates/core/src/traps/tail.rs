//! Strength-tail tests: conditional tail envelope and strength/visit decorrelation.

use rand::Rng;
use serde::Serialize;

use super::visits::TrapConfiguration;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{least_squares, quantile_sorted, sorted};

/// A trap strength with its configuration and sampling weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrengthSample {
    pub strength: f64,
    pub weight: f64,
    pub config: TrapConfiguration,
}

/// Selects samples by axis and visit count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfigFilter {
    pub axis: Option<usize>,
    pub n_exact: Option<u32>,
    pub n_max: Option<u32>,
}

impl ConfigFilter {
    pub fn matches(&self, c: &TrapConfiguration) -> bool {
        self.axis.is_none_or(|a| a == c.axis)
            && self.n_exact.is_none_or(|n| n == c.n())
            && self.n_max.is_none_or(|n| c.n() <= n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailOptions {
    pub min_samples: usize,
    /// Log-spaced grid on which the tail is evaluated.
    pub a_min: f64,
    pub a_max: f64,
    pub grid_points: usize,
    /// Slope fit range.
    pub fit_min: f64,
    pub fit_max: f64,
    /// Envelope checked only for `A >= envelope_from`.
    pub envelope_from: f64,
    pub bootstrap_blocks: usize,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            min_samples: 10_000,
            a_min: 2.5,
            a_max: 200.0,
            grid_points: 24,
            fit_min: 5.0,
            fit_max: 100.0,
            envelope_from: 20.0,
            bootstrap_blocks: 100,
            bootstrap_resamples: 300,
            seed: 0x7A11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub a: f64,
    pub p: f64,
    /// Monte Carlo standard error of `ln p`.
    pub log_se: f64,
    pub lower: f64,
    pub upper: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub samples: usize,
    pub effective_samples: f64,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub fitted_d: f64,
    pub grid: Vec<TailPoint>,
    pub envelope_points: usize,
    pub envelope_violations: usize,
    pub violation_fraction: f64,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Weighted survival `P(s >= a)` on `grid`, from per-block bin sums.
struct BinnedTail {
    grid: Vec<f64>,
    /// `blocks[b][i]`: weight of samples in block `b` with `s >= grid[i]`.
    blocks: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl BinnedTail {
    fn new(samples: &[(f64, f64)], grid: Vec<f64>, nblocks: usize) -> Self {
        let nblocks = nblocks.clamp(1, samples.len().max(1));
        let mut blocks = vec![vec![0.0; grid.len()]; nblocks];
        let mut totals = vec![0.0; nblocks];
        for (i, &(s, w)) in samples.iter().enumerate() {
            let b = i * nblocks / samples.len();
            totals[b] += w;
            let above = grid.partition_point(|&a| a <= s);
            for v in &mut blocks[b][..above] {
                *v += w;
            }
        }
        Self { grid, blocks, totals }
    }

    fn survival(&self, pick: &[usize]) -> Vec<f64> {
        let tot: f64 = pick.iter().map(|&b| self.totals[b]).sum();
        (0..self.grid.len()).map(|i| pick.iter().map(|&b| self.blocks[b][i]).sum::<f64>() / tot).collect()
    }
}

/// Least-squares slope of `ln P(s >= A)` against `ln A` over `[lo, hi]`.
fn fit_slope(grid: &[f64], surv: &[f64], lo: f64, hi: f64) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(surv)
        .filter(|(a, p)| **a >= lo && **a <= hi && **p > 0.0)
        .map(|(a, p)| (a.ln(), p.ln()))
        .unzip();
    if x.len() < 2 {
        return f64::NAN;
    }
    least_squares(&x, &y).slope
}

/// Log-log tail slope with a block-bootstrap interval.
pub fn tail_slope(samples: &[(f64, f64)], opts: &TailOptions) -> (f64, (f64, f64)) {
    let grid = log_grid(opts.fit_min, opts.fit_max, opts.grid_points);
    let bt = BinnedTail::new(samples, grid, opts.bootstrap_blocks);
    let all: Vec<usize> = (0..bt.blocks.len()).collect();
    let slope = fit_slope(&bt.grid, &bt.survival(&all), opts.fit_min, opts.fit_max);
    (slope, bootstrap_slope(&bt, opts))
}

fn bootstrap_slope(bt: &BinnedTail, opts: &TailOptions) -> (f64, f64) {
    let mut r = rng::stream(opts.seed, rng::tag::BOOTSTRAP);
    let nb = bt.blocks.len();
    let mut pick = vec![0; nb];
    let mut slopes: Vec<f64> = (0..opts.bootstrap_resamples)
        .map(|_| {
            for p in pick.iter_mut() {
                *p = r.random_range(0..nb);
            }
            fit_slope(&bt.grid, &bt.survival(&pick), opts.fit_min, opts.fit_max)
        })
        .filter(|s| s.is_finite())
        .collect();
    if slopes.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    slopes = sorted(&slopes);
    (quantile_sorted(&slopes, 0.025), quantile_sorted(&slopes, 0.975))
}

/// Checks the two-sided envelope `D·A^{-κ_j}·exp(±5(N+2ᾱ)/A)` for the
/// filtered samples and fits the tail slope.
pub fn conditional_tail_test(
    filter: &ConfigFilter,
    samples: &[StrengthSample],
    kappa_j: f64,
    alpha_bar: f64,
    opts: &TailOptions,
) -> Result<TailReport> {
    let chosen: Vec<&StrengthSample> = samples.iter().filter(|s| filter.matches(&s.config)).collect();
    if chosen.len() < opts.min_samples.max(1) {
        return Err(Error::StatisticalPower(format!(
            "{} samples match {filter:?}, need {}",
            chosen.len(),
            opts.min_samples
        )));
    }
    let n_max = chosen.iter().map(|s| s.config.n()).max().unwrap_or(0) as f64;
    let pairs: Vec<(f64, f64)> = chosen.iter().map(|s| (s.strength, s.weight)).collect();
    let wsum: f64 = pairs.iter().map(|p| p.1).sum();
    let w2: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let ess = wsum * wsum / w2;

    let grid = log_grid(opts.a_min, opts.a_max, opts.grid_points);
    let bt = BinnedTail::new(&pairs, grid.clone(), opts.bootstrap_blocks);
    let all: Vec<usize> = (0..bt.blocks.len()).collect();
    let surv = bt.survival(&all);
    let slope = fit_slope(&grid, &surv, opts.fit_min, opts.fit_max);
    let slope_ci = bootstrap_slope(&bt, opts);

    let width = |a: f64| 5.0 * (n_max + 2.0 * alpha_bar) / a;
    let centred: Vec<f64> = grid
        .iter()
        .zip(&surv)
        .filter(|(a, p)| **a >= opts.envelope_from && **p > 0.0)
        .map(|(a, p)| p.ln() + kappa_j * a.ln())
        .collect();
    let ln_d = if centred.is_empty() { f64::NAN } else { quantile_sorted(&sorted(&centred), 0.5) };

    let mut points = Vec::with_capacity(grid.len());
    let (mut checked, mut violations) = (0, 0);
    for (&a, &p) in grid.iter().zip(&surv) {
        let log_se = if p > 0.0 { ((1.0 - p) / (ess * p)).sqrt() } else { f64::INFINITY };
        let centre = ln_d - kappa_j * a.ln();
        let (lower, upper) = ((centre - width(a)).exp(), (centre + width(a)).exp());
        let mut violated = false;
        if a >= opts.envelope_from {
            checked += 1;
            let lp = p.ln();
            violated = !(lp + 3.0 * log_se >= lower.ln() && lp - 3.0 * log_se <= upper.ln());
            violations += usize::from(violated);
        }
        points.push(TailPoint { a, p, log_se, lower, upper, violated });
    }
    Ok(TailReport {
        samples: chosen.len(),
        effective_samples: ess,
        slope,
        slope_ci,
        fitted_d: ln_d.exp(),
        grid: points,
        envelope_points: checked,
        envelope_violations: violations,
        violation_fraction: if checked == 0 { 0.0 } else { violations as f64 / checked as f64 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitOptions {
    pub gammas: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub min_samples: usize,
    /// Allowed factor between validation ratio and fitted bound.
    pub slack: f64,
}

impl Default for VisitOptions {
    fn default() -> Self {
        Self { gammas: vec![0.5, 1.0], thresholds: vec![5.0, 10.0, 20.0], min_samples: 200, slack: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitCell {
    pub gamma: f64,
    pub a: f64,
    pub ratio_train: f64,
    pub ratio_validation: f64,
    pub fitted_c: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitReport {
    pub samples: usize,
    pub marginal_slope: f64,
    pub marginal_slope_ci: (f64, f64),
    pub cells: Vec<VisitCell>,
    pub pass: bool,
}

fn ratio(samples: &[(f64, u32)], gamma: f64, a: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(s, n) in samples {
        let w = (n as f64).powf(gamma);
        den += w;
        if s >= a {
            num += w;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Split-sample check of `E(N^γ 1{s >= A}) <= C·A^{-κ_j}·E(N^γ)`.
///
/// `C` is fitted on the even-indexed half and the bound, relaxed by
/// `opts.slack`, is checked on the odd-indexed half.
pub fn strength_vs_visits_test(samples: &[(f64, u32)], kappa_j: f64, opts: &VisitOptions) -> Result<VisitReport> {
    if samples.len() < opts.min_samples {
        return Err(Error::StatisticalPower(format!(
            "{} trap records, need {}",
            samples.len(),
            opts.min_samples
        )));
    }
    let train: Vec<(f64, u32)> = samples.iter().step_by(2).copied().collect();
    let val: Vec<(f64, u32)> = samples.iter().skip(1).step_by(2).copied().collect();
    let mut cells = Vec::new();
    for &g in &opts.gammas {
        let c = opts
            .thresholds
            .iter()
            .map(|&a| ratio(&train, g, a) * a.powf(kappa_j))
            .fold(0.0, f64::max);
        for &a in &opts.thresholds {
            let rv = ratio(&val, g, a);
            let bound = opts.slack * c * a.powf(-kappa_j);
            cells.push(VisitCell {
                gamma: g,
                a,
                ratio_train: ratio(&train, g, a),
                ratio_validation: rv,
                fitted_c: c,
                bound,
                pass: rv <= bound,
            });
        }
    }
    let pairs: Vec<(f64, f64)> = samples.iter().map(|&(s, _)| (s, 1.0)).collect();
    let (marginal_slope, marginal_slope_ci) = tail_slope(&pairs, &TailOptions::default());
    let pass = cells.iter().all(|c| c.pass);
    Ok(VisitReport { samples: samples.len(), marginal_slope, marginal_slope_ci, cells, pass })
}
