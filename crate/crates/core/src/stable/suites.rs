//! Monte Carlo checks of the auxiliary inequalities.
//!
//! | suite id                  | statement checked                                               |
//! |---------------------------|-----------------------------------------------------------------|
//! | `geometric_sum_variance`  | `Var(Z^γ) ≤ C N^{2γ-1}` for geometric sums of exponentials      |
//! | `geometric_phi_moment`    | `½(1/p)φ(1/p) ≤ E Φ(1+X) ≤ C_φ (1/p)φ(1/p)` for geometric `X`   |
//! | `power_variance`          | `Var(X^γ) ≤ 2a^{2γ} Var(X)/a²` when `Var(X) ≤ a²`               |
//! | `window_increment`        | a stable subordinator grows by `δ` on every `ε`-window of `[0,A]` |
//! | `inverse_continuity`      | uniformly close step functions with growth have close inverses  |

use rand::distr::{Distribution, OpenClosed01};
use rand::Rng;
use rand_distr::{Gamma, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cadlag::CadlagStep;
use super::majorant::{build_concave_majorant, ConcaveMajorant};
use super::sampler::{sample_unit_stable, SubordinatorPath};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::stats::{mean, quantile_sorted, sorted, std_err, variance, variance_std_err};

pub const GEOMETRIC_SUM_VARIANCE: &str = "geometric_sum_variance";
pub const GEOMETRIC_PHI_MOMENT: &str = "geometric_phi_moment";
pub const POWER_VARIANCE: &str = "power_variance";
pub const WINDOW_INCREMENT: &str = "window_increment";
pub const INVERSE_CONTINUITY: &str = "inverse_continuity";

/// Suites run by [`moment_suite`].
pub const MOMENT_SUITES: [&str; 4] = [GEOMETRIC_SUM_VARIANCE, GEOMETRIC_PHI_MOMENT, POWER_VARIANCE, WINDOW_INCREMENT];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `lhs ≤ rhs`.
    Pass,
    /// `rhs < lhs ≤ rhs + band`: violated only within Monte Carlo error.
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn judge(lhs: f64, rhs: f64, band: f64) -> Self {
        if !(lhs.is_finite() && rhs.is_finite() && band.is_finite()) {
            Verdict::Inconclusive
        } else if lhs <= rhs {
            Verdict::Pass
        } else if lhs <= rhs + band {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        }
    }
}

/// One checked inequality `lhs ≤ rhs` with its Monte Carlo band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub suite: String,
    pub cell: String,
    pub lhs: f64,
    pub rhs: f64,
    pub band: f64,
    pub verdict: Verdict,
}

impl SuiteCell {
    fn new(suite: &str, cell: String, lhs: f64, rhs: f64, band: f64) -> Self {
        Self { suite: suite.into(), cell, lhs, rhs, band, verdict: Verdict::judge(lhs, rhs, band) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub cells: Vec<SuiteCell>,
}

impl SuiteReport {
    /// No cell fails outside its Monte Carlo band.
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn inconclusive(&self) -> impl Iterator<Item = &SuiteCell> {
        self.cells.iter().filter(|c| c.verdict == Verdict::Inconclusive)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteCell> {
        self.cells.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn merge(mut self, other: SuiteReport) -> Self {
        self.cells.extend(other.cells);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }
}

/// Grids and sample sizes of the moment suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Monte Carlo band in standard errors.
    pub sigmas: f64,
    pub replications: usize,
    pub sum_h: Vec<f64>,
    pub sum_n: Vec<usize>,
    pub sum_gamma: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_constant: f64,
    pub power_gamma: Vec<f64>,
    pub window_kappa: Vec<f64>,
    pub window_eps: Vec<f64>,
    pub window_b: Vec<f64>,
    pub window_paths: usize,
    pub inverse_pairs: usize,
}

impl SuiteConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            sigmas: 3.0,
            replications: 100_000,
            sum_h: vec![0.3, 0.5, 0.9],
            sum_n: vec![1, 10, 100],
            sum_gamma: vec![0.3, 0.7, 1.0],
            phi_p: vec![0.01, 0.1, 0.5, 0.9],
            phi_constant: 16.0,
            power_gamma: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            window_kappa: vec![0.6, 0.9],
            window_eps: vec![0.1, 0.05],
            window_b: vec![1.0, 10.0],
            window_paths: 4_000,
            inverse_pairs: 1_000,
        }
    }
}

fn cell_rng(seed: u64, suite: u64, cell: u64) -> StreamRng {
    rng::stream(rng::derive(seed, &[rng::tag::SUITE, suite]), cell)
}

fn exp1<R: Rng + ?Sized>(r: &mut R) -> f64 {
    -r.sample::<f64, _>(OpenClosed01).ln()
}

/// `Z = (p/q) Σ_{i ≤ N} Σ_{j ≤ ε_i + H_i} E_{ij}` with `E_{ij} ~ Exp(p)`,
/// `ε_i = i mod 2` and `P(H = k) = (1 - h) h^k`; the inner sums are drawn as
/// `Gamma(K, 1) / q`.
pub fn sample_geometric_sum<R: Rng + ?Sized>(n: usize, h: f64, q: f64, r: &mut R) -> f64 {
    let geo = Geometric::new(1.0 - h).expect("h in (0, 1)");
    let k: u64 = (1..=n).map(|i| (i % 2) as u64 + geo.sample(r)).sum();
    match k {
        0 => 0.0,
        k => Gamma::new(k as f64, 1.0).expect("positive shape").sample(r) / q,
    }
}

/// Variance bound for geometric sums: `C` is fitted as the largest
/// `(Var + σ·se) / N^{2γ-1}` on the even replications and every cell is
/// checked on the odd ones.
pub fn geometric_sum_variance(cfg: &SuiteConfig) -> SuiteReport {
    let mut grid = Vec::new();
    for &h in &cfg.sum_h {
        for &n in &cfg.sum_n {
            grid.push((h, n));
        }
    }
    let draws: Vec<Vec<f64>> = grid
        .par_iter()
        .enumerate()
        .map(|(c, &(h, n))| {
            let mut r = cell_rng(cfg.seed, 1, c as u64);
            let q = 0.75 / (1.0 - h);
            (0..cfg.replications).map(|_| sample_geometric_sum(n, h, q, &mut r)).collect()
        })
        .collect();
    let split = |z: &[f64], g: f64, parity: usize| -> Vec<f64> {
        z.iter().skip(parity).step_by(2).map(|v| v.powf(g)).collect()
    };
    let mut c_fit: f64 = 0.0;
    for (z, &(_, n)) in draws.iter().zip(&grid) {
        for &g in &cfg.sum_gamma {
            let train = split(z, g, 0);
            let bound = (variance(&train) + cfg.sigmas * variance_std_err(&train)) / (n as f64).powf(2.0 * g - 1.0);
            c_fit = c_fit.max(bound);
        }
    }
    let mut cells = Vec::new();
    for (z, &(h, n)) in draws.iter().zip(&grid) {
        for &g in &cfg.sum_gamma {
            let val = split(z, g, 1);
            cells.push(SuiteCell::new(
                GEOMETRIC_SUM_VARIANCE,
                format!("h={h},N={n},gamma={g},C={c_fit:.4}"),
                variance(&val),
                c_fit * (n as f64).powf(2.0 * g - 1.0),
                cfg.sigmas * variance_std_err(&val),
            ));
        }
    }
    SuiteReport { seed: cfg.seed, cells }
}

/// Concave test functions for the geometric moment check.
pub enum TestPhi {
    Constant,
    Sqrt,
    Majorant(Box<ConcaveMajorant>),
}

impl TestPhi {
    fn name(&self) -> &'static str {
        match self {
            TestPhi::Constant => "phi=1",
            TestPhi::Sqrt => "phi=1+sqrt",
            TestPhi::Majorant(_) => "phi=majorant",
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self {
            TestPhi::Constant => 1.0,
            TestPhi::Sqrt => 1.0 + x.max(0.0).sqrt(),
            TestPhi::Majorant(m) => m.phi(x),
        }
    }

    pub fn big_phi(&self, x: f64) -> f64 {
        match self {
            TestPhi::Constant => x,
            TestPhi::Sqrt => x + 2.0 / 3.0 * x.max(0.0).powf(1.5),
            TestPhi::Majorant(m) => m.big_phi(x),
        }
    }
}

/// Majorant built from a Pareto pool with index 1.5.
pub fn pareto_majorant(seed: u64, n: usize) -> Result<ConcaveMajorant> {
    let mut r = cell_rng(seed, 2, u64::MAX);
    let pool: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(OpenClosed01).powf(-1.0 / 1.5)).collect();
    build_concave_majorant(&pool)
}

/// Four-link chain `½Φ(1/p) ≤ ½(1/p)φ(1/p) ≤ E Φ(1+X) ≤ C_φ(1/p)φ(1/p) ≤ 2C_φΦ(1/p)`.
pub fn geometric_phi_moment(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let phis = [TestPhi::Constant, TestPhi::Majorant(Box::new(pareto_majorant(cfg.seed, 200_000)?)), TestPhi::Sqrt];
    let mut cells = Vec::new();
    for (a, phi) in phis.iter().enumerate() {
        for (b, &p) in cfg.phi_p.iter().enumerate() {
            let mut r = cell_rng(cfg.seed, 2, (a * 64 + b) as u64);
            let geo = Geometric::new(p).map_err(|e| Error::Parameter(e.to_string()))?;
            let v: Vec<f64> = (0..cfg.replications).map(|_| phi.big_phi(1.0 + geo.sample(&mut r) as f64)).collect();
            let (m, se) = (mean(&v), std_err(&v));
            let x = 1.0 / p;
            let half_big = 0.5 * phi.big_phi(x);
            let half_lin = 0.5 * x * phi.phi(x);
            let upper = cfg.phi_constant * x * phi.phi(x);
            let name = |link: &str| format!("{},p={p},{link}", phi.name());
            cells.push(SuiteCell::new(GEOMETRIC_PHI_MOMENT, name("half_integral<=half_product"), half_big, half_lin, 1e-12 * half_lin));
            cells.push(SuiteCell::new(GEOMETRIC_PHI_MOMENT, name("half_product<=moment"), half_lin, m, cfg.sigmas * se));
            cells.push(SuiteCell::new(GEOMETRIC_PHI_MOMENT, name("moment<=upper"), m, upper, cfg.sigmas * se));
            cells.push(SuiteCell::new(
                GEOMETRIC_PHI_MOMENT,
                name("upper<=twice_integral"),
                upper,
                2.0 * cfg.phi_constant * phi.big_phi(x),
                1e-12 * upper,
            ));
        }
    }
    Ok(SuiteReport { seed: cfg.seed, cells })
}

/// Test laws with their exact mean and variance.
#[derive(Clone, Copy, Debug)]
pub enum PowerLaw {
    Gamma(f64),
    Uniform,
}

impl PowerLaw {
    fn name(&self) -> String {
        match self {
            PowerLaw::Gamma(k) => format!("gamma({k})"),
            PowerLaw::Uniform => "uniform(0,1)".into(),
        }
    }

    fn moments(&self) -> (f64, f64) {
        match *self {
            PowerLaw::Gamma(k) => (k, k),
            PowerLaw::Uniform => (0.5, 1.0 / 12.0),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, r: &mut R) -> f64 {
        match *self {
            PowerLaw::Gamma(k) => Gamma::new(k, 1.0).expect("positive shape").sample(r),
            PowerLaw::Uniform => r.sample::<f64, _>(OpenClosed01),
        }
    }
}

pub fn power_variance(cfg: &SuiteConfig) -> SuiteReport {
    let laws = [PowerLaw::Gamma(1.0), PowerLaw::Gamma(2.0), PowerLaw::Gamma(10.0), PowerLaw::Uniform];
    let mut cells = Vec::new();
    for (a, law) in laws.iter().enumerate() {
        let (m, var) = law.moments();
        debug_assert!(var <= m * m);
        let mut r = cell_rng(cfg.seed, 3, a as u64);
        let x: Vec<f64> = (0..cfg.replications).map(|_| law.sample(&mut r)).collect();
        for &g in &cfg.power_gamma {
            let y: Vec<f64> = x.iter().map(|v| v.powf(g)).collect();
            cells.push(SuiteCell::new(
                POWER_VARIANCE,
                format!("{},gamma={g}", law.name()),
                variance(&y),
                2.0 * m.powf(2.0 * g) * var / (m * m),
                cfg.sigmas * variance_std_err(&y),
            ));
        }
    }
    SuiteReport { seed: cfg.seed, cells }
}

/// Smallest increment of `path` over windows of `width` grid steps starting
/// at grid indices `≤ last_start`.
fn min_window(path: &SubordinatorPath, width: usize, last_start: usize) -> f64 {
    (0..=last_start.min(path.steps().saturating_sub(width)))
        .map(|i| path.values[i + width] - path.values[i])
        .fold(f64::INFINITY, f64::min)
}

/// Constructive choice of `A` and `δ`: `A = (B / q)^κ` rounded up to the
/// `ε/8` grid, with `q` the `ε/2`-quantile of `S_1`, and `δ` the `ε`-quantile of the smallest
/// increment over cells of length `ε/2` covering `[0, A]`, both on training
/// draws. Fresh draws then check `P(S(A) ≥ B) ≥ 1 - ε` and that the chance of
/// an `ε`-window starting before `A - ε` (on a grid of step `ε/8`) growing by
/// less than `δ` is at most `ε`.
pub fn window_increment(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut grid = Vec::new();
    for &k in &cfg.window_kappa {
        for &e in &cfg.window_eps {
            for &b in &cfg.window_b {
                grid.push((k, e, b));
            }
        }
    }
    let rows: Vec<Result<Vec<SuiteCell>>> = grid
        .par_iter()
        .enumerate()
        .map(|(c, &(kappa, eps, b))| {
            let mut r = cell_rng(cfg.seed, 4, c as u64);
            let n = cfg.window_paths;
            let s1 = sorted(&(0..n).map(|_| sample_unit_stable(kappa, &mut r)).collect::<Result<Vec<_>>>()?);
            let step = eps / 8.0;
            let a = ((b / quantile_sorted(&s1, eps / 2.0)).powf(kappa) / step).ceil() * step;
            let cells = (2.0 * a / eps).ceil() as usize;
            let train: Vec<f64> = (0..n)
                .map(|_| SubordinatorPath::sample(kappa, eps / 2.0, cells, &mut r).map(|p| min_window(&p, 1, cells)))
                .collect::<Result<_>>()?;
            let delta = quantile_sorted(&sorted(&train), eps);
            let fine = 4 * cells;
            let last_start = (((a - eps) / step).floor().max(0.0)) as usize;
            let mut reach = Vec::with_capacity(n);
            let mut stall = Vec::with_capacity(n);
            for _ in 0..n {
                let p = SubordinatorPath::sample(kappa, step, fine, &mut r)?;
                let end = p.values[(a / step).round() as usize];
                reach.push(if end >= b { 0.0 } else { 1.0 });
                stall.push(if min_window(&p, 8, last_start) < delta { 1.0 } else { 0.0 });
            }
            let tag = format!("kappa={kappa},eps={eps},B={b},A={a:.4},delta={delta:.4e}");
            let band = |x: &[f64]| cfg.sigmas * (eps * (1.0 - eps) / x.len() as f64).sqrt();
            Ok(vec![
                SuiteCell::new(WINDOW_INCREMENT, format!("{tag},P(S(A)<B)"), mean(&reach), eps, band(&reach)),
                SuiteCell::new(WINDOW_INCREMENT, format!("{tag},P(stall)"), mean(&stall), eps, band(&stall)),
            ])
        })
        .collect();
    let mut cells = Vec::new();
    for row in rows {
        cells.extend(row?);
    }
    Ok(SuiteReport { seed: cfg.seed, cells })
}

/// A pair of step functions meeting the closeness and growth hypotheses.
#[derive(Clone, Debug)]
pub struct InversePair {
    pub f: CadlagStep,
    pub g: CadlagStep,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub delta: f64,
}

/// `g` jumps by at least `δ` every `h < ε`, so `g(t + ε) ≥ g(t) + δ`; `f` is
/// the running maximum of `g` plus noise in `[-δ/2, δ/2]` sampled on a finer
/// set of breakpoints that contains every jump of `g`, so `|f - g| ≤ δ/2`.
pub fn sample_inverse_pair<R: Rng + ?Sized>(r: &mut R) -> InversePair {
    let eps = r.random_range(0.05..0.5);
    let h = eps * r.random_range(0.2..0.95);
    let delta = r.random_range(0.1..2.0);
    let a = r.random_range(1.0..10.0);
    let span = a + 2.0 * eps + h;
    let mut g_loc = Vec::new();
    let mut g_val = Vec::new();
    let mut v = 0.0;
    let mut t = h * r.random_range(0.05..1.0);
    while t <= span {
        v += delta * (1.0 + exp1(r));
        g_loc.push(t);
        g_val.push(v);
        t += h;
    }
    let g = CadlagStep::new(g_loc.clone(), g_val).expect("valid construction");
    let mut f_loc = g_loc;
    let extra = r.random_range(0..4 * f_loc.len());
    f_loc.extend((0..extra).map(|_| r.random_range(f64::MIN_POSITIVE..span)));
    f_loc.sort_by(f64::total_cmp);
    f_loc.dedup();
    let mut f_val = Vec::with_capacity(f_loc.len());
    let mut run: f64 = 0.0;
    for &s in &f_loc {
        let c = g.eval(s) + delta * r.random_range(-0.5..=0.5);
        run = run.max(c);
        f_val.push(run);
    }
    let f = CadlagStep::new(f_loc, f_val).expect("valid construction");
    let b = f.eval(a).min(g.eval(a));
    InversePair { f, g, a, b, eps, delta }
}

/// Exact `sup_{t ∈ [0, B]} |f^{-1}(t) - g^{-1}(t)|`: both inverses are
/// constant between consecutive jump values, so checking every jump value
/// and the midpoints between them covers all pieces.
pub fn inverse_gap(f: &CadlagStep, g: &CadlagStep, b: f64) -> f64 {
    let mut probes: Vec<f64> =
        f.values().iter().chain(g.values()).copied().filter(|&v| v > 0.0 && v <= b).chain([b]).collect();
    probes.sort_by(f64::total_cmp);
    probes.dedup();
    let mids: Vec<f64> = std::iter::once(probes[0] / 2.0).chain(probes.windows(2).map(|w| 0.5 * (w[0] + w[1]))).collect();
    probes.into_iter().chain(mids).map(|t| (f.invert(t) - g.invert(t)).abs()).fold(0.0, f64::max)
}

/// Hypothesis check of a generated pair, evaluated at every breakpoint.
pub fn pair_meets_hypotheses(p: &InversePair) -> bool {
    let mut pts: Vec<f64> = p.f.locations().iter().chain(p.g.locations()).copied().collect();
    pts.push(0.0);
    let close = pts.iter().filter(|&&s| s <= p.a + 2.0 * p.eps).all(|&s| (p.f.eval(s) - p.g.eval(s)).abs() <= p.delta / 2.0);
    // g(t + ε) - g(t) is smallest just before t + ε crosses a jump, i.e. at t
    // equal to a jump location or at 0.
    let growth = std::iter::once(0.0)
        .chain(p.g.locations().iter().copied())
        .filter(|&t| t <= p.a + p.eps)
        .all(|t| p.g.eval(t + p.eps) >= p.g.eval(t) + p.delta);
    close && growth && p.f.eval(p.a) >= p.b && p.g.eval(p.a) >= p.b
}

pub fn inverse_continuity(cfg: &SuiteConfig) -> SuiteReport {
    let mut r = cell_rng(cfg.seed, 5, 0);
    let mut worst = 0.0f64;
    let mut violations = 0usize;
    let mut invalid = 0usize;
    for _ in 0..cfg.inverse_pairs {
        let p = sample_inverse_pair(&mut r);
        if !pair_meets_hypotheses(&p) {
            invalid += 1;
            continue;
        }
        let gap = inverse_gap(&p.f, &p.g, p.b) / p.eps;
        worst = worst.max(gap);
        if gap > 2.0 {
            violations += 1;
        }
    }
    SuiteReport {
        seed: cfg.seed,
        cells: vec![
            SuiteCell::new(INVERSE_CONTINUITY, format!("pairs={},max_gap/eps", cfg.inverse_pairs), worst, 2.0, 0.0),
            SuiteCell::new(INVERSE_CONTINUITY, "violations".into(), violations as f64, 0.0, 0.0),
            SuiteCell::new(INVERSE_CONTINUITY, "invalid_pairs".into(), invalid as f64, 0.0, 0.0),
        ],
    }
}

/// Runs the geometric-sum, geometric-moment, power-variance and
/// window-increment suites.
pub fn moment_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    Ok(geometric_sum_variance(cfg)
        .merge(geometric_phi_moment(cfg)?)
        .merge(power_variance(cfg))
        .merge(window_increment(cfg)?))
}

/// Runs one suite by id, or all of them for `"all"` and the four moment
/// suites for `"moments"`.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        GEOMETRIC_SUM_VARIANCE => Ok(geometric_sum_variance(cfg)),
        GEOMETRIC_PHI_MOMENT => geometric_phi_moment(cfg),
        POWER_VARIANCE => Ok(power_variance(cfg)),
        WINDOW_INCREMENT => window_increment(cfg),
        INVERSE_CONTINUITY => Ok(inverse_continuity(cfg)),
        "moments" => moment_suite(cfg),
        "all" => Ok(moment_suite(cfg)?.merge(inverse_continuity(cfg))),
        other => Err(Error::Parameter(format!("unknown suite {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig { replications: 20_000, window_paths: 1_000, inverse_pairs: 200, ..SuiteConfig::default() }
    }

    #[test]
    fn verdicts() {
        assert_eq!(Verdict::judge(1.0, 2.0, 0.0), Verdict::Pass);
        assert_eq!(Verdict::judge(2.05, 2.0, 0.1), Verdict::Inconclusive);
        assert_eq!(Verdict::judge(2.5, 2.0, 0.1), Verdict::Fail);
        assert_eq!(Verdict::judge(f64::NAN, 2.0, 0.1), Verdict::Inconclusive);
    }

    #[test]
    fn power_variance_at_zero_is_trivial() {
        let rep = power_variance(&small());
        for c in rep.cells.iter().filter(|c| c.cell.ends_with("gamma=0")) {
            assert_eq!(c.lhs, 0.0);
            assert_eq!(c.verdict, Verdict::Pass);
        }
        assert!(rep.passed());
    }

    #[test]
    fn constant_phi_at_half() {
        let cfg = SuiteConfig { phi_p: vec![0.5], ..small() };
        let rep = geometric_phi_moment(&cfg).unwrap();
        let cells: Vec<_> = rep.cells.iter().filter(|c| c.cell.starts_with("phi=1,")).collect();
        assert_eq!(cells.len(), 4);
        // E(1 + X) = 1/p = 2, Φ(x) = x
        assert!((cells[2].lhs - 2.0).abs() < 0.03);
        assert_eq!(cells[0].lhs, 1.0);
        assert_eq!(cells[3].rhs, 2.0 * 16.0 * 2.0);
        assert!(rep.passed());
    }

    #[test]
    fn geometric_sum_mean() {
        let mut r = rng::stream(9, rng::tag::ORACLE);
        let (n, h) = (10, 0.5);
        let q = 0.75 / (1.0 - h);
        let z: Vec<f64> = (0..100_000).map(|_| sample_geometric_sum(n, h, q, &mut r)).collect();
        // E Z = (Σ ε_i + N h / (1 - h)) / q
        let expected = (5.0 + n as f64 * h / (1.0 - h)) / q;
        assert!((mean(&z) - expected).abs() < 3.0 * std_err(&z));
    }

    #[test]
    fn inverse_pairs_are_valid_and_close() {
        let mut r = rng::stream(10, rng::tag::ORACLE);
        for _ in 0..200 {
            let p = sample_inverse_pair(&mut r);
            assert!(pair_meets_hypotheses(&p));
            assert!(inverse_gap(&p.f, &p.g, p.b) <= 2.0 * p.eps);
        }
        let rep = inverse_continuity(&small());
        assert!(rep.cells.iter().all(|c| c.verdict == Verdict::Pass), "{rep:?}");
    }

    #[test]
    fn inverse_gap_detects_separation() {
        let g = CadlagStep::new(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let f = CadlagStep::new(vec![1.5, 2.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(inverse_gap(&f, &g, 2.0), 0.5);
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &small()).is_err());
    }
}
