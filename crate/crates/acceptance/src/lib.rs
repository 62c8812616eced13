//! Acceptance criteria, one function per criterion.
//!
//! Each function runs at full size and returns an [`Outcome`]; the
//! `acceptance` test target prints one line per criterion.

use std::fs;

use rand::Rng;
use rwde_core::accel::{contract_region, contract_to_finite, gamma_finite, gamma_lattice, gamma_lattice_in, RegionShape};
use rwde_core::env::{compute_exponents, AlphaParams, DirichletEnvironment, Environment, FixedEnvironment, SiteDistribution};
use rwde_core::experiments::{dispatch, run_config, write_output, ExperimentConfig, ExperimentReport, Status};
use rwde_core::rng;
use rwde_core::stable::suites::{pareto_majorant, run_suite, SuiteConfig, Verdict, INVERSE_CONTINUITY};
use rwde_core::stable::{sample_stable_increment, sample_unit_stable, stable_cf};
use rwde_core::stats::{kolmogorov_survival, ks_discrete, ks_two_sample, lag1_autocorrelation};
use rwde_core::traps::{trap_visit_stats, TrapIndex};
use rwde_core::walk::{brute_force_renewals, detect_renewals_with, run_replicas, ConfirmPolicy, ReplicaConfig, Trajectory, Walker};
use rwde_core::Site;

/// Criteria expected to fail at desk scale, with the reason.
pub const EXPECTED_FAILURES: &[(u8, &str)] =
    &[(8, "the symmetric preset has zero drift, so the walk has no renewal times to measure")];

pub const K06: [f64; 6] = [0.15, 0.05, 0.05, 0.05, 0.05, 0.05];
pub const K1_SYMMETRIC: [f64; 6] = [0.1; 6];
pub const K1_DRIFTED: [f64; 6] = [0.15, 0.1, 0.1, 0.05, 0.1, 0.1];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub pass: bool,
    pub summary: String,
}

impl Outcome {
    fn new(id: u8, pass: bool, summary: impl Into<String>) -> Self {
        Self { id, pass, summary: summary.into() }
    }

    pub fn expected_failure(&self) -> Option<&'static str> {
        EXPECTED_FAILURES.iter().find(|(id, _)| *id == self.id).map(|(_, why)| *why)
    }
}

fn config(weights: &[f64], replicas: usize, horizon: u64, experiment: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        "d = {}\nweights = {weights:?}\nseed = 2024\nreplicas = {replicas}\nhorizon = {horizon}\nexperiments = [\"{experiment}\"]\n",
        weights.len() / 2
    ))
    .expect("acceptance config is valid")
}

fn check(r: &ExperimentReport, name: &str) -> Option<(bool, f64)> {
    r.get_check(name).map(|c| (c.status != Status::Fail, c.value))
}

fn estimate(r: &ExperimentReport, name: &str) -> f64 {
    r.get_estimate(name).map_or(f64::NAN, |e| e.value)
}

/// Exponent arithmetic on the two presets.
pub fn criterion_1() -> Outcome {
    let sym = compute_exponents(&AlphaParams::symmetric(3, 0.1).unwrap()).kappa;
    let k06 = compute_exponents(&AlphaParams::new(3, K06.to_vec()).unwrap()).kappa;
    let pass = (sym - 1.0).abs() < 1e-12 && (k06 - 0.6).abs() < 1e-12;
    Outcome::new(1, pass, format!("kappa(symmetric 0.1) = {sym:.15}, kappa(0.15, 0.05x5) = {k06:.15}"))
}

/// Oracle and observed trap-strength tails for the κ = 0.6 preset.
pub fn criterion_2() -> Outcome {
    let mut cfg = config(&K06, 8, 10_000_000, "trap_tails");
    cfg.thresholds.oracle_samples = 1_000_000;
    let r = match dispatch("trap_tails", &cfg) {
        Ok(o) => o.report,
        Err(e) => return Outcome::new(2, false, e.to_string()),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for axis in 1..=3 {
        let oracle = check(&r, &format!("oracle_slope_{axis}"));
        let observed = check(&r, &format!("observed_matches_oracle_{axis}"));
        pass &= oracle.is_some_and(|c| c.0) && observed.is_some_and(|c| c.0);
        parts.push(format!(
            "axis {axis}: kappa_j {:.2}, oracle {:.3}, observed {:.3}{}",
            estimate(&r, &format!("kappa_{axis}")),
            estimate(&r, &format!("oracle_slope_{axis}")),
            estimate(&r, &format!("observed_slope_{axis}")),
            if observed.is_some_and(|c| c.0) { "" } else { " (CI disjoint or missing)" }
        ));
    }
    Outcome::new(2, pass, parts.join("; "))
}

/// Full 3-d boxes checked by plain recursion; each takes seconds.
const NAIVE_FULL_BOX: u64 = 2;

/// Weight of self-avoiding paths from `x` that leave the region, by plain recursion.
fn naive_exit_weight(env: &DirichletEnvironment, x: &Site, m: usize, shape: RegionShape) -> f64 {
    fn go(env: &DirichletEnvironment, x: &Site, at: Site, m: usize, shape: RegionShape, path: &mut Vec<Site>) -> f64 {
        let d = env.dim();
        let law = env.site(&at);
        let mut total = 0.0;
        for dir in 0..2 * d {
            let next = at.step(dir, d);
            let mut off = next;
            for i in 0..d {
                off.0[i] -= x.0[i];
            }
            if !shape.is_interior(&off, m) {
                total += law.prob(dir);
            } else if !path.contains(&next) {
                path.push(next);
                total += law.prob(dir) * go(env, x, next, m, shape, path);
                path.pop();
            }
        }
        total
    }
    go(env, x, *x, m, shape, &mut vec![*x])
}

fn random_weights(r: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..2 * d).map(|_| 0.05 + r.random::<f64>()).collect()
}

/// `γ^m` by lattice enumeration against the contracted finite graph.
pub fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut naive_worst: f64 = 0.0;
    let mut naive_checked = 0;
    let mut m1_worst: f64 = 0.0;
    let mut failures = Vec::new();
    for d in [2usize, 3] {
        for i in 0..100u64 {
            let mut r = rng::stream(rng::derive(3, &[d as u64, i]), 0);
            let env = DirichletEnvironment::new(AlphaParams::new(d, random_weights(&mut r, d)).unwrap(), r.random());
            let x = Site::from_coords(&[r.random_range(-50..50), r.random_range(-50..50), r.random_range(-50..50)][..d]);
            for m in 1..=2 {
                let pairs = [
                    (RegionShape::L1Ball, gamma_lattice_in(&env, &x, m, RegionShape::L1Ball), contract_to_finite(&env, &x, m)),
                    (RegionShape::SupBox, gamma_lattice(&env, &x, m), contract_region(&env, &x, m, RegionShape::SupBox)),
                ];
                for (shape, lattice, g) in pairs {
                    let interior: Vec<usize> = (0..g.len() - 1).collect();
                    match (lattice, gamma_finite(&g, g.vertex_of(&x).unwrap(), &interior)) {
                        (Ok(a), Ok(b)) => {
                            worst = worst.max((a - b).abs() / a.abs().max(1.0));
                            if !(d == 3 && m == 2 && shape == RegionShape::SupBox) || i < NAIVE_FULL_BOX {
                                let naive = 1.0 / naive_exit_weight(&env, &x, m, shape);
                                naive_worst = naive_worst.max((a - naive).abs() / a.abs().max(1.0));
                                naive_checked += 1;
                            }
                        }
                        (a, b) => failures.push(format!("d={d} env {i} m={m}: {a:?} / {b:?}")),
                    }
                }
                if m == 1 {
                    m1_worst = m1_worst.max((gamma_lattice(&env, &x, 1).unwrap() - 1.0).abs());
                }
            }
        }
    }
    let pass = failures.is_empty() && worst <= 1e-12 && naive_worst <= 1e-12 && m1_worst <= 1e-15;
    Outcome::new(
        3,
        pass,
        format!(
            "800 region pairs over 100 environments x d in {{2,3}} x m in {{1,2}} x both shapes: max relative gap {worst:.2e} (against plain path recursion on {naive_checked} regions {naive_worst:.2e}), max |gamma^1 - 1| {m1_worst:.2e}{}",
            if failures.is_empty() { String::new() } else { format!(", errors: {}", failures.join("; ")) }
        ),
    )
}

/// Renewal detection against brute force, and slab independence.
pub fn criterion_4() -> Outcome {
    let policy = ConfirmPolicy { k_discard: 0, safety_band: 0 };
    let mut mismatches = 0;
    let mut r = rng::stream(4, 0);
    for _ in 0..10_000 {
        let d = r.random_range(1..=3);
        let len = r.random_range(0..=200);
        let dirs: Vec<u8> = (0..len).map(|_| r.random_range(0..2 * d) as u8).collect();
        let t = Trajectory::from_directions(d, dirs).unwrap();
        let levels: Vec<i64> = t.levels().collect();
        if detect_renewals_with(&t, &policy).renewal_indices != brute_force_renewals(&levels) {
            mismatches += 1;
        }
    }
    let seeds: Vec<u64> = (0..100).map(|i| rng::derive(4, &[rng::tag::ENVIRONMENT, i])).collect();
    let alpha = AlphaParams::new(3, K06.to_vec()).unwrap();
    let batch = run_replicas(&seeds, &alpha, &ReplicaConfig::new(100_000_000, 101)).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for w in batch.records.windows(2) {
        if w[0].replica == w[1].replica {
            x.push(w[0].tau_gap as f64);
            y.push(w[1].tau_gap as f64);
        }
    }
    let rho = rwde_core::stats::pearson(&x, &y);
    let pooled_rho = lag1_autocorrelation(&batch.gaps().iter().map(|&g| g as f64).collect::<Vec<_>>());
    let pass = mismatches == 0 && rho.abs() <= 0.05 && batch.records.len() >= 10_000;
    Outcome::new(
        4,
        pass,
        format!(
            "{mismatches} mismatches over 10^4 trajectories; lag-1 correlation {rho:.4} over {} within-replica pairs of {} slabs (pooled series {pooled_rho:.4})",
            x.len(),
            batch.records.len()
        ),
    )
}

/// Bounce counts in a frozen trap against the geometric law.
pub fn criterion_5() -> Outcome {
    let (w_xy, w_yx) = (0.9, 0.8);
    let mut env = FixedEnvironment::new(SiteDistribution::uniform(2));
    let x = Site::ORIGIN;
    env.set_edge(x, 0, w_xy, w_yx);
    let traps = TrapIndex::scan(&env, [x, x.step(0, 2)]).unwrap();
    let q = w_xy * w_yx;
    let (mut bounces, mut records, mut identity_breaks) = (Vec::new(), 0usize, 0usize);
    let mut seed = 0;
    while bounces.len() < 100_000 {
        let mut w = Walker::new(&env, rng::stream(rng::derive(5, &[seed]), rng::tag::WALK));
        let mut t = Trajectory::new(2);
        w.run(2_000, &mut t).unwrap();
        for s in trap_visit_stats(&t, &traps).stats {
            records += 1;
            let h: u64 = s.bounce_counts.iter().map(|&b| b as u64).sum();
            identity_breaks += usize::from(s.occupation != 2 * h + s.delta_p);
            bounces.extend(s.bounce_counts.iter().map(|&b| b as u64));
        }
        seed += 1;
    }
    let ks = ks_discrete(&bounces, |k| 1.0 - q.powi(k as i32 + 1));
    let p = kolmogorov_survival(ks * (bounces.len() as f64).sqrt());
    let pass = p >= 0.001 && identity_breaks == 0;
    Outcome::new(
        5,
        pass,
        format!(
            "{} visits, KS {ks:.5} against Geometric(1 - {q:.3}), p = {p:.3}; identity broken on {identity_breaks} of {records} records",
            bounces.len()
        ),
    )
}

/// Stable sampler self-similarity and characteristic function.
pub fn criterion_6() -> Outcome {
    let n = 100_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for kappa in [0.3, 0.6, 0.9] {
        let mut r = rng::stream(rng::derive(6, &[(kappa * 10.0) as u64]), 0);
        let s2: Vec<f64> = (0..n).map(|_| sample_stable_increment(kappa, 2.0, &mut r).unwrap()).collect();
        let s1: Vec<f64> = (0..n).map(|_| 2f64.powf(1.0 / kappa) * sample_unit_stable(kappa, &mut r).unwrap()).collect();
        let ks = ks_two_sample(&s2, &s1);
        let unit: Vec<f64> = (0..n).map(|_| sample_unit_stable(kappa, &mut r).unwrap()).collect();
        let mut worst_z: f64 = 0.0;
        for lambda in [0.5, 1.0, 2.0] {
            let (re, im) = stable_cf(kappa, 1.0, lambda);
            let (mut sr, mut si, mut sr2, mut si2) = (0.0, 0.0, 0.0, 0.0);
            for &v in &unit {
                let (c, s) = ((lambda * v).cos(), (lambda * v).sin());
                sr += c;
                si += s;
                sr2 += c * c;
                si2 += s * s;
            }
            let nf = n as f64;
            let (mr, mi) = (sr / nf, si / nf);
            let (ser, sei) = (((sr2 / nf - mr * mr) / nf).sqrt(), ((si2 / nf - mi * mi) / nf).sqrt());
            worst_z = worst_z.max(((mr - re) / ser).abs()).max(((mi - im) / sei).abs());
        }
        pass &= ks <= 0.02 && worst_z <= 3.0;
        parts.push(format!("kappa {kappa}: KS {ks:.4}, max CF z {worst_z:.2}"));
    }
    Outcome::new(6, pass, parts.join("; "))
}

/// Slab-gap tail and stable limit of block sums for the κ = 0.6 preset.
pub fn criterion_7() -> Outcome {
    let mut cfg = config(&K06, 200, 100_000_000, "tau_tail");
    cfg.thresholds.min_gaps = 20_000;
    let r = match dispatch("tau_tail", &cfg) {
        Ok(o) => o.report,
        Err(e) => return Outcome::new(7, false, e.to_string()),
    };
    let hill = estimate(&r, "hill");
    let ks = estimate(&r, "ks");
    let pass = (0.45..=0.75).contains(&hill) && ks <= 0.08 && estimate(&r, "gaps") >= 20_000.0;
    Outcome::new(
        7,
        pass,
        format!(
            "{} gaps, Hill {hill:.3}, fitted-scale KS {ks:.4} (exact-Pareto surrogate KS {:.4})",
            estimate(&r, "gaps"),
            estimate(&r, "surrogate_ks")
        ),
    )
}

fn plateau(id: u8, weights: &[f64], replicas: usize, horizon: u64) -> Outcome {
    let cfg = config(weights, replicas, horizon, "tau_log");
    match dispatch("tau_log", &cfg) {
        Ok(o) => {
            let r = o.report;
            let (ok, ratio) = check(&r, "plateau").unwrap_or((false, f64::NAN));
            let flagged = r.get_check("plateau").is_some_and(|c| c.status == Status::Flagged);
            let detail = if flagged { " (single-point excursion, flagged)" } else { "" };
            Outcome::new(id, ok && !flagged, format!("max/min of tau_n/(n ln n) over n = 2^10..2^16: {ratio:.3}{detail}"))
        }
        Err(e) => Outcome::new(id, false, e.to_string()),
    }
}

/// κ = 1 plateau on the symmetric preset, exactly as stated.
pub fn criterion_8() -> Outcome {
    plateau(8, &K1_SYMMETRIC, 8, 10_000_000)
}

/// The same plateau on a κ = 1 preset with nonzero drift.
pub fn supplementary_kappa_one_drifted() -> Outcome {
    plateau(8, &K1_DRIFTED, 16, 100_000_000)
}

/// Inequality suites and the concave majorant construction.
pub fn criterion_9() -> Outcome {
    let cfg = SuiteConfig::default();
    let report = match run_suite("all", &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::new(9, false, e.to_string()),
    };
    let inverse_cell = |name: &str| {
        report.cells.iter().find(|c| c.suite == INVERSE_CONTINUITY && c.cell == name).map_or(f64::NAN, |c| c.lhs)
    };
    let (violations, invalid) = (inverse_cell("violations"), inverse_cell("invalid_pairs"));
    let fails = report.cells.iter().filter(|c| c.verdict == Verdict::Fail).count();
    let inconclusive = report.cells.iter().filter(|c| c.verdict == Verdict::Inconclusive).count();

    let phi = match pareto_majorant(cfg.seed, 200_000) {
        Ok(p) => p,
        Err(e) => return Outcome::new(9, false, e.to_string()),
    };
    let slopes_ok = phi.slopes.iter().all(|&b| b > 0.0) && phi.slopes.windows(2).all(|w| w[1] <= w[0]);
    let a_ok = phi.intercepts.iter().enumerate().all(|(i, &a)| a <= i as f64 + 1.0 + 1e-9);
    let mut r = rng::stream(rng::derive(9, &[rng::tag::ORACLE]), 0);
    let fresh: Vec<f64> = (0..200_000).map(|_| (1.0 - r.random::<f64>()).powf(-1.0 / 1.5)).collect();
    let lhs = fresh.iter().map(|&x| phi.big_phi(x)).sum::<f64>() / fresh.len() as f64;
    // Pareto(1.5) on [1, inf) has mean 3.
    let ex = 3.0;
    let moment_ok = lhs <= 3.0 * ex;
    let pass = fails == 0 && violations == 0.0 && invalid == 0.0 && cfg.inverse_pairs >= 1000 && slopes_ok && a_ok && moment_ok;
    Outcome::new(
        9,
        pass,
        format!(
            "{} suite cells: {fails} fail, {inconclusive} inconclusive; inverse continuity over {} pairs: {violations} violations, {invalid} invalid pairs; majorant b_i > 0 nonincreasing: {slopes_ok}, a_i <= i+1: {a_ok}, E[Phi(X)] = {lhs:.3} vs 3E[X] = {:.3}",
            report.cells.len(),
            cfg.inverse_pairs,
            3.0 * ex
        ),
    )
}

/// Repeated runs of one config give byte-identical outputs.
pub fn criterion_10() -> Outcome {
    let mut cfg = config(&K06, 6, 200_000, "kappa_scaling");
    cfg.experiments = ["kappa_scaling", "tau_tail", "trap_tails", "time_in_traps", "position_law", "acceleration"]
        .map(String::from)
        .to_vec();
    cfg.thresholds.min_gaps = 100;
    cfg.thresholds.oracle_samples = 50_000;
    cfg.thresholds.renewal_budget = 128;
    cfg.thresholds.spread_exps = vec![12, 13, 14];
    cfg.thresholds.accel_steps = 500;
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut written = Vec::new();
    for run in ["a", "b"] {
        let outputs = run_config(&cfg).expect("config validates");
        let mut files = Vec::new();
        for o in &outputs {
            for p in write_output(o, &dir.path().join(run)).expect("outputs written") {
                files.push((p.file_name().unwrap().to_owned(), fs::read(&p).unwrap()));
            }
        }
        written.push(files);
    }
    let same = written[0] == written[1];
    let bytes: usize = written[0].iter().map(|f| f.1.len()).sum();
    Outcome::new(
        10,
        same && !written[0].is_empty(),
        format!("{} files ({bytes} bytes) from 6 experiments, identical across two runs: {same}", written[0].len()),
    )
}

pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ]
}
