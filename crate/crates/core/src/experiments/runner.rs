use std::fs;
use std::path::{Path, PathBuf};

use super::common::ExperimentOutput;
use super::config::ExperimentConfig;
use super::report::ExperimentReport;
use super::{acceleration, kappa_scaling, position_law, tau, time_in_traps, trap_tails};
use crate::error::{Error, Result};

/// Runs one experiment by name.
pub fn dispatch(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match name {
        kappa_scaling::NAME => kappa_scaling::exp_kappa_scaling(cfg),
        tau::TAIL_NAME => tau::exp_tau_tail(cfg),
        tau::LOG_NAME => tau::exp_tau_log(cfg),
        trap_tails::NAME => trap_tails::exp_trap_tails(cfg),
        time_in_traps::NAME => time_in_traps::exp_time_in_traps(cfg),
        position_law::NAME => position_law::exp_position_law(cfg),
        acceleration::NAME => acceleration::exp_acceleration(cfg),
        other => Err(Error::Config(format!("unknown experiment {other:?}"))),
    }
}

/// Like [`dispatch`], but an error becomes a failing report that carries
/// the message.
pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> ExperimentOutput {
    dispatch(name, cfg).unwrap_or_else(|err| {
        let mut rep = ExperimentReport::new(name, &cfg.digest());
        rep.check("completed", 0.0, "experiment ran to completion", false).note(err.to_string());
        ExperimentOutput::new(rep)
    })
}

/// Runs every selected experiment in order.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Vec<ExperimentOutput>> {
    cfg.validate()?;
    Ok(cfg.experiments.iter().map(|name| run_experiment(name, cfg)).collect())
}

/// Writes `<name>.json` and `<name>_<table>.csv`; returns the paths written.
pub fn write_output(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let name = &out.report.experiment;
    let json = dir.join(format!("{name}.json"));
    fs::write(&json, out.report.to_json())?;
    let mut paths = vec![json];
    for (stem, table) in &out.tables {
        let p = dir.join(format!("{name}_{stem}.csv"));
        table.write(&p)?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::csv_io::{read_rows, SeriesRow, SlabRow, Table};
    use crate::experiments::report::Status;

    fn cfg(weights: &[f64], horizon: u64, replicas: usize, experiments: &[&str]) -> ExperimentConfig {
        let mut c = ExperimentConfig::from_toml_str(&format!(
            "d = {}\nweights = {weights:?}\nseed = 5\nreplicas = {replicas}\nhorizon = {horizon}\nexperiments = {experiments:?}\n",
            weights.len() / 2
        ))
        .unwrap();
        c.thresholds.oracle_samples = 20_000;
        c
    }

    const K06: [f64; 6] = [0.15, 0.05, 0.05, 0.05, 0.05, 0.05];
    const K1_DRIFT: [f64; 6] = [0.15, 0.1, 0.1, 0.05, 0.1, 0.1];

    #[test]
    fn reports_are_byte_identical() {
        let c = cfg(&K06, 20_000, 3, &["kappa_scaling"]);
        let (a, b) = (run_experiment("kappa_scaling", &c), run_experiment("kappa_scaling", &c));
        assert_eq!(a.report.to_json(), b.report.to_json());
        let dir = tempfile::tempdir().unwrap();
        let (da, db) = (dir.path().join("a"), dir.path().join("b"));
        let pa = write_output(&a, &da).unwrap();
        let pb = write_output(&b, &db).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        let rows: Vec<SeriesRow> = read_rows(&da.join("kappa_scaling_exponents.csv")).unwrap();
        let Table::Series(orig) = &a.tables[0].1 else { panic!("series table") };
        assert_eq!(&rows, orig);
    }

    #[test]
    fn guards_refuse_with_guidance() {
        let k1 = cfg(&K1_DRIFT, 5_000, 1, &["tau_tail"]);
        let e = dispatch("tau_tail", &k1).err().unwrap().to_string();
        assert!(e.contains("tau_log"), "{e}");
        let k06 = cfg(&K06, 5_000, 1, &["tau_log"]);
        let e = dispatch("tau_log", &k06).err().unwrap().to_string();
        assert!(e.contains("tau_tail"), "{e}");
        let flat = cfg(&[0.05; 6], 5_000, 1, &["kappa_scaling"]);
        assert!(matches!(dispatch("kappa_scaling", &flat), Err(Error::Refused(m)) if m.contains("drift")));
        let mut back = cfg(&[0.05, 0.05, 0.05, 0.15, 0.05, 0.05], 5_000, 1, &["position_law"]);
        assert!(matches!(dispatch("position_law", &back), Err(Error::Refused(m)) if m.contains("relabel")));
        back.relabel = true;
        back.thresholds.spread_exps = vec![8, 9, 10];
        assert!(dispatch("position_law", &back).is_ok());
        let ballistic = cfg(&[0.5, 0.2, 0.2, 0.2], 5_000, 1, &["trap_tails"]);
        assert!(matches!(dispatch("trap_tails", &ballistic), Err(Error::Refused(_))));
    }

    #[test]
    fn failures_become_reports() {
        let c = cfg(&[0.05; 6], 5_000, 1, &["tau_tail"]);
        let out = run_experiment("tau_tail", &c);
        assert!(!out.report.passed());
        assert_eq!(out.report.checks[0].name, "completed");
        assert!(out.report.notes[0].contains("refused"));
    }

    #[test]
    fn short_horizon_and_ballistic_are_flagged() {
        let c = cfg(&K06, 1_000, 2, &["kappa_scaling"]);
        let r = run_experiment("kappa_scaling", &c).report;
        assert_eq!(r.get_check("insufficient_asymptotics").unwrap().status, Status::Flagged);
        let b = cfg(&[1.0, 0.2, 0.2, 0.2], 4_000, 2, &["kappa_scaling"]);
        let r = run_experiment("kappa_scaling", &b).report;
        assert!(r.notes.iter().any(|n| n.contains("ballistic")));
        assert!(r.get_estimate("median_exponent").unwrap().value > 0.75);
    }

    #[test]
    fn tau_tail_power_error_and_diagnostics() {
        let mut c = cfg(&K06, 20_000, 3, &["tau_tail"]);
        assert!(matches!(dispatch("tau_tail", &c), Err(Error::StatisticalPower(_))));
        c.thresholds.min_gaps = 50;
        c.thresholds.block_size = 16;
        c.thresholds.block_resamples = 200;
        c.thresholds.stable_reference = 500;
        let out = dispatch("tau_tail", &c).unwrap();
        let d = out.report.diagnostics.as_ref().unwrap();
        assert_eq!(d.kept + d.dropped, d.launched);
        assert_eq!(d.launched, 3);
        let Table::Slabs(rows) = &out.tables[0].1 else { panic!("slab table") };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        out.tables[0].1.write(&p).unwrap();
        assert_eq!(&read_rows::<SlabRow>(&p).unwrap(), rows);
    }

    #[test]
    fn single_replica_plateau_is_flagged() {
        let mut c = cfg(&K1_DRIFT, 200_000, 1, &["tau_log"]);
        c.thresholds.plateau_min_exp = 5;
        c.thresholds.plateau_max_exp = 9;
        let r = dispatch("tau_log", &c).unwrap().report;
        assert_eq!(r.get_check("single_replica").unwrap().status, Status::Flagged);
        assert!(r.estimates.iter().filter(|e| e.name.starts_with("ratio_n")).all(|e| e.ci.is_none()));
    }

    #[test]
    fn trap_tails_skip_sparse_axes() {
        let c = cfg(&K06, 3_000, 1, &["trap_tails"]);
        let r = dispatch("trap_tails", &c).unwrap().report;
        assert!(r.notes.iter().any(|n| n.contains("skipped")), "{:?}", r.notes);
        assert!(r.get_check("oracle_slope_1").is_some());
    }

    #[test]
    fn position_law_is_exact_at_time_zero() {
        let mut c = cfg(&K06, 2_048, 20, &["position_law"]);
        c.thresholds.position_times = vec![0.0, 1.0];
        c.thresholds.spread_exps = vec![9, 10, 11];
        let r = dispatch("position_law", &c).unwrap().report;
        assert_eq!(r.get_check("degenerate_at_0").unwrap().status, Status::Pass);
    }

    #[test]
    fn acceleration_m1_holds_unit_rates() {
        let mut c = cfg(&K06, 1_000, 2, &["acceleration"]);
        c.thresholds.accel_steps = 500;
        let r = dispatch("acceleration", &c).unwrap().report;
        assert!(r.get_check("occupation_identity_0").is_some());
    }

    #[test]
    fn unknown_names_are_config_errors() {
        let c = cfg(&K06, 1_000, 1, &["kappa_scaling"]);
        assert!(matches!(dispatch("nope", &c), Err(Error::Config(_))));
    }
}
