use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::{compute_exponents, AlphaParams, ExponentSet};
use crate::error::{Error, Result};

/// Experiment names accepted in `experiments`.
pub const EXPERIMENTS: [&str; 7] =
    ["kappa_scaling", "tau_tail", "tau_log", "trap_tails", "time_in_traps", "position_law", "acceleration"];

/// Smallest accepted horizon.
pub const MIN_HORIZON: u64 = 1_000;

/// Run configuration, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    /// `2d` Dirichlet weights: `+e_1, …, +e_d, -e_1, …, -e_d`.
    pub weights: Vec<f64>,
    pub seed: u64,
    pub replicas: usize,
    /// Steps per replica.
    pub horizon: u64,
    /// Box size for the accelerated walk.
    #[serde(default = "default_m")]
    pub m: usize,
    pub experiments: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Relabel directions so that the largest drift component points along `+e_1`.
    #[serde(default)]
    pub relabel: bool,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_m() -> usize {
    1
}

/// Statistical thresholds and sample sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Allowed distance between the scaling exponent and `min(κ, 1)`.
    pub exponent_tolerance: f64,
    /// Horizons below this are flagged as pre-asymptotic.
    pub asymptotic_horizon: u64,
    pub hill_tolerance: f64,
    /// Hill order `k` as a fraction of the pooled gap count.
    pub hill_fraction: f64,
    pub min_gaps: usize,
    /// Slabs kept per replica; each walk stops once this many are confirmed.
    pub slab_budget: usize,
    pub block_size: usize,
    pub block_resamples: usize,
    pub stable_reference: usize,
    pub ks_tau: f64,
    pub plateau_ratio: f64,
    pub plateau_min_exp: u32,
    pub plateau_max_exp: u32,
    pub slope_tolerance: f64,
    pub oracle_samples: usize,
    pub min_trap_samples: usize,
    pub decorrelation: f64,
    pub total_time_slope_tolerance: f64,
    /// Renewals each walk runs to in the trap-time experiment.
    pub renewal_budget: usize,
    pub ks_position: f64,
    pub position_times: Vec<f64>,
    /// Dyadic exponents at which the transverse spread ratio is compared.
    pub spread_exps: Vec<u32>,
    pub accel_steps: usize,
    /// KS significance level for holding-time checks.
    pub ks_significance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            exponent_tolerance: 0.15,
            asymptotic_horizon: 100_000,
            hill_tolerance: 0.15,
            hill_fraction: 0.05,
            min_gaps: 10_000,
            slab_budget: 128,
            block_size: 512,
            block_resamples: 4_000,
            stable_reference: 20_000,
            ks_tau: 0.08,
            plateau_ratio: 2.0,
            plateau_min_exp: 10,
            plateau_max_exp: 16,
            slope_tolerance: 0.1,
            oracle_samples: 1_000_000,
            min_trap_samples: 1_000,
            decorrelation: 0.1,
            total_time_slope_tolerance: 0.3,
            renewal_budget: 1024,
            ks_position: 0.1,
            position_times: vec![0.5, 1.0],
            spread_exps: vec![14, 15, 16],
            accel_steps: 2_000,
            ks_significance: 0.001,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        AlphaParams::new(self.d, self.weights.clone())?;
        if self.horizon < MIN_HORIZON {
            return Err(Error::Config(format!("horizon {} is below the minimum {MIN_HORIZON}", self.horizon)));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.experiments.is_empty() {
            return Err(Error::Config("no experiments selected".into()));
        }
        if let Some(bad) = self.experiments.iter().find(|e| !EXPERIMENTS.contains(&e.as_str())) {
            return Err(Error::Config(format!("unknown experiment {bad:?}; valid names: {}", EXPERIMENTS.join(", "))));
        }
        let t = &self.thresholds;
        if !(t.hill_fraction > 0.0 && t.hill_fraction < 1.0) {
            return Err(Error::Config("hill_fraction must lie in (0, 1)".into()));
        }
        if t.plateau_min_exp > t.plateau_max_exp {
            return Err(Error::Config("plateau_min_exp exceeds plateau_max_exp".into()));
        }
        if t.block_size == 0 || t.slab_budget == 0 || t.renewal_budget < 64 || t.block_resamples == 0 || t.stable_reference == 0 {
            return Err(Error::Config("block, reference and budget sizes are too small".into()));
        }
        Ok(())
    }

    /// The weights as given, or relabeled when `relabel` is set.
    pub fn alpha(&self) -> Result<AlphaParams> {
        let alpha = AlphaParams::new(self.d, self.weights.clone())?;
        Ok(match (self.relabel, alpha.canonical_permutation()) {
            (true, Some(perm)) => alpha.relabeled(&perm),
            _ => alpha,
        })
    }

    pub fn exponents(&self) -> Result<ExponentSet> {
        Ok(compute_exponents(&self.alpha()?))
    }

    /// SHA-256 of the canonical JSON form with the output directory removed.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
d = 3
weights = [0.15, 0.05, 0.05, 0.05, 0.05, 0.05]
seed = 7
replicas = 4
horizon = 100000
experiments = ["tau_tail"]
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.m, 1);
        assert_eq!(c.thresholds, Thresholds::default());
        assert!((c.exponents().unwrap().kappa - 0.6).abs() < 1e-12);
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest(), c.digest());
    }

    #[test]
    fn rejects_bad_input() {
        let unknown = format!("{BASE}colour = 1\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&unknown), Err(Error::Config(_))));
        let nested = format!("{BASE}[thresholds]\nks_tua = 0.1\n");
        assert!(ExperimentConfig::from_toml_str(&nested).is_err());
        let short = BASE.replace("horizon = 100000", "horizon = 999");
        assert!(ExperimentConfig::from_toml_str(&short).is_err());
        let none = BASE.replace("replicas = 4", "replicas = 0");
        assert!(ExperimentConfig::from_toml_str(&none).is_err());
        let name = BASE.replace("\"tau_tail\"", "\"tau_tails\"");
        assert!(ExperimentConfig::from_toml_str(&name).is_err());
        let w = BASE.replace("0.15, ", "");
        assert!(matches!(ExperimentConfig::from_toml_str(&w), Err(Error::Parameter(_))));
    }

    #[test]
    fn digest_ignores_output_dir_only() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        let mut moved = c.clone();
        moved.output_dir = Some("elsewhere".into());
        assert_eq!(c.digest(), moved.digest());
        let mut reseeded = c.clone();
        reseeded.seed = 8;
        assert_ne!(c.digest(), reseeded.digest());
    }

    #[test]
    fn relabel_moves_drift_to_first_axis() {
        let mut c = ExperimentConfig::from_toml_str(BASE).unwrap();
        c.weights = vec![0.05, 0.05, 0.05, 0.05, 0.05, 0.15];
        assert!(c.exponents().unwrap().drift[2] < 0.0);
        c.relabel = true;
        let e = c.exponents().unwrap();
        assert!(e.drift[0] > 0.0 && e.drift[1] == 0.0 && e.drift[2] == 0.0);
    }
}
