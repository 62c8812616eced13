use std::f64::consts::PI;

use rand::distr::{Open01, OpenClosed01};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Parameter(format!("stable index must lie in (0, 1), got {kappa}")));
    }
    Ok(())
}

/// Draw of `S_1` with characteristic function
/// `exp(-|λ|^κ (1 - i sgn(λ) tan(πκ/2)))`.
///
/// Kanter's representation gives a variable `Z` with Laplace transform
/// `exp(-λ^κ)`; its characteristic exponent carries the factor `cos(πκ/2)`,
/// which the final rescaling by `cos(πκ/2)^{-1/κ}` removes.
pub fn sample_unit_stable<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(unit_stable_unchecked(kappa, rng))
}

fn unit_stable_unchecked<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e = -rng.sample::<f64, _>(OpenClosed01).ln();
    let r = (1.0 - kappa) / kappa;
    let ln_z = (kappa * u).sin().ln() + r * ((1.0 - kappa) * u).sin().ln() - u.sin().ln() / kappa - r * e.ln();
    let ln_scale = -(PI * kappa / 2.0).cos().ln() / kappa;
    (ln_z + ln_scale).exp().max(f64::MIN_POSITIVE)
}

/// Draw of the increment `S_s`, equal in law to `s^{1/κ} S_1`.
pub fn sample_stable_increment<R: Rng + ?Sized>(kappa: f64, s: f64, rng: &mut R) -> Result<f64> {
    check_kappa(kappa)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("duration must be positive, got {s}")));
    }
    Ok(s.powf(1.0 / kappa) * unit_stable_unchecked(kappa, rng))
}

/// Closed-form characteristic function of `S_s` at `λ`, as `(re, im)`.
pub fn stable_cf(kappa: f64, s: f64, lambda: f64) -> (f64, f64) {
    let a = s * lambda.abs().powf(kappa);
    let b = a * lambda.signum() * (PI * kappa / 2.0).tan();
    let m = (-a).exp();
    (m * b.cos(), m * b.sin())
}

/// Subordinator sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorPath {
    pub kappa: f64,
    /// Grid times, starting at 0.
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
    /// `values[k] = S(times[k])`, with `values[0] = 0`.
    pub values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn sample<R: Rng + ?Sized>(kappa: f64, dt: f64, steps: usize, rng: &mut R) -> Result<Self> {
        check_kappa(kappa)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("grid step must be positive, got {dt}")));
        }
        let scale = dt.powf(1.0 / kappa);
        let increments: Vec<f64> = (0..steps).map(|_| scale * unit_stable_unchecked(kappa, rng)).collect();
        let times = (0..=steps).map(|k| k as f64 * dt).collect();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for &inc in &increments {
            acc += inc;
            values.push(acc);
        }
        Ok(Self { kappa, times, increments, values })
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn end_value(&self) -> f64 {
        *self.values.last().expect("path has an initial value")
    }
}
