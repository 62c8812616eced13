use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{least_squares, quantile_sorted};

/// Bootstrap resamples behind [`TailIndex::ci`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Hill,
    Regression,
}

/// Tail-index estimate `α` for `P(X > x) ~ x^{-α}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailIndex {
    pub alpha: f64,
    pub k: usize,
    pub method: TailMethod,
    /// 95% percentile bootstrap interval.
    pub ci: (f64, f64),
    /// Estimates at `k/4`, `k/2` and `k` agree within 15% and stay at most 4.
    pub heavy_tail: bool,
}

fn descending(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Hill estimator `k / Σ_{i≤k} ln(X_(i) / X_(k+1))` on descending order
/// statistics; `+∞` when the top `k + 1` values tie.
pub fn hill_sorted(desc: &[f64], k: usize) -> f64 {
    let base = desc[k].ln();
    let s: f64 = desc[..k].iter().map(|x| x.ln() - base).sum();
    k as f64 / s
}

pub fn hill(samples: &[f64], k: usize) -> Result<f64> {
    check(samples, k)?;
    Ok(hill_sorted(&descending(samples), k))
}

/// Minus the slope of `ln(i / n)` against `ln X_(i)` over the top `k`.
pub fn regression_sorted(desc: &[f64], k: usize) -> f64 {
    let n = desc.len() as f64;
    let x: Vec<f64> = desc[..k].iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = (1..=k).map(|i| (i as f64 / n).ln()).collect();
    -least_squares(&x, &y).slope
}

fn check(samples: &[f64], k: usize) -> Result<()> {
    if samples.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Parameter("tail samples must be positive and finite".into()));
    }
    if k == 0 || k >= samples.len() {
        return Err(Error::StatisticalPower(format!(
            "need 1 <= k < n for a tail estimate, got k = {k}, n = {}",
            samples.len()
        )));
    }
    Ok(())
}

fn distinct(desc: &[f64]) -> usize {
    1 + desc.windows(2).filter(|w| w[0] != w[1]).count()
}

fn estimate(desc: &[f64], k: usize) -> (f64, TailMethod) {
    let h = hill_sorted(desc, k);
    if h.is_finite() && (k < 20 || distinct(&desc[..=k]) * 2 > k) {
        (h, TailMethod::Hill)
    } else {
        (regression_sorted(desc, k), TailMethod::Regression)
    }
}

/// Tail index from the top `k` order statistics.
///
/// Falls back to log-log regression of the empirical survival function when
/// ties leave fewer than `k/2` distinct values in the top `k + 1`.
pub fn tail_index<R: Rng + ?Sized>(samples: &[f64], k: usize, rng: &mut R) -> Result<TailIndex> {
    check(samples, k)?;
    let desc = descending(samples);
    let (alpha, method) = estimate(&desc, k);
    let n = desc.len();
    let mut buf = vec![0.0; n];
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = desc[rng.random_range(0..n)];
            }
            buf.sort_by(|a, b| b.total_cmp(a));
            match method {
                TailMethod::Hill => hill_sorted(&buf, k),
                TailMethod::Regression => regression_sorted(&buf, k),
            }
        })
        .filter(|a| a.is_finite())
        .collect();
    boot.sort_by(f64::total_cmp);
    let ci = match boot.is_empty() {
        true => (f64::NAN, f64::NAN),
        false => (quantile_sorted(&boot, 0.025), quantile_sorted(&boot, 0.975)),
    };
    let heavy_tail = k >= 8 && {
        let probes: Vec<f64> = [k / 4, k / 2, k].iter().map(|&j| estimate(&desc, j).0).collect();
        let hi = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = probes.iter().copied().fold(f64::INFINITY, f64::min);
        lo > 0.0 && hi / lo < 1.15 && hi <= 4.0
    };
    Ok(TailIndex { alpha, k, method, ci, heavy_tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::distr::OpenClosed01;

    fn pareto(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, rng::tag::ORACLE);
        (0..n).map(|_| r.sample::<f64, _>(OpenClosed01).powf(-1.0 / alpha)).collect()
    }

    #[test]
    fn pareto_index() {
        let x = pareto(0.6, 100_000, 1);
        let mut r = rng::stream(1, rng::tag::BOOTSTRAP);
        let t = tail_index(&x, 5_000, &mut r).unwrap();
        assert!((t.alpha - 0.6).abs() <= 0.05, "{t:?}");
        assert_eq!(t.method, TailMethod::Hill);
        assert!(t.ci.0 <= t.alpha && t.alpha <= t.ci.1);
        assert!(t.heavy_tail);
    }

    #[test]
    fn k_one_closed_form() {
        let x = [1.0, 5.0, 2.0, 9.0, 3.0];
        assert!((hill(&x, 1).unwrap() - 1.0 / (9f64 / 5.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn exponential_control() {
        let mut r = rng::stream(2, rng::tag::ORACLE);
        let x: Vec<f64> = (0..100_000).map(|_| 1.0 - r.sample::<f64, _>(OpenClosed01).ln()).collect();
        let xi: Vec<f64> = [250, 1000, 4000, 16000].iter().map(|&k| 1.0 / hill(&x, k).unwrap()).collect();
        assert!(xi.windows(2).all(|w| w[1] > w[0]), "{xi:?}");
        let t = tail_index(&x, 4000, &mut r).unwrap();
        assert!(!t.heavy_tail, "{t:?}");
    }

    #[test]
    fn errors() {
        let mut r = rng::stream(3, rng::tag::ORACLE);
        assert!(matches!(tail_index(&[1.0, 2.0], 2, &mut r), Err(Error::StatisticalPower(_))));
        assert!(matches!(tail_index(&[1.0, 2.0], 0, &mut r), Err(Error::StatisticalPower(_))));
        assert!(matches!(tail_index(&[1.0, -2.0], 1, &mut r), Err(Error::Parameter(_))));
    }

    #[test]
    fn ties_switch_to_regression() {
        let x: Vec<f64> = pareto(0.8, 50_000, 4).into_iter().map(|v| v.ceil()).collect();
        let mut r = rng::stream(4, rng::tag::BOOTSTRAP);
        let t = tail_index(&x, 5_000, &mut r).unwrap();
        assert_eq!(t.method, TailMethod::Regression);
        assert!((t.alpha - 0.8).abs() < 0.1, "{t:?}");
    }

    #[test]
    fn hill_is_consistent_on_pareto() {
        let errs: Vec<f64> = [12_500, 25_000, 50_000, 100_000]
            .iter()
            .map(|&n| {
                (0..8u64)
                    .map(|s| (hill(&pareto(0.6, n, 100 + s), n / 20).unwrap() - 0.6).abs())
                    .sum::<f64>()
                    / 8.0
            })
            .collect();
        let inversions = errs.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(inversions <= 1, "{errs:?}");
    }
}
