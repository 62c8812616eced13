//! Small numerical and statistical helpers shared by the experiment code.

use rand::Rng;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

pub fn std_err(x: &[f64]) -> f64 {
    (variance(x) / x.len() as f64).sqrt()
}

/// Standard error of the sample variance, from the fourth central moment.
pub fn variance_std_err(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2).max(0.0) / n).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(x: &[f64]) -> f64 {
    quantile_sorted(&sorted(x), 0.5)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    if x.len() < 3 {
        return f64::NAN;
    }
    pearson(&x[..x.len() - 1], &x[1..])
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    LineFit { slope, intercept: my - slope * mx }
}

/// Two-sample Kolmogorov–Smirnov statistic; ties are handled by comparing
/// the empirical CDFs only after each distinct value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let s = sorted(x);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// One-sample KS statistic against a distribution on the integers.
pub fn ks_discrete(x: &[u64], cdf: impl Fn(u64) -> f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_unstable();
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let below = if v == 0 { 0.0 } else { cdf(v - 1) };
        d = d.max((i as f64 / n - below).abs());
        while i < s.len() && s[i] == v {
            i += 1;
        }
        d = d.max((i as f64 / n - cdf(v)).abs());
    }
    d
}

/// Asymptotic Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = 2.0 * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Two-sample KS critical value at significance `alpha` (asymptotic).
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Percentile bootstrap interval of `stat` at the given coverage.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    data: &[f64],
    stat: impl Fn(&[f64]) -> f64,
    resamples: usize,
    coverage: f64,
    rng: &mut R,
) -> (f64, f64) {
    let n = data.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = data[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .filter(|s| s.is_finite())
        .collect();
    if stats.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - coverage) / 2.0;
    (quantile_sorted(&stats, tail), quantile_sorted(&stats, 1.0 - tail))
}

/// Kahan-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Dyadic points `2^k` within `[lo, hi]`.
pub fn dyadic_points(lo: usize, hi: usize) -> Vec<usize> {
    (0..63).map(|k| 1usize << k).filter(|&n| n >= lo && n <= hi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn ks_on_identical_and_disjoint_samples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[4.0, 5.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ks_one_sample_uniform() {
        let x = [0.1, 0.5, 0.9];
        let d = ks_one_sample(&x, |v| v);
        assert!((d - (0.9_f64 - 2.0 / 3.0).max(1.0 / 3.0 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn ks_discrete_exact_law_is_small() {
        let x = vec![0, 0, 1, 1];
        assert!(ks_discrete(&x, |v| if v == 0 { 0.5 } else { 1.0 }) < 1e-12);
    }

    #[test]
    fn kolmogorov_tail_values() {
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-3);
        assert!((ks_critical(100, 100, 0.05) - 1.3581 * (0.02f64).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn least_squares_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = least_squares(&x, &y);
        assert!((f.slope - 2.5).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_interval_covers_mean() {
        let mut r = rng::stream(3, 0);
        let data: Vec<f64> = (0..500).map(|_| r.random::<f64>()).collect();
        let (lo, hi) = bootstrap_ci(&data, mean, 400, 0.95, &mut r);
        assert!(lo < 0.5 && 0.5 < hi && hi - lo < 0.1);
    }

    #[test]
    fn kahan_beats_naive_summation() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
