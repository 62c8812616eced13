use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoints are generated until this many lie past the largest sample.
const TRAILING_BREAKPOINTS: usize = 64;
const MAX_BREAKPOINTS: usize = 1 << 20;

/// Increasing concave piecewise-linear `φ` with `φ(x) = a_i + b_i (x - t_i)`
/// on `[t_i, t_{i+1})`; the last segment extends to infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcaveMajorant {
    pub breakpoints: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `Φ(t_i) = ∫_0^{t_i} φ`.
    cumulative: Vec<f64>,
}

impl ConcaveMajorant {
    fn from_parts(breakpoints: Vec<f64>, intercepts: Vec<f64>, slopes: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        cumulative.push(0.0);
        for i in 1..breakpoints.len() {
            let h = breakpoints[i] - breakpoints[i - 1];
            cumulative.push(cumulative[i - 1] + h * (intercepts[i - 1] + 0.5 * slopes[i - 1] * h));
        }
        Self { breakpoints, intercepts, slopes, cumulative }
    }

    fn segment(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&t| t <= x).saturating_sub(1)
    }

    pub fn phi(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.intercepts[i] + self.slopes[i] * (x - self.breakpoints[i])
    }

    /// `Φ(x) = ∫_0^x φ`, exact per segment.
    pub fn big_phi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.segment(x);
        let h = x - self.breakpoints[i];
        self.cumulative[i] + h * (self.intercepts[i] + 0.5 * self.slopes[i] * h)
    }

    /// The step function `1 + #{i : x ≥ t_i}` that `φ` stays below.
    pub fn step_bound(&self, x: f64) -> f64 {
        1.0 + self.breakpoints.partition_point(|&t| t <= x) as f64
    }
}

/// Builds `φ` from a sample pool of a nonnegative variable with finite mean.
///
/// `t_0 = 0` and `t_{i+1} = 1 + inf{x ≥ t_i : E[X 1{X > x}] ≤ 2^{-(i+1)} E[X]}`
/// under the empirical measure. Slopes follow
/// `b_i = min(b_{i-1}, (i + 2 - a_i) / (t_{i+1} - t_i))` with `b_0 = 1 / t_1`,
/// which gives `a_{i+1} = a_i + b_i (t_{i+1} - t_i) ≤ i + 2`.
pub fn build_concave_majorant(samples: &[f64]) -> Result<ConcaveMajorant> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    if samples.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Parameter("samples must be nonnegative and finite".into()));
    }
    let half = n / 2;
    let m1 = samples[..half].iter().sum::<f64>() / half as f64;
    let m2 = samples[half..].iter().sum::<f64>() / (n - half) as f64;
    if (m1 - m2).abs() > 0.1 * m1.max(m2) {
        return Err(Error::Precondition(format!("half-sample means {m1} and {m2} differ by more than 10%")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    // above[j] = Σ_{k ≥ j} sorted[k] / n
    let mut above = vec![0.0; n + 1];
    for j in (0..n).rev() {
        above[j] = above[j + 1] + sorted[j] / n as f64;
    }
    let total = above[0];
    if total <= 0.0 {
        return Err(Error::Precondition("sample mean is zero".into()));
    }
    let tail = |x: f64| above[sorted.partition_point(|&v| v <= x)];
    let max = sorted[n - 1];

    let mut t = vec![0.0];
    let mut i = 0usize;
    while t.len() < MAX_BREAKPOINTS {
        let ti = t[i];
        if ti > max && t.len() > TRAILING_BREAKPOINTS && t[t.len() - TRAILING_BREAKPOINTS] > max {
            break;
        }
        let thr = total * 0.5f64.powi(i as i32 + 1);
        let x = if tail(ti) <= thr {
            ti
        } else {
            // tail(x) only drops at sample values, so the infimum is one of them.
            let start = sorted.partition_point(|&v| v < ti);
            let k = (start..n).find(|&k| above[k + 1] <= thr).expect("tail vanishes past the maximum");
            sorted[k]
        };
        t.push(1.0 + x);
        i += 1;
    }
    let mut a = vec![1.0];
    let mut b: Vec<f64> = Vec::with_capacity(t.len());
    for i in 0..t.len() - 1 {
        let h = t[i + 1] - t[i];
        let cap = (i as f64 + 2.0 - a[i]) / h;
        let bi = if i == 0 { cap } else { b[i - 1].min(cap) };
        b.push(bi);
        if i + 2 < t.len() {
            a.push(a[i] + bi * h);
        }
    }
    t.pop();
    Ok(ConcaveMajorant::from_parts(t, a, b))
}
