use serde::{Deserialize, Serialize};

use super::sampler::SubordinatorPath;
use crate::error::{Error, Result};

/// Nondecreasing right-continuous step function with `f(0) = 0`.
///
/// `f(s) = values[k]` for `s` in `[locations[k], locations[k + 1])` and
/// `f(s) = 0` before the first location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CadlagStep {
    locations: Vec<f64>,
    values: Vec<f64>,
}

impl CadlagStep {
    pub fn new(locations: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if locations.len() != values.len() {
            return Err(Error::Parameter("locations and values differ in length".into()));
        }
        if locations.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("step function entries must be finite".into()));
        }
        if locations.first().is_some_and(|&l| l < 0.0) || values.first().is_some_and(|&v| v < 0.0) {
            return Err(Error::Parameter("step function must start at a nonnegative time and value".into()));
        }
        if locations.first() == Some(&0.0) && values[0] != 0.0 {
            return Err(Error::Parameter("step function must vanish at 0".into()));
        }
        if locations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("jump locations must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter("step function must be nondecreasing".into()));
        }
        Ok(Self { locations, values })
    }

    pub fn from_path(path: &SubordinatorPath) -> Self {
        Self { locations: path.times.clone(), values: path.values.clone() }
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.locations.partition_point(|&l| l <= s) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// Largest value taken.
    pub fn sup(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `inf{s : f(s) ≥ t}`, or `+∞` when `t` exceeds the range of `f`.
    pub fn invert(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let k = self.values.partition_point(|&v| v < t);
        self.locations.get(k).copied().unwrap_or(f64::INFINITY)
    }
}

/// Free-function form of [`CadlagStep::invert`].
pub fn invert_cadlag(f: &CadlagStep, t: f64) -> f64 {
    f.invert(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    #[test]
    fn identity_on_a_grid() {
        let grid: Vec<f64> = (1..=100).map(|k| k as f64 * 0.1).collect();
        let f = CadlagStep::new(grid.clone(), grid.clone()).unwrap();
        for &g in &grid {
            assert_eq!(f.invert(g), g);
        }
        assert_eq!(f.invert(0.05), 0.1);
    }

    #[test]
    fn single_jump() {
        let f = CadlagStep::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        assert_eq!(f.invert(2.0), 1.0);
        assert_eq!(f.invert(3.0), 1.0);
        assert_eq!(f.invert(3.5), f64::INFINITY);
        assert_eq!(f.eval(0.999), 0.0);
        assert_eq!(f.eval(1.0), 3.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(CadlagStep::new(vec![0.0], vec![1.0]).is_err());
        assert!(CadlagStep::new(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(CadlagStep::new(vec![1.0, 2.0], vec![2.0, 1.0]).is_err());
        assert!(CadlagStep::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn subordinator_inverse_bounds() {
        let mut r = rng::stream(8, rng::tag::STABLE);
        let p = SubordinatorPath::sample(0.6, 0.01, 1000, &mut r).unwrap();
        let f = CadlagStep::from_path(&p);
        for (s, v) in p.times.iter().zip(&p.values) {
            assert!(f.invert(*v) <= *s);
        }
    }

    proptest! {
        #[test]
        fn inverse_of_value_is_at_most_location(
            steps in proptest::collection::vec((0.01f64..2.0, 0.0f64..3.0), 1..40),
            probe in 0.0f64..1.0,
        ) {
            let mut loc = 0.0;
            let mut val = 0.0;
            let mut ls = Vec::new();
            let mut vs = Vec::new();
            for (dl, dv) in steps {
                loc += dl;
                val += dv;
                ls.push(loc);
                vs.push(val);
            }
            let f = CadlagStep::new(ls.clone(), vs).unwrap();
            for &s in &ls {
                prop_assert!(f.invert(f.eval(s)) <= s);
            }
            let s = probe * loc;
            prop_assert!(f.invert(f.eval(s)) <= s);
            let t = probe * f.sup();
            if t > 0.0 {
                prop_assert!(f.eval(f.invert(t)) >= t);
            }
        }
    }
}
