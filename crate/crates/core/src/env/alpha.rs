use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;

/// Dirichlet weights on the `2d` lattice directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    d: usize,
    weights: Vec<f64>,
}

impl AlphaParams {
    pub fn new(d: usize, weights: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Parameter(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if weights.len() != 2 * d {
            return Err(Error::Parameter(format!(
                "expected {} weights for d={d}, got {}",
                2 * d,
                weights.len()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Parameter(format!("weight {} is {w}, must be positive", i + 1)));
        }
        Ok(Self { d, weights })
    }

    /// Same weight on every direction.
    pub fn symmetric(d: usize, w: f64) -> Result<Self> {
        Self::new(d, vec![w; 2 * d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha_bar(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Relabeling that moves the largest drift component onto `+e_1`.
    ///
    /// Returns `None` when the drift vanishes. The weights themselves are never
    /// modified; callers apply [`AlphaParams::relabeled`] explicitly.
    pub fn canonical_permutation(&self) -> Option<DirectionPermutation> {
        let d = self.d;
        let drift: Vec<f64> = (0..d).map(|j| self.weights[j] - self.weights[j + d]).collect();
        let (axis, &best) = drift
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))?;
        if best == 0.0 {
            return None;
        }
        let mut map: Vec<usize> = (0..2 * d).collect();
        map.swap(0, axis);
        map.swap(d, axis + d);
        if best < 0.0 {
            map.swap(0, d);
        }
        Some(DirectionPermutation { d, map })
    }

    pub fn relabeled(&self, perm: &DirectionPermutation) -> AlphaParams {
        let weights = perm.map.iter().map(|&old| self.weights[old]).collect();
        AlphaParams { d: self.d, weights }
    }
}

/// `map[new] = old` over direction indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionPermutation {
    pub d: usize,
    pub map: Vec<usize>,
}

impl DirectionPermutation {
    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentSet {
    pub alpha_bar: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub kappa_j: Vec<f64>,
    pub drift: Vec<f64>,
}

impl ExponentSet {
    pub fn is_ballistic(&self) -> bool {
        self.kappa > 1.0
    }

    pub fn has_drift(&self) -> bool {
        self.drift.iter().any(|&c| c != 0.0)
    }

    pub fn drift_norm(&self) -> f64 {
        self.drift.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn compute_exponents(alpha: &AlphaParams) -> ExponentSet {
    let d = alpha.d;
    let w = &alpha.weights;
    let alpha_bar = alpha.alpha_bar();
    let pairs: Vec<f64> = (0..d).map(|j| w[j] + w[j + d]).collect();
    let max_pair = pairs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ExponentSet {
        alpha_bar,
        kappa: 2.0 * alpha_bar - max_pair,
        kappa_prime: 3.0 * alpha_bar - 2.0 * max_pair,
        kappa_j: pairs.iter().map(|p| 2.0 * alpha_bar - p).collect(),
        drift: (0..d).map(|j| w[j] - w[j + d]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_preset() {
        let e = compute_exponents(&AlphaParams::symmetric(3, 0.1).unwrap());
        assert_abs_diff_eq!(e.alpha_bar, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(e.kappa, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.kappa_prime, 1.4, epsilon = 1e-15);
        assert!(!e.has_drift());
    }

    #[test]
    fn drifted_preset() {
        let a = AlphaParams::new(3, vec![0.15, 0.05, 0.05, 0.05, 0.05, 0.05]).unwrap();
        let e = compute_exponents(&a);
        assert_abs_diff_eq!(e.kappa, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(e.kappa_prime, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(e.kappa_j[1], 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(e.drift[0], 0.1, epsilon = 1e-15);
        assert_eq!(&e.drift[1..], &[0.0, 0.0]);
    }

    #[test]
    fn ballistic_flag() {
        let a = AlphaParams::new(3, vec![0.2, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let e = compute_exponents(&a);
        assert_abs_diff_eq!(e.kappa, 1.1, epsilon = 1e-12);
        assert!(e.is_ballistic());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(AlphaParams::new(2, vec![0.1, 0.0, 0.1, 0.1]).is_err());
        assert!(AlphaParams::new(2, vec![0.1, 0.1, 0.1]).is_err());
        assert!(AlphaParams::new(2, vec![0.1, -1.0, 0.1, 0.1]).is_err());
        assert!(AlphaParams::new(0, vec![]).is_err());
    }

    #[test]
    fn permutation_moves_drift_to_first_axis() {
        let a = AlphaParams::new(3, vec![0.1, 0.1, 0.1, 0.1, 0.3, 0.1]).unwrap();
        let p = a.canonical_permutation().unwrap();
        let r = a.relabeled(&p);
        let e = compute_exponents(&r);
        assert!(r.weights()[0] > r.weights()[3]);
        assert_abs_diff_eq!(e.drift[0], 0.2, epsilon = 1e-15);
        assert_eq!(compute_exponents(&a).kappa, e.kappa);
        assert!(AlphaParams::symmetric(3, 0.2).unwrap().canonical_permutation().is_none());
    }

    proptest! {
        #[test]
        fn exponent_identities(d in 1usize..=4, raw in proptest::collection::vec(0.01f64..2.0, 8)) {
            let a = AlphaParams::new(d, raw[..2 * d].to_vec()).unwrap();
            let e = compute_exponents(&a);
            let min = e.kappa_j.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!((e.kappa - min).abs() < 1e-12);
            prop_assert!(e.kappa_j.iter().all(|&k| k >= e.kappa - 1e-12));
            prop_assert!((e.kappa_prime - (2.0 * e.kappa - e.alpha_bar)).abs() < 1e-12);
        }

        #[test]
        fn symmetric_weights_have_zero_drift(d in 1usize..=4, raw in proptest::collection::vec(0.01f64..2.0, 4)) {
            let mut w = raw[..d].to_vec();
            w.extend_from_slice(&raw[..d]);
            let e = compute_exponents(&AlphaParams::new(d, w).unwrap());
            prop_assert!(e.drift.iter().all(|&c| c == 0.0));
        }
    }
}
