use rand_distr::Gamma;
use rustc_hash::FxHashMap;

use super::alpha::AlphaParams;
use super::dirichlet::{gamma_for, sample_with};
use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::rng;

/// Tolerance on the sum of a validated site distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance checked by the walk before using a distribution.
pub const STEP_NORMALIZATION_TOL: f64 = 1e-9;

/// Transition probabilities out of one site, indexed by direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteDistribution {
    probs: [f64; 2 * MAX_DIM],
    len: u8,
}

impl SiteDistribution {
    /// Validated constructor: positive components summing to one within 1e-12.
    pub fn new(probs: &[f64]) -> Result<Self> {
        let s = Self::new_unchecked(probs);
        if probs.is_empty() || !probs.len().is_multiple_of(2) || probs.len() > 2 * MAX_DIM {
            return Err(Error::Parameter(format!("{} components is not 2d", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::Parameter(format!("component {p} outside (0,1]")));
        }
        let err = (s.total() - 1.0).abs();
        if err > NORMALIZATION_TOL {
            return Err(Error::Parameter(format!("components sum to 1 + {err:e}")));
        }
        Ok(s)
    }

    /// Stores `probs` without validation; used to inject corrupt data in tests.
    pub fn new_unchecked(probs: &[f64]) -> Self {
        let mut p = [0.0; 2 * MAX_DIM];
        let n = probs.len().min(2 * MAX_DIM);
        p[..n].copy_from_slice(&probs[..n]);
        Self { probs: p, len: n as u8 }
    }

    pub fn uniform(d: usize) -> Self {
        Self::new_unchecked(&vec![1.0 / (2 * d) as f64; 2 * d])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs[..self.len as usize]
    }

    #[inline]
    pub fn prob(&self, dir: usize) -> f64 {
        self.probs[dir]
    }

    pub fn dim(&self) -> usize {
        self.len as usize / 2
    }

    pub fn total(&self) -> f64 {
        self.probs().iter().sum()
    }

    /// Direction carrying the largest probability (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let p = self.probs();
        let mut best = 0;
        for i in 1..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        best
    }
}

/// A frozen environment: a pure map from sites to transition laws.
pub trait Environment: Sync {
    fn dim(&self) -> usize;

    fn site(&self, x: &Site) -> SiteDistribution;

    fn omega(&self, x: &Site, dir: usize) -> f64 {
        self.site(x).prob(dir)
    }
}

impl<E: Environment + ?Sized> Environment for &E {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn site(&self, x: &Site) -> SiteDistribution {
        (**self).site(x)
    }
}

/// i.i.d. Dirichlet(α) environment, sampled lazily from `(seed, site)`.
#[derive(Clone, Debug)]
pub struct DirichletEnvironment {
    alpha: AlphaParams,
    seed: u64,
    gammas: Vec<Gamma<f64>>,
}

impl DirichletEnvironment {
    pub fn new(alpha: AlphaParams, seed: u64) -> Self {
        let gammas = alpha.weights().iter().map(|&a| gamma_for(a)).collect();
        Self { alpha, seed, gammas }
    }

    pub fn alpha(&self) -> &AlphaParams {
        &self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream id of a site: a hash of its coordinates.
    fn site_stream(x: &Site) -> u64 {
        let mut h = 0x243F_6A88_85A3_08D3u64;
        for &c in &x.0 {
            h = rng::mix64(h ^ (c as u32 as u64));
        }
        h
    }

    pub fn sample_site(&self, x: &Site) -> SiteDistribution {
        let mut r = rng::stream(self.seed, Self::site_stream(x));
        let n = self.gammas.len();
        let mut out = [0.0; 2 * MAX_DIM];
        sample_with(&self.gammas, self.alpha.weights(), &mut r, &mut out[..n]);
        SiteDistribution::new_unchecked(&out[..n])
    }
}

impl Environment for DirichletEnvironment {
    fn dim(&self) -> usize {
        self.alpha.d()
    }

    fn site(&self, x: &Site) -> SiteDistribution {
        self.sample_site(x)
    }
}

/// Environment with a default law and per-site overrides.
#[derive(Clone, Debug)]
pub struct FixedEnvironment {
    d: usize,
    default: SiteDistribution,
    overrides: FxHashMap<Site, SiteDistribution>,
}

impl FixedEnvironment {
    pub fn new(default: SiteDistribution) -> Self {
        Self { d: default.dim(), default, overrides: FxHashMap::default() }
    }

    pub fn uniform(d: usize) -> Self {
        Self::new(SiteDistribution::uniform(d))
    }

    pub fn set(&mut self, x: Site, dist: SiteDistribution) -> &mut Self {
        self.overrides.insert(x, dist);
        self
    }

    /// Installs an edge `x -> x + e_dir` with the two inward probabilities;
    /// the remaining mass at each endpoint is spread evenly.
    pub fn set_edge(&mut self, x: Site, dir: usize, w_xy: f64, w_yx: f64) -> &mut Self {
        let d = self.d;
        let y = x.step(dir, d);
        let back = crate::lattice::opposite(dir, d);
        let spread = |target: usize, w: f64| {
            let rest = (1.0 - w) / (2 * d - 1) as f64;
            let v: Vec<f64> = (0..2 * d).map(|i| if i == target { w } else { rest }).collect();
            SiteDistribution::new_unchecked(&v)
        };
        self.overrides.insert(x, spread(dir, w_xy));
        self.overrides.insert(y, spread(back, w_yx));
        self
    }
}

impl Environment for FixedEnvironment {
    fn dim(&self) -> usize {
        self.d
    }

    fn site(&self, x: &Site) -> SiteDistribution {
        *self.overrides.get(x).unwrap_or(&self.default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn preset() -> AlphaParams {
        AlphaParams::new(3, vec![0.15, 0.05, 0.05, 0.05, 0.05, 0.05]).unwrap()
    }

    #[test]
    fn site_queries_are_bit_identical() {
        let env = DirichletEnvironment::new(preset(), 99);
        let x = Site::from_coords(&[3, -7, 1]);
        let a = env.site(&x);
        let b = env.site(&x);
        assert_eq!(a.probs().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
                   b.probs().iter().map(|p| p.to_bits()).collect::<Vec<_>>());
        assert_ne!(env.site(&x), env.site(&Site::from_coords(&[3, -7, 2])));
        assert_ne!(a, DirichletEnvironment::new(preset(), 100).site(&x));
    }

    #[test]
    fn validated_constructor() {
        assert!(SiteDistribution::new(&[0.5, 0.5]).is_ok());
        assert!(SiteDistribution::new(&[0.5, 0.5 + 1e-10]).is_err());
        assert!(SiteDistribution::new(&[1.0, 0.0]).is_err());
        assert!(SiteDistribution::new(&[0.2, 0.3, 0.5]).is_err());
    }

    #[test]
    fn fixed_edge_installs_both_endpoints() {
        let mut env = FixedEnvironment::uniform(3);
        let x = Site::ORIGIN;
        env.set_edge(x, 1, 0.9, 0.8);
        assert_eq!(env.omega(&x, 1), 0.9);
        assert_eq!(env.omega(&x.step(1, 3), 4), 0.8);
        assert!((env.site(&x).total() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn sampled_sites_are_valid(seed in any::<u64>(), c in proptest::collection::vec(-1000i32..1000, 3)) {
            let env = DirichletEnvironment::new(preset(), seed);
            let p = env.site(&Site::from_coords(&c));
            prop_assert!(SiteDistribution::new(p.probs()).is_ok());
        }
    }
}
