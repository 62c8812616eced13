use rand::Rng;
use rustc_hash::FxHashMap;

use super::trajectory::Trajectory;
use crate::env::{Environment, SiteDistribution, STEP_NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::rng::StreamRng;

/// Direction selected by the uniform `u` against cumulative weights.
#[inline]
pub fn pick_direction(cum: &[f64], u: f64) -> usize {
    let last = cum.len() - 1;
    cum[..last].iter().position(|&c| u < c).unwrap_or(last)
}

fn cumulative(dist: &SiteDistribution, out: &mut [f64]) -> Result<()> {
    let mut acc = 0.0;
    for (o, &p) in out.iter_mut().zip(dist.probs()) {
        acc += p;
        *o = acc;
    }
    if acc.is_nan() || (acc - 1.0).abs() > STEP_NORMALIZATION_TOL {
        return Err(Error::Internal(format!("site distribution sums to {acc}")));
    }
    Ok(())
}

/// One step of the walk from `pos`.
pub fn step<E: Environment + ?Sized, R: Rng + ?Sized>(env: &E, pos: &Site, rng: &mut R) -> Result<Site> {
    let d = env.dim();
    let dist = env.site(pos);
    let mut cum = [0.0; 2 * MAX_DIM];
    cumulative(&dist, &mut cum[..2 * d])?;
    let dir = pick_direction(&cum[..2 * d], rng.random::<f64>());
    Ok(pos.step(dir, d))
}

/// Per-replica memo of cumulative site laws.
pub struct SiteCache<'e, E: ?Sized> {
    env: &'e E,
    d: usize,
    index: FxHashMap<Site, u32>,
    cum: Vec<f64>,
}

impl<'e, E: Environment + ?Sized> SiteCache<'e, E> {
    pub fn new(env: &'e E) -> Self {
        Self { env, d: env.dim(), index: FxHashMap::default(), cum: Vec::new() }
    }

    pub fn env(&self) -> &'e E {
        self.env
    }

    /// Cumulative transition weights at `x`.
    #[inline]
    pub fn cumulative(&mut self, x: &Site) -> Result<&[f64]> {
        let n = 2 * self.d;
        let slot = match self.index.get(x) {
            Some(&i) => i as usize,
            None => {
                let i = self.cum.len() / n;
                let dist = self.env.site(x);
                self.cum.resize(self.cum.len() + n, 0.0);
                cumulative(&dist, &mut self.cum[i * n..])?;
                self.index.insert(*x, i as u32);
                i
            }
        };
        Ok(&self.cum[slot * n..(slot + 1) * n])
    }

    pub fn distinct_sites(&self) -> usize {
        self.index.len()
    }

    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.index.keys()
    }
}

/// A walker in a frozen environment with its own random stream.
pub struct Walker<'e, E: ?Sized> {
    cache: SiteCache<'e, E>,
    pos: Site,
    rng: StreamRng,
}

impl<'e, E: Environment + ?Sized> Walker<'e, E> {
    pub fn new(env: &'e E, rng: StreamRng) -> Self {
        Self { cache: SiteCache::new(env), pos: Site::ORIGIN, rng }
    }

    pub fn position(&self) -> Site {
        self.pos
    }

    pub fn cache(&self) -> &SiteCache<'e, E> {
        &self.cache
    }

    /// Moves one step and returns the direction taken.
    #[inline]
    pub fn advance(&mut self) -> Result<usize> {
        let u = self.rng.random::<f64>();
        let dir = pick_direction(self.cache.cumulative(&self.pos)?, u);
        self.pos = self.pos.step(dir, self.cache.d);
        Ok(dir)
    }

    /// Appends `n` steps to `traj`.
    pub fn run(&mut self, n: usize, traj: &mut Trajectory) -> Result<()> {
        for _ in 0..n {
            let dir = self.advance()?;
            traj.push(dir);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AlphaParams, DirichletEnvironment, FixedEnvironment};
    use crate::rng;

    #[test]
    fn uniform_frequencies() {
        let d = 3;
        let env = FixedEnvironment::uniform(d);
        let mut r = rng::stream(5, 0);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let y = step(&env, &Site::ORIGIN, &mut r).unwrap();
            counts[Site::ORIGIN.direction_to(&y, d).unwrap()] += 1;
        }
        let p = 1.0 / 6.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn corrupt_distribution_is_an_internal_error() {
        let mut env = FixedEnvironment::uniform(1);
        env.set(Site::ORIGIN, SiteDistribution::new_unchecked(&[0.5, 0.5 + 2e-9]));
        let mut r = rng::stream(1, 0);
        assert!(matches!(step(&env, &Site::ORIGIN, &mut r), Err(Error::Internal(_))));
        let mut w = Walker::new(&env, rng::stream(1, 0));
        assert!(matches!(w.advance(), Err(Error::Internal(_))));
    }

    #[test]
    fn walker_matches_plain_steps() {
        let alpha = AlphaParams::symmetric(2, 0.5).unwrap();
        let env = DirichletEnvironment::new(alpha, 3);
        let mut w = Walker::new(&env, rng::stream(8, 1));
        let mut r = rng::stream(8, 1);
        let mut pos = Site::ORIGIN;
        for _ in 0..2000 {
            w.advance().unwrap();
            pos = step(&env, &pos, &mut r).unwrap();
            assert_eq!(w.position(), pos);
        }
    }
}
