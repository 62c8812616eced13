use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::lattice::{opposite, Site};

/// An edge is a trap when its two inward probabilities sum above this.
pub const TRAP_THRESHOLD: f64 = 1.5;

#[inline]
pub fn is_trap(w_xy: f64, w_yx: f64) -> bool {
    w_xy + w_yx > TRAP_THRESHOLD
}

#[inline]
pub fn strength(w_xy: f64, w_yx: f64) -> f64 {
    1.0 / ((1.0 - w_xy) + (1.0 - w_yx))
}

/// A trapped edge `{x, y}` with `y = x + e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Trap {
    pub x: Site,
    pub y: Site,
    /// 0-based axis of the edge.
    pub axis: usize,
    pub omega_xy: f64,
    pub omega_yx: f64,
    pub strength: f64,
}

impl Trap {
    /// Evaluates the edge `x -> x + e_dir`; `None` when it is not a trap.
    pub fn from_edge<E: Environment + ?Sized>(env: &E, x: &Site, dir: usize) -> Option<Trap> {
        let d = env.dim();
        let y = x.step(dir, d);
        let w_xy = env.omega(x, dir);
        let w_yx = env.omega(&y, opposite(dir, d));
        Self::from_weights(*x, dir, d, w_xy, w_yx)
    }

    pub fn from_weights(x: Site, dir: usize, d: usize, w_xy: f64, w_yx: f64) -> Option<Trap> {
        if !is_trap(w_xy, w_yx) {
            return None;
        }
        let y = x.step(dir, d);
        let s = strength(w_xy, w_yx);
        Some(if dir < d {
            Trap { x, y, axis: dir, omega_xy: w_xy, omega_yx: w_yx, strength: s }
        } else {
            Trap { x: y, y: x, axis: dir - d, omega_xy: w_yx, omega_yx: w_xy, strength: s }
        })
    }

    pub fn contains(&self, z: &Site) -> bool {
        self.x == *z || self.y == *z
    }

    pub fn partner(&self, z: &Site) -> Site {
        if *z == self.x {
            self.y
        } else {
            self.x
        }
    }

    /// Probability of one back-and-forth, `ω(x,y)·ω(y,x)`.
    pub fn bounce_probability(&self) -> f64 {
        self.omega_xy * self.omega_yx
    }
}

/// Traps among the given directed edges `(x, dir)`, deduplicated.
pub fn find_traps<E: Environment + ?Sized>(env: &E, region: &[(Site, usize)]) -> Vec<Trap> {
    let mut out: Vec<Trap> = region.iter().filter_map(|(x, dir)| Trap::from_edge(env, x, *dir)).collect();
    out.sort_by_key(|a| (a.x, a.axis));
    out.dedup_by(|a, b| a.x == b.x && a.axis == b.axis);
    out
}

/// Vertex-to-trap lookup.
#[derive(Clone, Debug, Default)]
pub struct TrapIndex {
    traps: Vec<Trap>,
    by_site: FxHashMap<Site, u32>,
}

impl TrapIndex {
    /// Fails if some vertex would belong to two traps.
    pub fn from_traps(traps: Vec<Trap>) -> Result<Self> {
        let mut idx = TrapIndex::default();
        for t in traps {
            idx.insert(t)?;
        }
        Ok(idx)
    }

    fn insert(&mut self, t: Trap) -> Result<()> {
        if let Some(&i) = self.by_site.get(&t.x) {
            if self.traps[i as usize].x == t.x && self.traps[i as usize].y == t.y {
                return Ok(());
            }
        }
        for z in [t.x, t.y] {
            if let Some(&i) = self.by_site.get(&z) {
                return Err(Error::Internal(format!(
                    "vertex {z:?} lies in two traps: {:?} and {t:?}",
                    self.traps[i as usize]
                )));
            }
        }
        let i = self.traps.len() as u32;
        self.traps.push(t);
        self.by_site.insert(t.x, i);
        self.by_site.insert(t.y, i);
        Ok(())
    }

    /// Finds every trap touching one of `sites`. Only the heaviest outgoing
    /// edge of a vertex can be trapped, so one neighbour is checked per site.
    pub fn scan<E: Environment + ?Sized>(env: &E, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let d = env.dim();
        let mut idx = TrapIndex::default();
        for x in sites {
            if idx.by_site.contains_key(&x) {
                continue;
            }
            let dist = env.site(&x);
            let dir = dist.argmax();
            let w = dist.prob(dir);
            if w <= TRAP_THRESHOLD - 1.0 {
                continue;
            }
            let y = x.step(dir, d);
            let w_yx = env.omega(&y, opposite(dir, d));
            if let Some(t) = Trap::from_weights(x, dir, d, w, w_yx) {
                idx.insert(t)?;
            }
        }
        Ok(idx)
    }

    pub fn traps(&self) -> &[Trap] {
        &self.traps
    }

    pub fn len(&self) -> usize {
        self.traps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traps.is_empty()
    }

    #[inline]
    pub fn trap_id(&self, z: &Site) -> Option<u32> {
        self.by_site.get(z).copied()
    }

    pub fn trap(&self, id: u32) -> &Trap {
        &self.traps[id as usize]
    }

    pub fn trap_of(&self, z: &Site) -> Option<&Trap> {
        self.trap_id(z).map(|i| &self.traps[i as usize])
    }

    #[inline]
    pub fn partner(&self, z: &Site) -> Option<Site> {
        self.trap_of(z).map(|t| t.partner(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AlphaParams, DirichletEnvironment, FixedEnvironment};

    #[test]
    fn hand_evaluated_edges() {
        let t = Trap::from_weights(Site::ORIGIN, 0, 3, 0.9, 0.8).unwrap();
        assert!((t.strength - 10.0 / 3.0).abs() < 1e-12);
        assert!(Trap::from_weights(Site::ORIGIN, 0, 3, 0.7, 0.7).is_none());
    }

    #[test]
    fn backward_edge_is_canonicalised() {
        let t = Trap::from_weights(Site::ORIGIN, 4, 3, 0.9, 0.8).unwrap();
        assert_eq!(t.axis, 1);
        assert_eq!(t.y, Site::ORIGIN);
        assert_eq!(t.x, Site::from_coords(&[0, -1, 0]));
        assert_eq!((t.omega_xy, t.omega_yx), (0.8, 0.9));
    }

    #[test]
    fn scan_finds_installed_trap() {
        let mut env = FixedEnvironment::uniform(3);
        let x = Site::from_coords(&[2, 0, 0]);
        env.set_edge(x, 2, 0.9, 0.8);
        let idx = TrapIndex::scan(&env, [x, Site::ORIGIN]).unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.partner(&x), Some(x.step(2, 3)));
        let edges: Vec<(Site, usize)> = (0..6).map(|dir| (x, dir)).collect();
        assert_eq!(find_traps(&env, &edges).len(), 1);
    }

    #[test]
    fn scan_agrees_with_direct_formula_on_random_windows() {
        let alpha = AlphaParams::new(3, vec![0.15, 0.05, 0.05, 0.05, 0.05, 0.05]).unwrap();
        for seed in 0..5 {
            let env = DirichletEnvironment::new(alpha.clone(), seed);
            let mut sites = Vec::new();
            for a in -6..=6 {
                for b in -6..=6 {
                    for c in -6..=6 {
                        sites.push(Site::from_coords(&[a, b, c]));
                    }
                }
            }
            let idx = TrapIndex::scan(&env, sites.iter().copied()).unwrap();
            for x in &sites {
                for dir in 0..6 {
                    let y = x.step(dir, 3);
                    let (w1, w2) = (env.omega(x, dir), env.omega(&y, opposite(dir, 3)));
                    let direct = w1 + w2 > 1.5;
                    assert_eq!(direct, idx.partner(x) == Some(y), "{x:?} dir {dir}");
                    if direct {
                        assert_eq!(idx.trap_of(x).unwrap().strength, 1.0 / ((1.0 - w1) + (1.0 - w2)));
                    }
                }
            }
        }
    }
}
