//! Lattice points and direction indexing.
//!
//! Directions are indexed `0..2d`: index `j < d` is `+e_{j+1}` and index
//! `j + d` is `-e_{j+1}`, the same layout as the Dirichlet weight vector.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{Hash, Hasher};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Site(pub [i32; MAX_DIM]);

impl Hash for Site {
    #[inline]
    fn hash<H: Hasher>(&self, state: &mut H) {
        let c = &self.0;
        let pack = |a: i32, b: i32| (a as u32 as u64) | ((b as u32 as u64) << 32);
        state.write_u64(pack(c[0], c[1]));
        state.write_u64(pack(c[2], c[3]));
        state.write_u64(pack(c[4], c[5]));
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(1, |i| i + 1);
        f.debug_tuple("Site").field(&&self.0[..last]).finish()
    }
}

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    pub fn from_coords(coords: &[i32]) -> Site {
        assert!(coords.len() <= MAX_DIM, "dimension above MAX_DIM");
        let mut s = [0; MAX_DIM];
        s[..coords.len()].copy_from_slice(coords);
        Site(s)
    }

    #[inline]
    pub fn level(&self) -> i64 {
        self.0[0] as i64
    }

    #[inline]
    pub fn step(&self, dir: usize, d: usize) -> Site {
        let mut s = *self;
        if dir < d {
            s.0[dir] += 1;
        } else {
            s.0[dir - d] -= 1;
        }
        s
    }

    pub fn coords(&self, d: usize) -> &[i32] {
        &self.0[..d]
    }

    pub fn sub(&self, other: &Site) -> Site {
        let mut s = *self;
        for (a, b) in s.0.iter_mut().zip(other.0.iter()) {
            *a -= *b;
        }
        s
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64).abs()).sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64).abs()).max().unwrap_or(0)
    }

    /// Direction index leading from `self` to the neighbour `other`, if adjacent.
    pub fn direction_to(&self, other: &Site, d: usize) -> Option<usize> {
        let diff = other.sub(self);
        if diff.l1_norm() != 1 {
            return None;
        }
        let axis = diff.0.iter().position(|&c| c != 0)?;
        if axis >= d {
            return None;
        }
        Some(if diff.0[axis] > 0 { axis } else { axis + d })
    }
}

#[inline]
pub fn opposite(dir: usize, d: usize) -> usize {
    if dir < d {
        dir + d
    } else {
        dir - d
    }
}

/// Axis (0-based) of a direction index.
#[inline]
pub fn axis(dir: usize, d: usize) -> usize {
    if dir < d {
        dir
    } else {
        dir - d
    }
}
