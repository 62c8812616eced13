use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};

/// A walk path from the origin, stored as one direction byte per step.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Trajectory {
    d: usize,
    dirs: Vec<u8>,
}

impl Trajectory {
    pub fn new(d: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&d));
        Self { d, dirs: Vec::new() }
    }

    pub fn with_capacity(d: usize, steps: usize) -> Self {
        let mut t = Self::new(d);
        t.dirs.reserve(steps);
        t
    }

    pub fn from_directions(d: usize, dirs: Vec<u8>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::Parameter(format!("dimension {d}")));
        }
        if let Some(&bad) = dirs.iter().find(|&&x| x as usize >= 2 * d) {
            return Err(Error::Parameter(format!("direction {bad} out of range for d={d}")));
        }
        Ok(Self { d, dirs })
    }

    /// Builds a trajectory from explicit positions; they must start at the
    /// origin and move by unit steps.
    pub fn from_positions(d: usize, positions: &[Site]) -> Result<Self> {
        let first = positions.first().ok_or_else(|| Error::Parameter("empty trajectory".into()))?;
        if *first != Site::ORIGIN {
            return Err(Error::Parameter("trajectory must start at the origin".into()));
        }
        let mut t = Self::with_capacity(d, positions.len() - 1);
        for w in positions.windows(2) {
            let dir = w[0]
                .direction_to(&w[1], d)
                .ok_or_else(|| Error::Parameter(format!("{:?} -> {:?} is not a unit step", w[0], w[1])))?;
            t.dirs.push(dir as u8);
        }
        Ok(t)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of positions (steps + 1).
    pub fn len(&self) -> usize {
        self.dirs.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.dirs.len()
    }

    pub fn directions(&self) -> &[u8] {
        &self.dirs
    }

    #[inline]
    pub fn push(&mut self, dir: usize) {
        debug_assert!(dir < 2 * self.d);
        self.dirs.push(dir as u8);
    }

    /// Keeps positions `0..=n`.
    pub fn truncate(&mut self, n: usize) {
        self.dirs.truncate(n);
    }

    pub fn positions(&self) -> impl Iterator<Item = Site> + '_ {
        let d = self.d;
        std::iter::once(Site::ORIGIN).chain(self.dirs.iter().scan(Site::ORIGIN, move |p, &dir| {
            *p = p.step(dir as usize, d);
            Some(*p)
        }))
    }

    /// e_1 coordinate of every position.
    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        let d = self.d;
        std::iter::once(0).chain(self.dirs.iter().scan(0i64, move |l, &dir| {
            if dir == 0 {
                *l += 1;
            } else if dir as usize == d {
                *l -= 1;
            }
            Some(*l)
        }))
    }

    pub fn position(&self, n: usize) -> Site {
        self.positions().nth(n).expect("index within trajectory")
    }

    pub fn last(&self) -> Site {
        self.positions().last().unwrap_or(Site::ORIGIN)
    }

    pub fn to_positions(&self) -> Vec<Site> {
        self.positions().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_roundtrip() {
        let pos: Vec<Site> = [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]
            .iter()
            .map(|c| Site::from_coords(c))
            .collect();
        let t = Trajectory::from_positions(2, &pos).unwrap();
        assert_eq!(t.to_positions(), pos);
        assert_eq!(t.levels().collect::<Vec<_>>(), vec![0, 1, 1, 0, 0]);
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn rejects_jumps_and_offset_starts() {
        let a = Site::from_coords(&[0, 0]);
        let b = Site::from_coords(&[2, 0]);
        assert!(Trajectory::from_positions(2, &[a, b]).is_err());
        assert!(Trajectory::from_positions(2, &[b]).is_err());
        assert!(Trajectory::from_directions(2, vec![4]).is_err());
    }
}
