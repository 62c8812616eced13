use super::trap::TrapIndex;
use crate::error::Result;
use crate::lattice::Site;
use crate::walk::Trajectory;

/// A trajectory with in-trap oscillations erased.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgottenPath {
    pub positions: Vec<Site>,
    /// Index in the source trajectory of every kept position.
    pub source: Vec<usize>,
    /// The source ended inside a trap; that final visit was dropped.
    pub truncated: bool,
}

impl ForgottenPath {
    pub fn to_trajectory(&self, d: usize) -> Result<Trajectory> {
        Trajectory::from_positions(d, &self.positions)
    }
}

/// Applies the `(t_i, s_i)` recursion.
///
/// From a kept time `t` at a trapped vertex `c`, `s` is the last time of the
/// current visit to the trap; the next kept time is `s + 1` when the visit
/// leaves from `c`, and `s` otherwise. Outside traps `s = t`.
pub fn forget_path(traj: &Trajectory, traps: &TrapIndex) -> ForgottenPath {
    let sigma = traj.to_positions();
    let last = sigma.len() - 1;
    let mut out = ForgottenPath { positions: Vec::new(), source: Vec::new(), truncated: false };
    let mut t = 0;
    loop {
        let c = sigma[t];
        let s = match traps.trap_id(&c) {
            None => t,
            Some(id) => {
                let mut n = t;
                while n < last && traps.trap_id(&sigma[n + 1]) == Some(id) {
                    n += 1;
                }
                if n == last {
                    out.truncated = true;
                    break;
                }
                n
            }
        };
        out.positions.push(c);
        out.source.push(t);
        if s == last {
            break;
        }
        t = if sigma[s] == c { s + 1 } else { s };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::FixedEnvironment;
    use crate::traps::trap::Trap;

    fn s(c: &[i32]) -> Site {
        Site::from_coords(c)
    }

    fn index() -> TrapIndex {
        let t = Trap::from_weights(s(&[1, 0]), 0, 2, 0.9, 0.8).unwrap();
        TrapIndex::from_traps(vec![t]).unwrap()
    }

    #[test]
    fn identity_without_traps() {
        let t = Trajectory::from_directions(2, vec![0, 1, 2, 0, 0]).unwrap();
        let f = forget_path(&t, &TrapIndex::default());
        assert_eq!(f.positions, t.to_positions());
        assert!(!f.truncated);
        let _ = FixedEnvironment::uniform(2);
    }

    #[test]
    fn oscillations_collapse() {
        // 0 -> x -> y -> x -> y -> z with x = (1,0), y = (2,0), z = (3,0)
        let p = [s(&[0, 0]), s(&[1, 0]), s(&[2, 0]), s(&[1, 0]), s(&[2, 0]), s(&[3, 0])];
        let t = Trajectory::from_positions(2, &p).unwrap();
        let f = forget_path(&t, &index());
        assert_eq!(f.positions, vec![p[0], p[1], p[2], p[5]]);
        assert_eq!(f.source, vec![0, 1, 4, 5]);
    }

    #[test]
    fn same_side_exit_keeps_one_point() {
        let p = [s(&[0, 0]), s(&[1, 0]), s(&[2, 0]), s(&[1, 0]), s(&[0, 0])];
        let t = Trajectory::from_positions(2, &p).unwrap();
        assert_eq!(forget_path(&t, &index()).positions, vec![p[0], p[1], p[4]]);
    }

    #[test]
    fn unfinished_visit_is_truncated() {
        let p = [s(&[0, 0]), s(&[1, 0]), s(&[2, 0])];
        let t = Trajectory::from_positions(2, &p).unwrap();
        let f = forget_path(&t, &index());
        assert!(f.truncated);
        assert_eq!(f.positions, vec![p[0]]);
    }
}
