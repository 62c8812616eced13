use rustc_hash::FxHashMap;
use serde::Serialize;

use super::forget::ForgottenPath;
use super::trap::{Trap, TrapIndex};
use crate::lattice::Site;
use crate::walk::Trajectory;

/// Entry/exit census of one trap, relative to the first-entered vertex `x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct TrapConfiguration {
    /// 0-based axis of the edge.
    pub axis: usize,
    /// `y = x + e_axis` (as opposed to `x - e_axis`).
    pub forward: bool,
    pub n_xx: u32,
    pub n_xy: u32,
    pub n_yx: u32,
    pub n_yy: u32,
}

impl TrapConfiguration {
    pub fn n_x(&self) -> u32 {
        self.n_xx + self.n_yx
    }

    pub fn n_y(&self) -> u32 {
        self.n_xy + self.n_yy
    }

    pub fn n(&self) -> u32 {
        self.n_x() + self.n_y()
    }

    fn record(&mut self, from_x: bool, to_x: bool) {
        match (from_x, to_x) {
            (true, true) => self.n_xx += 1,
            (true, false) => self.n_xy += 1,
            (false, true) => self.n_yx += 1,
            (false, false) => self.n_yy += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrapStats {
    pub trap: Trap,
    /// Vertex through which the trap was first entered.
    pub first: Site,
    pub config: TrapConfiguration,
    pub entries: u32,
    /// Steps spent in `{x, y}` over complete visits.
    pub occupation: u64,
    /// Back-and-forth count of every visit.
    pub bounce_counts: Vec<u32>,
    pub delta_p: u64,
    /// Step index of the first entry.
    pub first_entry: usize,
}

#[derive(Clone, Debug, Default)]
pub struct TrapVisitReport {
    /// Sorted by trap position.
    pub stats: Vec<TrapStats>,
    /// Visits still running at the end of the trajectory.
    pub truncated_visits: usize,
}

fn new_stats(trap: Trap, first: Site, at: usize) -> TrapStats {
    TrapStats {
        trap,
        first,
        config: TrapConfiguration { axis: trap.axis, forward: first == trap.x, ..Default::default() },
        entries: 0,
        occupation: 0,
        bounce_counts: Vec::new(),
        delta_p: 0,
        first_entry: at,
    }
}

/// Per-trap visit statistics read directly off the trajectory.
///
/// A visit of run length `ℓ` contributes `H = ⌊(ℓ-1)/2⌋` round trips and an
/// overhead of `ℓ - 2H`, which is 1 when it leaves from its entry vertex and
/// 2 otherwise.
pub fn trap_visit_stats(traj: &Trajectory, traps: &TrapIndex) -> TrapVisitReport {
    let mut acc: FxHashMap<u32, TrapStats> = FxHashMap::default();
    // (trap id, entry vertex, entry index, run length, last vertex)
    let mut cur: Option<(u32, Site, usize, u64, Site)> = None;
    let close = |acc: &mut FxHashMap<u32, TrapStats>, (id, entry, at, len, exit): (u32, Site, usize, u64, Site)| {
        let st = acc.entry(id).or_insert_with(|| new_stats(*traps.trap(id), entry, at));
        let h = (len - 1) / 2;
        st.entries += 1;
        st.occupation += len;
        st.bounce_counts.push(h as u32);
        st.delta_p += len - 2 * h;
        let first = st.first;
        st.config.record(entry == first, exit == first);
    };
    for (n, p) in traj.positions().enumerate() {
        let id = traps.trap_id(&p);
        match (&mut cur, id) {
            (Some(c), Some(i)) if c.0 == i => {
                c.3 += 1;
                c.4 = p;
            }
            _ => {
                if let Some(c) = cur.take() {
                    close(&mut acc, c);
                }
                cur = id.map(|i| (i, p, n, 1, p));
            }
        }
    }
    let mut stats: Vec<TrapStats> = acc.into_values().collect();
    stats.sort_by_key(|a| (a.trap.x, a.trap.axis));
    TrapVisitReport { stats, truncated_visits: usize::from(cur.is_some()) }
}

/// Configurations recomputed from the entry/exit times of the forgotten path.
pub fn configurations_from_forgotten(fp: &ForgottenPath, traps: &TrapIndex) -> Vec<(Trap, TrapConfiguration)> {
    let sigma = &fp.positions;
    let mut first: FxHashMap<u32, (Site, TrapConfiguration)> = FxHashMap::default();
    let mut n = 0;
    while n < sigma.len() {
        let Some(id) = traps.trap_id(&sigma[n]) else {
            n += 1;
            continue;
        };
        // n is an entry time; find the matching exit time
        let t_in = n;
        let mut t_out = n;
        while t_out + 1 < sigma.len() && traps.trap_id(&sigma[t_out + 1]) == Some(id) {
            t_out += 1;
        }
        let t = traps.trap(id);
        let (x, cfg) = first.entry(id).or_insert_with(|| {
            (sigma[t_in], TrapConfiguration { axis: t.axis, forward: sigma[t_in] == t.x, ..Default::default() })
        });
        cfg.record(sigma[t_in] == *x, sigma[t_out] == *x);
        n = t_out + 1;
    }
    let mut out: Vec<(Trap, TrapConfiguration)> =
        first.into_iter().map(|(id, (_, c))| (*traps.trap(id), c)).collect();
    out.sort_by_key(|a| (a.0.x, a.0.axis));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[i32]) -> Site {
        Site::from_coords(c)
    }

    fn index() -> TrapIndex {
        let t = Trap::from_weights(s(&[1, 0]), 0, 2, 0.9, 0.8).unwrap();
        TrapIndex::from_traps(vec![t]).unwrap()
    }

    fn stats_of(p: &[Site]) -> TrapStats {
        let t = Trajectory::from_positions(2, p).unwrap();
        trap_visit_stats(&t, &index()).stats.remove(0)
    }

    #[test]
    fn in_and_straight_back_out() {
        let st = stats_of(&[s(&[0, 0]), s(&[1, 0]), s(&[0, 0])]);
        assert_eq!((st.config.n_xx, st.occupation, st.delta_p), (1, 1, 1));
        assert_eq!(st.bounce_counts, vec![0]);
    }

    #[test]
    fn through_crossing() {
        let st = stats_of(&[s(&[0, 0]), s(&[1, 0]), s(&[2, 0]), s(&[3, 0])]);
        assert_eq!((st.config.n_xy, st.occupation, st.delta_p), (1, 2, 2));
        assert_eq!(st.bounce_counts, vec![0]);
    }

    #[test]
    fn entry_from_far_side_sets_first_vertex() {
        let p = [s(&[0, 0]), s(&[0, 1]), s(&[1, 1]), s(&[2, 1]), s(&[2, 0]), s(&[1, 0]), s(&[2, 0]), s(&[3, 0])];
        let st = stats_of(&p);
        assert_eq!(st.first, s(&[2, 0]));
        assert!(!st.config.forward);
        assert_eq!(st.config.n_xx, 1);
        assert_eq!((st.occupation, st.bounce_counts.clone(), st.delta_p), (3, vec![1], 1));
    }

    #[test]
    fn truncated_visit_is_excluded() {
        let p = [s(&[0, 0]), s(&[1, 0]), s(&[0, 0]), s(&[1, 0]), s(&[2, 0])];
        let t = Trajectory::from_positions(2, &p).unwrap();
        let r = trap_visit_stats(&t, &index());
        assert_eq!(r.truncated_visits, 1);
        assert_eq!(r.stats[0].entries, 1);
    }
}
