use super::trajectory::Trajectory;

/// Rules deciding which finite-horizon renewals are trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfirmPolicy {
    /// Renewals dropped from the end of the list.
    pub k_discard: usize,
    /// Renewals within this many levels of the final record are dropped.
    pub safety_band: i64,
}

impl Default for ConfirmPolicy {
    fn default() -> Self {
        Self { k_discard: 2, safety_band: 20 }
    }
}

impl ConfirmPolicy {
    /// Number of leading renewals that survive the policy.
    pub fn confirmed(&self, levels: &[i64], max_level: i64) -> usize {
        let below = levels.partition_point(|&l| l <= max_level - self.safety_band);
        below.saturating_sub(self.k_discard)
    }
}

/// Renewal indices of a finite trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenewalLog {
    pub renewal_indices: Vec<usize>,
    /// e_1 level at each renewal.
    pub levels: Vec<i64>,
    /// Number of positions in the trajectory.
    pub horizon: usize,
    pub max_level: i64,
    pub confirmed_count: usize,
}

impl RenewalLog {
    pub fn confirmed(&self) -> &[usize] {
        &self.renewal_indices[..self.confirmed_count]
    }
}

/// Single-pass renewal detection over a stream of e_1 levels.
///
/// Candidates are kept on a stack of strict records; a new level evicts every
/// candidate at or above it.
#[derive(Clone, Debug, Default)]
pub struct StreamingRenewals {
    stack: Vec<(usize, i64)>,
    max_level: Option<i64>,
    len: usize,
}

impl StreamingRenewals {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, level: i64) {
        while let Some(&(_, l)) = self.stack.last() {
            if l >= level {
                self.stack.pop();
            } else {
                break;
            }
        }
        if self.max_level.is_none_or(|m| level > m) {
            self.stack.push((self.len, level));
            self.max_level = Some(level);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_level(&self) -> i64 {
        self.max_level.unwrap_or(0)
    }

    pub fn candidates(&self) -> &[(usize, i64)] {
        &self.stack
    }

    /// Candidates currently outside the safety band.
    pub fn settled(&self, band: i64) -> usize {
        let cut = self.max_level() - band;
        self.stack.partition_point(|&(_, l)| l <= cut)
    }

    pub fn finish(self, policy: &ConfirmPolicy) -> RenewalLog {
        let max_level = self.max_level();
        let (renewal_indices, levels): (Vec<usize>, Vec<i64>) = self.stack.into_iter().unzip();
        let confirmed_count = policy.confirmed(&levels, max_level);
        RenewalLog { renewal_indices, levels, horizon: self.len, max_level, confirmed_count }
    }
}

pub fn detect_renewals(traj: &Trajectory) -> RenewalLog {
    detect_renewals_with(traj, &ConfirmPolicy::default())
}

pub fn detect_renewals_with(traj: &Trajectory, policy: &ConfirmPolicy) -> RenewalLog {
    let mut s = StreamingRenewals::new();
    for l in traj.levels() {
        s.push(l);
    }
    s.finish(policy)
}

/// Quadratic check of the two-sided definition, for cross-validation.
pub fn brute_force_renewals(levels: &[i64]) -> Vec<usize> {
    (0..levels.len())
        .filter(|&n| {
            levels[..n].iter().all(|&l| l < levels[n]) && levels[n + 1..].iter().all(|&l| l > levels[n])
        })
        .collect()
}
