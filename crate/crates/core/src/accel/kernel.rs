use super::graph::PathSum;
use super::UNDERFLOW_CUTOFF;
use crate::stats::KahanSum;

/// Largest region handled by the bitmask search.
pub(crate) const MAX_CELLS: usize = 128;

/// Region of at most `MAX_CELLS` cells with the exit mass of each cell
/// folded into a single number.
pub(crate) struct MaskedRegion {
    inner: Vec<Vec<(u8, f64)>>,
    exit: Vec<f64>,
    exit_paths: Vec<u64>,
}

impl MaskedRegion {
    pub(crate) fn with_cells(n: usize) -> Self {
        assert!(n <= MAX_CELLS);
        Self { inner: vec![Vec::new(); n], exit: vec![0.0; n], exit_paths: vec![0; n] }
    }

    pub(crate) fn add_inner(&mut self, from: usize, to: usize, w: f64) {
        self.inner[from].push((to as u8, w));
    }

    pub(crate) fn add_exit(&mut self, from: usize, w: f64) {
        self.exit[from] += w;
        self.exit_paths[from] += 1;
    }

    pub(crate) fn path_sum(&self, start: usize) -> PathSum {
        let mut offsets = Vec::with_capacity(self.inner.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for list in &self.inner {
            edges.extend(list.iter().map(|&(u, w)| (1u128 << u, u as u32, w)));
            offsets.push(edges.len());
        }
        let mut search = Search {
            offsets: &offsets,
            edges: &edges,
            exit: &self.exit,
            exit_paths: &self.exit_paths,
            acc: KahanSum::default(),
            out: PathSum::default(),
        };
        search.visit(start, 1u128 << start, 1.0);
        let mut out = search.out;
        out.weight = search.acc.value();
        out
    }
}

struct Search<'a> {
    offsets: &'a [usize],
    edges: &'a [(u128, u32, f64)],
    exit: &'a [f64],
    exit_paths: &'a [u64],
    acc: KahanSum,
    out: PathSum,
}

impl Search<'_> {
    fn visit(&mut self, v: usize, mask: u128, w: f64) {
        self.out.expansions += 1;
        if self.exit_paths[v] > 0 {
            self.acc.add(w * self.exit[v]);
            self.out.paths += self.exit_paths[v];
        }
        for i in self.offsets[v]..self.offsets[v + 1] {
            let (bit, u, wu) = self.edges[i];
            if mask & bit != 0 {
                continue;
            }
            let nw = w * wu;
            if nw < UNDERFLOW_CUTOFF {
                self.out.pruned += 1;
                continue;
            }
            self.visit(u as usize, mask | bit, nw);
        }
    }
}
