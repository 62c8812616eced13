use serde::Serialize;

use super::kernel::{MaskedRegion, MAX_CELLS};
use super::lattice_sum::RegionShape;
use super::UNDERFLOW_CUTOFF;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::stats::KahanSum;

/// Weighted directed graph with an absorbing cemetery vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGraph {
    adj: Vec<Vec<(usize, f64)>>,
    cemetery: usize,
    labels: Vec<Option<Site>>,
}

impl FiniteGraph {
    /// Graph on `n` vertices, one of which is the cemetery.
    pub fn new(n: usize, cemetery: usize) -> Self {
        assert!(cemetery < n);
        Self { adj: vec![Vec::new(); n], cemetery, labels: vec![None; n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, w: f64) -> &mut Self {
        self.adj[from].push((to, w));
        self
    }

    pub fn set_label(&mut self, v: usize, site: Site) {
        self.labels[v] = Some(site);
    }

    pub fn label(&self, v: usize) -> Option<Site> {
        self.labels[v]
    }

    pub fn vertex_of(&self, site: &Site) -> Option<usize> {
        self.labels.iter().position(|l| l.as_ref() == Some(site))
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn cemetery(&self) -> usize {
        self.cemetery
    }

    pub fn out_edges(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Checks the structural invariants of a cemetery graph.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let bad = |m: String| Err(Error::Parameter(m));
        if !self.adj[self.cemetery].is_empty() {
            return bad("cemetery has outgoing edges".into());
        }
        for (v, edges) in self.adj.iter().enumerate() {
            if v == self.cemetery {
                continue;
            }
            let mut total = 0.0;
            for &(u, w) in edges {
                if u >= n || u == v {
                    return bad(format!("edge {v} -> {u} is out of range or a self-loop"));
                }
                if !(w > 0.0 && w <= 1.0) {
                    return bad(format!("edge {v} -> {u} has weight {w}"));
                }
                if u != self.cemetery && !self.adj[u].iter().any(|&(z, _)| z == v) {
                    return bad(format!("edge {v} -> {u} has no reverse"));
                }
                total += w;
            }
            if (total - 1.0).abs() > 1e-9 {
                return bad(format!("vertex {v} weights sum to {total}"));
            }
        }
        // every vertex must reach the cemetery: search backwards from it
        let mut rev = vec![Vec::new(); n];
        for (v, edges) in self.adj.iter().enumerate() {
            for &(u, _) in edges {
                rev[u].push(v);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.cemetery];
        seen[self.cemetery] = true;
        while let Some(v) = stack.pop() {
            for &u in &rev[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => bad(format!("vertex {v} cannot reach the cemetery")),
            None => Ok(()),
        }
    }
}

/// Path sum and enumeration statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PathSum {
    pub weight: f64,
    /// Paths reaching the border.
    pub paths: u64,
    /// Vertices expanded by the search.
    pub expansions: u64,
    /// Branches dropped for underflow.
    pub pruned: u64,
}

/// Sum of `ω_σ` over simple paths from `x` that stay in `lambda` and stop at
/// their first vertex outside it.
pub fn path_sum_finite(g: &FiniteGraph, x: usize, lambda: &[usize]) -> Result<PathSum> {
    let n = g.len();
    let mut inside = vec![false; n];
    for &v in lambda {
        inside[v] = true;
    }
    if !inside[x] {
        return Err(Error::Parameter(format!("start vertex {x} is not in the region")));
    }
    let cells: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    if cells.len() <= MAX_CELLS {
        let mut index = vec![usize::MAX; n];
        for (i, &v) in cells.iter().enumerate() {
            index[v] = i;
        }
        let mut region = MaskedRegion::with_cells(cells.len());
        for (i, &v) in cells.iter().enumerate() {
            for &(u, w) in &g.adj[v] {
                match inside[u] {
                    true => region.add_inner(i, index[u], w),
                    false => region.add_exit(i, w),
                }
            }
        }
        return Ok(region.path_sum(index[x]));
    }
    Ok(path_sum_dfs(g, x, &inside))
}

/// Iterative search for regions too large for the bitmask kernel.
fn path_sum_dfs(g: &FiniteGraph, x: usize, inside: &[bool]) -> PathSum {
    let n = g.len();
    let mut acc = KahanSum::default();
    let mut out = PathSum::default();
    let mut on_path = vec![false; n];
    // frame: (vertex, next edge, weight so far)
    let mut stack: Vec<(usize, usize, f64)> = vec![(x, 0, 1.0)];
    on_path[x] = true;
    out.expansions = 1;
    while let Some(top) = stack.last_mut() {
        let (v, i, w) = *top;
        if i == g.adj[v].len() {
            on_path[v] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let (u, wu) = g.adj[v][i];
        let nw = w * wu;
        if !inside[u] {
            acc.add(nw);
            out.paths += 1;
        } else if !on_path[u] {
            if nw < UNDERFLOW_CUTOFF {
                out.pruned += 1;
                continue;
            }
            on_path[u] = true;
            out.expansions += 1;
            stack.push((u, 0, nw));
        }
    }
    out.weight = acc.value();
    out
}

pub fn gamma_finite(g: &FiniteGraph, x: usize, lambda: &[usize]) -> Result<f64> {
    let s = path_sum_finite(g, x, lambda)?;
    if s.weight <= 0.0 {
        return Err(Error::Divergence(format!("no path from vertex {x} leaves the region")));
    }
    Ok(1.0 / s.weight)
}

/// Interior sites of `shape` around `center`, in lexicographic order of offsets.
pub(crate) fn interior_sites(center: &Site, d: usize, m: usize, shape: RegionShape) -> Vec<Site> {
    let r = m as i32 - 1;
    let side = (2 * r + 1) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut off = Site::ORIGIN;
        let mut c = code;
        for i in (0..d).rev() {
            off.0[i] = (c % side) as i32 - r;
            c /= side;
        }
        if shape.is_interior(&off, m) {
            let mut s = *center;
            for i in 0..d {
                s.0[i] += off.0[i];
            }
            out.push(s);
        }
    }
    out
}

/// Merges every site outside the region into a cemetery vertex.
///
/// Interior sites become vertices `0..k` and the cemetery is vertex `k`; the
/// cemetery edge of an interior site carries its total exit mass.
pub fn contract_region<E: Environment + ?Sized>(env: &E, center: &Site, m: usize, shape: RegionShape) -> FiniteGraph {
    let d = env.dim();
    let sites = interior_sites(center, d, m, shape);
    let k = sites.len();
    let mut g = FiniteGraph::new(k + 1, k);
    let lookup = |s: &Site| sites.binary_search(s).ok();
    for (v, s) in sites.iter().enumerate() {
        g.set_label(v, *s);
        let dist = env.site(s);
        let mut exit = 0.0;
        for dir in 0..2 * d {
            match lookup(&s.step(dir, d)) {
                Some(u) => {
                    g.add_edge(v, u, dist.prob(dir));
                }
                None => exit += dist.prob(dir),
            }
        }
        if exit > 0.0 {
            g.add_edge(v, k, exit);
        }
    }
    g
}

/// Contraction of the `‖·‖₁ < m` ball around `center`.
pub fn contract_to_finite<E: Environment + ?Sized>(env: &E, center: &Site, m: usize) -> FiniteGraph {
    contract_region(env, center, m, RegionShape::L1Ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AlphaParams, DirichletEnvironment};

    fn line_graph() -> FiniteGraph {
        // a=0, b=1, c1=2, c2=3, cemetery=4
        let mut g = FiniteGraph::new(5, 4);
        g.add_edge(0, 2, 0.4).add_edge(0, 1, 0.6);
        g.add_edge(1, 3, 0.5).add_edge(1, 0, 0.5);
        g.add_edge(2, 0, 0.5).add_edge(2, 4, 0.5);
        g.add_edge(3, 1, 0.5).add_edge(3, 4, 0.5);
        g
    }

    #[test]
    fn line_graph_gamma() {
        let g = line_graph();
        g.validate().unwrap();
        let gamma = gamma_finite(&g, 0, &[0, 1]).unwrap();
        assert!((gamma - 10.0 / 7.0).abs() < 1e-14);
        assert_eq!(path_sum_finite(&g, 0, &[0, 1]).unwrap().paths, 2);
    }

    #[test]
    fn singleton_region_and_star() {
        let g = line_graph();
        assert!((gamma_finite(&g, 0, &[0]).unwrap() - 1.0).abs() < 1e-15);
        let mut star = FiniteGraph::new(4, 3);
        star.add_edge(0, 1, 0.3).add_edge(0, 2, 0.7);
        star.add_edge(1, 0, 0.5).add_edge(1, 3, 0.5);
        star.add_edge(2, 0, 0.5).add_edge(2, 3, 0.5);
        star.validate().unwrap();
        assert!((gamma_finite(&star, 0, &[0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_region_diverges() {
        let mut g = FiniteGraph::new(3, 2);
        g.add_edge(0, 1, 1.0).add_edge(1, 0, 1.0);
        assert!(matches!(gamma_finite(&g, 0, &[0, 1]), Err(Error::Divergence(_))));
        assert!(g.validate().is_err());
    }

    #[test]
    fn validation_catches_defects() {
        let mut g = line_graph();
        g.add_edge(4, 0, 0.1);
        assert!(g.validate().is_err());
        let mut h = FiniteGraph::new(3, 2);
        h.add_edge(0, 1, 1.0).add_edge(1, 2, 1.0);
        assert!(h.validate().is_err(), "missing reverse edge");
    }

    #[test]
    fn contraction_sizes_and_mass() {
        let env = DirichletEnvironment::new(AlphaParams::symmetric(3, 0.4).unwrap(), 5);
        let c = Site::from_coords(&[4, -1, 2]);
        for m in 1..=3 {
            let g = contract_to_finite(&env, &c, m);
            let expected = interior_sites(&Site::ORIGIN, 3, m, RegionShape::L1Ball).len();
            assert_eq!(g.len(), expected + 1);
            g.validate().unwrap();
            for v in 0..g.len() - 1 {
                let s: f64 = g.out_edges(v).iter().map(|e| e.1).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        // #{x : |x|_1 < 3} in d = 3 is 1 + 6 + 18
        assert_eq!(contract_to_finite(&env, &c, 3).len(), 26);
    }

    /// Random connected graph on `n` vertices plus a cemetery, symmetric
    /// between non-cemetery vertices.
    fn random_graph(n: usize, seed: u64) -> FiniteGraph {
        use rand::Rng;
        let mut r = crate::rng::stream(seed, 0);
        let mut links = vec![Vec::new(); n];
        for v in 1..n {
            let u = r.random_range(0..v);
            links[v].push(u);
            links[u].push(v);
        }
        for v in 0..n {
            for u in v + 1..n {
                if r.random::<f64>() < 0.3 && !links[v].contains(&u) {
                    links[v].push(u);
                    links[u].push(v);
                }
            }
        }
        let mut g = FiniteGraph::new(n + 1, n);
        for (v, out) in links.iter().enumerate() {
            let exits = usize::from(v == 0 || r.random::<f64>() < 0.4);
            let raw: Vec<f64> = (0..out.len() + exits).map(|_| 0.05 + r.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            for (i, &u) in out.iter().enumerate() {
                g.add_edge(v, u, raw[i] / total);
            }
            if exits == 1 {
                g.add_edge(v, n, raw[out.len()] / total);
            }
        }
        g
    }

    /// Plain recursion: number of simple paths from `v` to the first vertex
    /// outside `inside`, and their weight.
    fn recursive_paths(g: &FiniteGraph, v: usize, inside: &[bool], seen: &mut Vec<usize>) -> (u64, f64) {
        let (mut count, mut weight) = (0, 0.0);
        for &(u, w) in g.out_edges(v) {
            if !inside[u] {
                count += 1;
                weight += w;
            } else if !seen.contains(&u) {
                seen.push(u);
                let (c, s) = recursive_paths(g, u, inside, seen);
                seen.pop();
                count += c;
                weight += w * s;
            }
        }
        (count, weight)
    }

    #[test]
    fn kernel_dfs_and_recursion_agree() {
        for seed in 0..200 {
            let n = 2 + seed as usize % 11;
            let g = random_graph(n, seed);
            g.validate().unwrap();
            let mut inside = vec![true; n + 1];
            inside[n] = false;
            let lambda: Vec<usize> = (0..n).collect();
            let kernel = path_sum_finite(&g, 0, &lambda).unwrap();
            let dfs = path_sum_dfs(&g, 0, &inside);
            let (count, weight) = recursive_paths(&g, 0, &inside, &mut vec![0]);
            assert_eq!(kernel.paths, count, "seed {seed}");
            assert_eq!(dfs.paths, count, "seed {seed}");
            assert!((kernel.weight - weight).abs() <= 1e-12 * weight, "seed {seed}");
            assert!((dfs.weight - weight).abs() <= 1e-12 * weight, "seed {seed}");
        }
    }
}
