use serde::{Deserialize, Serialize};

use super::graph::PathSum;
use super::kernel::{MaskedRegion, MAX_CELLS};
use super::UNDERFLOW_CUTOFF;
use crate::env::{Environment, SiteDistribution};
use crate::error::{Error, Result};
use crate::lattice::{opposite, Site};
use crate::stats::KahanSum;
use crate::traps::strength;

/// Largest `m` accepted without an explicit override.
pub const DEFAULT_M_MAX: usize = 2;

/// Region whose interior the paths of `γ^m` stay in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape {
    /// Interior `‖y - x‖∞ < m`; the border is the surface of `x + [-m, m]^d`.
    #[default]
    SupBox,
    /// Interior `‖y - x‖₁ < m`.
    L1Ball,
}

impl RegionShape {
    #[inline]
    pub fn is_interior(&self, offset: &Site, m: usize) -> bool {
        match self {
            RegionShape::SupBox => offset.sup_norm() < m as i64,
            RegionShape::L1Ball => offset.l1_norm() < m as i64,
        }
    }
}

/// Path sum over lattice offsets inside the region around `x`.
pub fn path_sum_lattice<E: Environment + ?Sized>(env: &E, x: &Site, m: usize, shape: RegionShape) -> Result<PathSum> {
    if m == 0 {
        return Err(Error::Parameter("m must be at least 1".into()));
    }
    let d = env.dim();
    let r = m as i32 - 1;
    let side = (2 * r + 1) as usize;
    let cells = side.pow(d as u32);
    let code = |off: &Site| -> usize {
        off.0[..d].iter().fold(0usize, |acc, &c| acc * side + (c + r) as usize)
    };
    let decode = |mut c: usize| -> Site {
        let mut off = Site::ORIGIN;
        for i in (0..d).rev() {
            off.0[i] = (c % side) as i32 - r;
            c /= side;
        }
        off
    };
    if cells <= MAX_CELLS {
        let mut region = MaskedRegion::with_cells(cells);
        for c in 0..cells {
            let off = decode(c);
            if !shape.is_interior(&off, m) {
                continue;
            }
            let mut site = *x;
            for i in 0..d {
                site.0[i] += off.0[i];
            }
            let law = env.site(&site);
            for dir in 0..2 * d {
                let next = off.step(dir, d);
                match shape.is_interior(&next, m) {
                    true => region.add_inner(c, code(&next), law.prob(dir)),
                    false => region.add_exit(c, law.prob(dir)),
                }
            }
        }
        return Ok(region.path_sum(code(&Site::ORIGIN)));
    }
    let mut laws: Vec<Option<SiteDistribution>> = vec![None; cells];
    let mut visited = vec![false; cells];
    let mut acc = KahanSum::default();
    let mut out = PathSum::default();
    // frame: (offset, next direction, weight so far)
    let mut stack: Vec<(Site, usize, f64)> = vec![(Site::ORIGIN, 0, 1.0)];
    visited[code(&Site::ORIGIN)] = true;
    laws[code(&Site::ORIGIN)] = Some(env.site(x));
    out.expansions = 1;
    while let Some(top) = stack.last_mut() {
        let (off, dir, w) = *top;
        if dir == 2 * d {
            visited[code(&off)] = false;
            stack.pop();
            continue;
        }
        top.1 += 1;
        let law = laws[code(&off)].expect("law cached on push");
        let nw = w * law.prob(dir);
        let next = off.step(dir, d);
        if !shape.is_interior(&next, m) {
            acc.add(nw);
            out.paths += 1;
            continue;
        }
        let c = code(&next);
        if visited[c] {
            continue;
        }
        if nw < UNDERFLOW_CUTOFF {
            out.pruned += 1;
            continue;
        }
        if laws[c].is_none() {
            let mut site = *x;
            for i in 0..d {
                site.0[i] += next.0[i];
            }
            laws[c] = Some(env.site(&site));
        }
        visited[c] = true;
        out.expansions += 1;
        stack.push((next, 0, nw));
    }
    out.weight = acc.value();
    Ok(out)
}

/// `γ^m(x)` over the sup-norm box, with the default `m` cap.
pub fn gamma_lattice<E: Environment + ?Sized>(env: &E, x: &Site, m: usize) -> Result<f64> {
    if m > DEFAULT_M_MAX {
        return Err(Error::Capability(format!("m = {m} exceeds m_max = {DEFAULT_M_MAX}")));
    }
    gamma_lattice_in(env, x, m, RegionShape::SupBox)
}

/// `γ^m(x)` for an explicit region shape, without the `m` cap.
pub fn gamma_lattice_in<E: Environment + ?Sized>(env: &E, x: &Site, m: usize, shape: RegionShape) -> Result<f64> {
    let s = path_sum_lattice(env, x, m, shape)?;
    if s.weight <= 0.0 {
        return Err(Error::Divergence(format!("no path from {x:?} reaches the border")));
    }
    Ok(1.0 / s.weight)
}

/// Largest edge strength formula over the neighbours of `x`.
pub fn gamma_partial<E: Environment + ?Sized>(env: &E, x: &Site) -> f64 {
    let d = env.dim();
    let here = env.site(x);
    (0..2 * d)
        .map(|dir| strength(here.prob(dir), env.omega(&x.step(dir, d), opposite(dir, d))))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AlphaParams, DirichletEnvironment, FixedEnvironment};

    #[test]
    fn m1_is_identically_one() {
        let env = DirichletEnvironment::new(AlphaParams::symmetric(3, 0.3).unwrap(), 1);
        for i in 0..20 {
            let x = Site::from_coords(&[i, -i, 2 * i]);
            assert!((gamma_lattice(&env, &x, 1).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_dimensional_m2_by_hand() {
        let mut env = FixedEnvironment::uniform(1);
        let at = |c| Site::from_coords(&[c]);
        env.set(at(0), SiteDistribution::new(&[0.3, 0.7]).unwrap());
        env.set(at(1), SiteDistribution::new(&[0.6, 0.4]).unwrap());
        env.set(at(-1), SiteDistribution::new(&[0.2, 0.8]).unwrap());
        let expected = 0.3 * 0.6 + 0.7 * 0.8;
        let g = gamma_lattice(&env, &at(0), 2).unwrap();
        assert!((g - 1.0 / expected).abs() < 1e-14);
    }

    #[test]
    fn cap_on_m() {
        let env = FixedEnvironment::uniform(2);
        assert!(matches!(gamma_lattice(&env, &Site::ORIGIN, 3), Err(Error::Capability(_))));
        assert!(gamma_lattice_in(&env, &Site::ORIGIN, 3, RegionShape::SupBox).is_ok());
    }

    #[test]
    fn partial_acceleration_cases() {
        let mut env = FixedEnvironment::uniform(3);
        env.set_edge(Site::ORIGIN, 0, 0.9, 0.8);
        assert!((gamma_partial(&env, &Site::ORIGIN) - 10.0 / 3.0).abs() < 1e-12);
        assert!(gamma_partial(&env, &Site::from_coords(&[0, 5, 0])) <= 2.0);
    }
}
