//! Direct sampler of a single trapped edge, optionally conditioned on a
//! visit configuration.
//!
//! With `ε_x = 1 - ω(x,y)` and `ε_y = 1 - ω(y,x)`, the unconditioned pair is a
//! product of Beta(ᾱ - α(x,y), α(x,y)) and Beta(ᾱ - α(y,x), α(y,x)) laws,
//! restricted to `ε_x + ε_y < 1/2`. A configuration multiplies the density by
//! the likelihood of its entry/exit pattern.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::visits::TrapConfiguration;
use crate::env::{log_gamma_variate, AlphaParams};

/// `(ε_x, ε_y) -> (r, k)` with `ε_x = r(1+k)`, `ε_y = r(1-k)`.
pub fn to_rk(eps_x: f64, eps_y: f64) -> (f64, f64) {
    let r = 0.5 * (eps_x + eps_y);
    (r, (eps_x - eps_y) / (eps_x + eps_y))
}

pub fn from_rk(r: f64, k: f64) -> (f64, f64) {
    (r * (1.0 + k), r * (1.0 - k))
}

/// Exit laws `[p(x,x), p(x,y), p(y,x), p(y,y)]`: `p(a,b)` is the probability
/// that a visit entered at `a` leaves from `b`.
pub fn exit_probabilities(eps_x: f64, eps_y: f64) -> [f64; 4] {
    let den = eps_x + eps_y - eps_x * eps_y;
    [eps_x / den, eps_y * (1.0 - eps_x) / den, eps_x * (1.0 - eps_y) / den, eps_y / den]
}

/// Dirichlet weights seen by one oriented edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeLaw {
    pub alpha_xy: f64,
    pub alpha_yx: f64,
    pub alpha_bar: f64,
}

impl EdgeLaw {
    /// Edge along `axis`, with `y = x + e_axis` when `forward`.
    pub fn new(alpha: &AlphaParams, axis: usize, forward: bool) -> Self {
        let d = alpha.d();
        let (plus, minus) = (alpha.weights()[axis], alpha.weights()[axis + d]);
        let (alpha_xy, alpha_yx) = if forward { (plus, minus) } else { (minus, plus) };
        Self { alpha_xy, alpha_yx, alpha_bar: alpha.alpha_bar() }
    }

    /// Exponent of `r` in the conditioned density, plus one.
    pub fn kappa_j(&self) -> f64 {
        2.0 * self.alpha_bar - self.alpha_xy - self.alpha_yx
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSample {
    pub eps_x: f64,
    pub eps_y: f64,
    /// Importance weight (1 for rejection draws).
    pub weight: f64,
}

impl EdgeSample {
    pub fn strength(&self) -> f64 {
        1.0 / (self.eps_x + self.eps_y)
    }
}

/// Sampler of `(ε_x, ε_y)` given the trap event and an optional configuration.
#[derive(Clone, Debug)]
pub struct ConditionedEdgeSampler {
    law: EdgeLaw,
    config: TrapConfiguration,
    gx: (Gamma<f64>, Gamma<f64>),
    gy: (Gamma<f64>, Gamma<f64>),
    k_law: Beta<f64>,
}

fn boosted(shape: f64) -> Gamma<f64> {
    Gamma::new(if shape >= 1.0 { shape } else { shape + 1.0 }, 1.0).expect("positive shape")
}

impl ConditionedEdgeSampler {
    pub fn new(law: EdgeLaw, config: TrapConfiguration) -> Self {
        let a = config.n_x() as f64 + law.alpha_bar - law.alpha_xy - 1.0;
        let b = config.n_y() as f64 + law.alpha_bar - law.alpha_yx - 1.0;
        Self {
            law,
            config,
            gx: (boosted(law.alpha_bar - law.alpha_xy), boosted(law.alpha_xy)),
            gy: (boosted(law.alpha_bar - law.alpha_yx), boosted(law.alpha_yx)),
            k_law: Beta::new(a + 1.0, b + 1.0).expect("positive Beta parameters"),
        }
    }

    /// Unconditioned (no visits) sampler.
    pub fn unconditioned(law: EdgeLaw) -> Self {
        Self::new(law, TrapConfiguration::default())
    }

    pub fn law(&self) -> &EdgeLaw {
        &self.law
    }

    /// Beta(p, q) variate computed as `1 / (1 + G_q / G_p)` in log space.
    fn small_beta<R: Rng + ?Sized>(g: &(Gamma<f64>, Gamma<f64>), p: f64, q: f64, rng: &mut R) -> f64 {
        let lp = log_gamma_variate(&g.0, p, rng);
        let lq = log_gamma_variate(&g.1, q, rng);
        1.0 / (1.0 + (lq - lp).exp())
    }

    /// Likelihood of the configuration's entry/exit pattern.
    pub fn likelihood(&self, eps_x: f64, eps_y: f64) -> f64 {
        let p = exit_probabilities(eps_x, eps_y);
        let c = &self.config;
        p[0].powi(c.n_xx as i32) * p[1].powi(c.n_xy as i32) * p[2].powi(c.n_yx as i32) * p[3].powi(c.n_yy as i32)
    }

    /// Draws the two Beta marginals until the trap event holds, then thins by
    /// the configuration likelihood.
    pub fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R) -> EdgeSample {
        let l = &self.law;
        loop {
            let eps_x = Self::small_beta(&self.gx, l.alpha_bar - l.alpha_xy, l.alpha_xy, rng);
            let eps_y = Self::small_beta(&self.gy, l.alpha_bar - l.alpha_yx, l.alpha_yx, rng);
            if eps_x + eps_y >= 0.5 {
                continue;
            }
            if self.config.n() > 0 && rng.random::<f64>() >= self.likelihood(eps_x, eps_y) {
                continue;
            }
            return EdgeSample { eps_x, eps_y, weight: 1.0 };
        }
    }

    /// Proposal `r ∝ r^{κ_j-1}` on `(0, 1/4)` and `(1+k)/2` Beta-distributed,
    /// weighted by the remaining factor of the density.
    pub fn sample_importance<R: Rng + ?Sized>(&self, rng: &mut R) -> EdgeSample {
        let l = &self.law;
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let r = 0.25 * u.powf(1.0 / l.kappa_j());
        let k = 2.0 * self.k_law.sample(rng) - 1.0;
        let (eps_x, eps_y) = from_rk(r, k);
        EdgeSample { eps_x, eps_y, weight: self.h(eps_x, eps_y) }
    }

    /// Correction factor of the `(r, k)` density.
    pub fn h(&self, eps_x: f64, eps_y: f64) -> f64 {
        let l = &self.law;
        let c = &self.config;
        let ln = (c.n_xy as f64 + l.alpha_xy - 1.0) * (-eps_x).ln_1p()
            + (c.n_yx as f64 + l.alpha_yx - 1.0) * (-eps_y).ln_1p()
            - c.n() as f64 * (-(eps_x * eps_y) / (eps_x + eps_y)).ln_1p();
        ln.exp()
    }
}
