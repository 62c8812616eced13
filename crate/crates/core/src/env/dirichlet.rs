use rand::distr::OpenClosed01;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Smallest probability a sampled component may take.
pub const MIN_COMPONENT: f64 = 1e-300;

/// Logarithm of a Gamma(`shape`, 1) variate.
///
/// For `shape < 1` this uses `G(a) = G(a + 1) · U^{1/a}`, which keeps the
/// logarithm finite even when the variate itself underflows.
pub fn log_gamma_variate<R: Rng + ?Sized>(boosted: &Gamma<f64>, shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        boosted.sample(rng).ln()
    } else {
        let u: f64 = rng.sample(OpenClosed01);
        boosted.sample(rng).ln() + u.ln() / shape
    }
}

/// Gamma sampler used by [`log_gamma_variate`] for a given shape.
pub(crate) fn gamma_for(shape: f64) -> Gamma<f64> {
    let s = if shape >= 1.0 { shape } else { shape + 1.0 };
    Gamma::new(s, 1.0).expect("positive shape")
}

/// Draws a Dirichlet(`alpha`) vector into `out`.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R, out: &mut [f64]) {
    let gammas: Vec<Gamma<f64>> = alpha.iter().map(|&a| gamma_for(a)).collect();
    sample_with(&gammas, alpha, rng, out);
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    gammas: &[Gamma<f64>],
    alpha: &[f64],
    rng: &mut R,
    out: &mut [f64],
) {
    let mut max = f64::NEG_INFINITY;
    for ((o, g), &a) in out.iter_mut().zip(gammas).zip(alpha) {
        *o = log_gamma_variate(g, a, rng);
        max = max.max(*o);
    }
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o = (*o / total).max(MIN_COMPONENT);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn tiny_weights_stay_on_the_simplex() {
        let mut r = rng::stream(11, 0);
        let alpha = [0.001; 6];
        let mut out = [0.0; 6];
        for _ in 0..10_000 {
            sample_dirichlet(&alpha, &mut r, &mut out);
            let s: f64 = out.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(out.iter().all(|&p| p > 0.0 && p <= 1.0));
        }
    }

    #[test]
    fn log_gamma_mean_matches_shape() {
        let mut r = rng::stream(12, 0);
        for shape in [0.05, 0.5, 2.5] {
            let g = gamma_for(shape);
            let n = 200_000;
            let mean = (0..n).map(|_| log_gamma_variate(&g, shape, &mut r).exp()).sum::<f64>() / n as f64;
            let se = (shape / n as f64).sqrt();
            assert!((mean - shape).abs() < 4.0 * se, "shape {shape}: mean {mean}");
        }
    }
}
