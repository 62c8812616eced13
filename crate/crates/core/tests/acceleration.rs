use rwde_core::accel::{
    contract_region, contract_to_finite, gamma_finite, gamma_lattice, gamma_lattice_in, simulate_accelerated, AccelConfig,
    RegionShape,
};
use rwde_core::env::{AlphaParams, DirichletEnvironment};
use rwde_core::rng;
use rwde_core::stats::{kolmogorov_survival, ks_one_sample};
use rwde_core::Site;

fn interior(n: usize) -> Vec<usize> {
    (0..n - 1).collect()
}

#[test]
fn lattice_and_contracted_gammas_agree() {
    for i in 0..12u64 {
        let d = 2 + (i % 2) as usize;
        let weights: Vec<f64> = {
            let mut r = rng::stream(i, 1);
            (0..2 * d).map(|_| 0.05 + 0.5 * rand::Rng::random::<f64>(&mut r)).collect()
        };
        let env = DirichletEnvironment::new(AlphaParams::new(d, weights).unwrap(), rng::derive(7, &[i]));
        let x = Site::from_coords(&[i as i32, -3, 1][..d]);
        for m in 1..=2 {
            let g = contract_to_finite(&env, &x, m);
            let a = gamma_lattice_in(&env, &x, m, RegionShape::L1Ball).unwrap();
            let b = gamma_finite(&g, g.vertex_of(&x).unwrap(), &interior(g.len())).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "l1 d={d} m={m}: {a} vs {b}");
            if d == 2 {
                let g = contract_region(&env, &x, m, RegionShape::SupBox);
                let centre = g.vertex_of(&x).unwrap();
                let a = gamma_lattice(&env, &x, m).unwrap();
                let b = gamma_finite(&g, centre, &interior(g.len())).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "box d={d} m={m}: {a} vs {b}");
            }
        }
        assert!((gamma_lattice(&env, &x, 1).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn accelerated_time_matches_the_occupation_sum() {
    let env = DirichletEnvironment::new(AlphaParams::new(2, vec![0.4, 0.2, 0.2, 0.2]).unwrap(), 21);
    let a = simulate_accelerated(&env, &AccelConfig::new(2), 20_000, 5).unwrap();
    let mean: f64 = a.rates.iter().map(|g| 1.0 / g).sum();
    let sd = a.rates.iter().map(|g| 1.0 / (g * g)).sum::<f64>().sqrt();
    let total = *a.jump_times.last().unwrap();
    assert!((total - mean).abs() <= 4.0 * sd, "{total} vs {mean} ± {sd}");
    let e: Vec<f64> = a.holding_times().zip(&a.rates).map(|(h, g)| h * g).collect();
    let ks = ks_one_sample(&e, |x| 1.0 - (-x).exp());
    assert!(kolmogorov_survival(ks * (e.len() as f64).sqrt()) >= 0.001, "ks {ks}");
    assert!(a.rates.iter().all(|&g| g >= 1.0 - 1e-12));
}
