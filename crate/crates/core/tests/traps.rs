use proptest::prelude::*;
use rwde_core::env::{AlphaParams, DirichletEnvironment, FixedEnvironment, SiteDistribution};
use rwde_core::rng;
use rwde_core::stats::{ks_discrete, kolmogorov_survival};
use rwde_core::traps::{forget_path, trap_visit_stats, ConditionedEdgeSampler, EdgeLaw, TrapConfiguration, TrapIndex};
use rwde_core::walk::{Trajectory, Walker};
use rwde_core::Site;

fn walk(env: &DirichletEnvironment, seed: u64, n: usize) -> Trajectory {
    let mut w = Walker::new(env, rng::stream(seed, rng::tag::WALK));
    let mut t = Trajectory::new(env.alpha().d());
    w.run(n, &mut t).unwrap();
    t
}

fn visited(env: &DirichletEnvironment, t: &Trajectory) -> TrapIndex {
    let mut s: Vec<Site> = t.positions().collect();
    s.sort();
    s.dedup();
    TrapIndex::scan(env, s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forgotten_paths_are_nearest_neighbour_subsequences(env_seed in any::<u64>(), walk_seed in any::<u64>(), n in 1usize..3000) {
        let env = DirichletEnvironment::new(AlphaParams::new(2, vec![0.3, 0.1, 0.1, 0.1]).unwrap(), env_seed);
        let t = walk(&env, walk_seed, n);
        let traps = visited(&env, &t);
        let f = forget_path(&t, &traps);
        prop_assert!(f.source.windows(2).all(|w| w[0] < w[1]));
        for (p, &s) in f.positions.iter().zip(&f.source) {
            prop_assert_eq!(*p, t.position(s));
        }
        prop_assert!(f.to_trajectory(2).is_ok());
        for w in f.positions.windows(3) {
            let same_trap = traps.trap_id(&w[0]).is_some() && traps.trap_id(&w[0]) == traps.trap_id(&w[1]);
            prop_assert!(!(same_trap && w[2] == w[0]), "oscillation kept at {:?}", w);
        }
        let none = TrapIndex::from_traps(Vec::new()).unwrap();
        prop_assert_eq!(forget_path(&t, &none).positions, t.to_positions());
    }

    #[test]
    fn occupation_splits_into_round_trips_and_overhead(env_seed in any::<u64>(), walk_seed in any::<u64>()) {
        let env = DirichletEnvironment::new(AlphaParams::new(2, vec![0.3, 0.1, 0.1, 0.1]).unwrap(), env_seed);
        let t = walk(&env, walk_seed, 2000);
        for s in trap_visit_stats(&t, &visited(&env, &t)).stats {
            let h: u64 = s.bounce_counts.iter().map(|&b| b as u64).sum();
            prop_assert_eq!(s.occupation, 2 * h + s.delta_p);
            prop_assert_eq!(s.entries as usize, s.bounce_counts.len());
            prop_assert_eq!(s.config.n(), s.entries);
        }
    }
}

#[test]
fn bounces_in_a_frozen_trap_are_geometric() {
    let (w_xy, w_yx) = (0.9, 0.8);
    let mut env = FixedEnvironment::new(SiteDistribution::uniform(2));
    let x = Site::ORIGIN;
    env.set_edge(x, 0, w_xy, w_yx);
    let q = w_xy * w_yx;
    let mut all = Vec::new();
    let mut seed = 0;
    while all.len() < 20_000 {
        let mut w = Walker::new(&env, rng::stream(seed, rng::tag::WALK));
        let mut t = Trajectory::new(2);
        w.run(400, &mut t).unwrap();
        let traps = TrapIndex::scan(&env, [x, x.step(0, 2)]).unwrap();
        for s in trap_visit_stats(&t, &traps).stats {
            all.extend(s.bounce_counts.iter().map(|&b| b as u64));
        }
        seed += 1;
    }
    let ks = ks_discrete(&all, |k| 1.0 - q.powi(k as i32 + 1));
    let p = kolmogorov_survival(ks * (all.len() as f64).sqrt());
    assert!(p >= 0.001, "ks {ks}, p {p}");
}

#[test]
fn importance_and_rejection_agree_on_a_configuration() {
    let alpha = AlphaParams::new(3, vec![0.15, 0.05, 0.05, 0.05, 0.05, 0.05]).unwrap();
    let cfg = TrapConfiguration { axis: 0, forward: true, n_xx: 2, n_xy: 1, ..Default::default() };
    let s = ConditionedEdgeSampler::new(EdgeLaw::new(&alpha, 0, true), cfg);
    let mut r = rng::stream(3, 0);
    let n = 40_000;
    let rej: f64 = (0..n).map(|_| s.sample_rejection(&mut r).strength().ln()).sum::<f64>() / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..n {
        let e = s.sample_importance(&mut r);
        num += e.weight * e.strength().ln();
        den += e.weight;
    }
    assert!((rej - num / den).abs() < 0.05, "{rej} vs {}", num / den);
}
