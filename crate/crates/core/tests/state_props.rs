use annihilate::state::{Coloring, CompleteKernel, Configuration, GraphKind, SystemKind, Topology};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn topology(star: bool, n: usize, neighbor: bool) -> Topology {
    let kind = if star { GraphKind::Star } else { GraphKind::Complete };
    let t = Topology::new(kind, n).unwrap();
    if neighbor {
        t.with_kernel(CompleteKernel::Neighbor)
    } else {
        t
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn invariants_survive_random_steps(
        star in any::<bool>(),
        neighbor in any::<bool>(),
        two in any::<bool>(),
        alternating in any::<bool>(),
        n in 1usize..12,
        p in 0.5f64..=1.0,
        seed in any::<u64>(),
    ) {
        let topo = topology(star, n, neighbor);
        let system = if two { SystemKind::TwoType } else { SystemKind::OneType };
        let p = if two { p } else { 0.5 };
        let coloring = if alternating { Coloring::Alternating } else { Coloring::RandomBalanced };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut config = Configuration::new(topo, system, coloring, &mut rng);
        prop_assert_eq!(config.total(), 2 * n);
        for _ in 0..400 {
            if config.is_empty() {
                break;
            }
            let before = config.total();
            let mover = config.sample_mover(p, &mut rng);
            let from = config.position(mover);
            let outcome = config.move_and_resolve(mover, &mut rng);
            prop_assert_eq!(outcome.from, from);
            prop_assert!(topo.neighbors(from).contains(&outcome.moved_to) || outcome.moved_to == from);
            let after = config.total();
            prop_assert_eq!(after, if outcome.collided { before - 2 } else { before });
            if two {
                prop_assert_eq!(config.red_count(), config.blue_count());
            }
            if !two {
                prop_assert!((0..topo.site_count()).all(|s| config.count_at(s) <= 1));
            }
            if let Err(e) = config.check_invariants() {
                return Err(TestCaseError::fail(e));
            }
        }
    }

    #[test]
    fn star_collisions_touch_the_core(n in 1usize..10, p in 0.5f64..=1.0, seed in any::<u64>()) {
        let topo = Topology::star(n).unwrap();
        let core = topo.core().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut config = Configuration::new(topo, SystemKind::TwoType, Coloring::RandomBalanced, &mut rng);
        while !config.is_empty() {
            let mover = config.sample_mover(p, &mut rng);
            let o = config.move_and_resolve(mover, &mut rng);
            prop_assert!(o.from == core || o.moved_to == core);
            if o.collided {
                prop_assert!(o.moved_to == core || o.from == core);
            }
            if o.core_departure_without_collision {
                prop_assert_eq!(o.from, core);
                prop_assert!(!o.collided);
            }
        }
    }
}
