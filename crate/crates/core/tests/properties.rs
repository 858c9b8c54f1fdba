mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::*;
use djam::djam::{run_djam, InitPolicy, Schedule, SimState};
use djam::losses::resolvent;
use djam::oracle::{solve_sync_jacobi, ORACLE_TOL};
use djam::rng::sim_rng;
use djam::{Loss, Network, PersonalLoss};

fn random_loss(seed: u64, huber: bool) -> Loss {
    let mut rng = sim_rng(seed);
    if huber {
        random_huber(&mut rng).into()
    } else {
        random_quadratic(1 + (seed % 3) as usize, &mut rng).into()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_respects_declared_constants(seed in any::<u64>(), huber in any::<bool>()) {
        let loss = random_loss(seed, huber);
        let (m, big_m) = (loss.strong_convexity(), loss.grad_lipschitz());
        prop_assert!(0.0 < m && m <= big_m);
        let mut rng = sim_rng(seed ^ 1);
        for _ in 0..1000 {
            let x = random_vector(loss.dim(), 6.0, &mut rng);
            let y = random_vector(loss.dim(), 6.0, &mut rng);
            let dg = loss.gradient(&x) - loss.gradient(&y);
            let dx = &x - &y;
            let slack = 1e-12 * (1.0 + dx.norm_squared());
            prop_assert!(dg.dot(&dx) >= m * dx.norm_squared() - slack);
            prop_assert!(dg.norm() <= big_m * dx.norm() + slack);
        }
    }

    #[test]
    fn resolvent_is_sandwiched(seed in any::<u64>(), huber in any::<bool>(), w in 0.0f64..20.0) {
        let loss = random_loss(seed, huber);
        let (m, big_m) = (loss.strong_convexity(), loss.grad_lipschitz());
        let mut rng = sim_rng(seed ^ 2);
        let a = random_vector(loss.dim(), 10.0, &mut rng);
        let b = random_vector(loss.dim(), 10.0, &mut rng);
        let d = (resolvent(&loss, w, &a).unwrap() - resolvent(&loss, w, &b).unwrap()).norm();
        let gap = (a - b).norm();
        prop_assert!(d <= gap / (m + w) + 2e-12);
        prop_assert!(d >= gap / (big_m + w) - 2e-12);
    }

    #[test]
    fn network_invariants(seed in any::<u64>(), n in 1usize..25, extra in 0.0f64..0.6) {
        let mut rng = sim_rng(seed);
        let net = random_network(n, 1, extra, &mut rng);
        let degree_sum: usize = (0..n).map(|j| net.degree(j)).sum();
        prop_assert_eq!(degree_sum, 2 * net.num_edges());
        for j in 0..n {
            for nb in net.neighbors(j) {
                prop_assert_eq!(net.weight(j, nb.agent), net.weight(nb.agent, j));
                prop_assert_eq!(net.neighbor_slot(nb.agent, j).map(|s| net.neighbors(nb.agent)[s].agent), Some(j));
            }
        }
        let again = Network::from_edge_list(&net.to_edge_list(), n, 1).unwrap();
        prop_assert_eq!(again, net);
    }

    #[test]
    fn solution_is_absorbing_and_v_is_bounded(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = sim_rng(seed);
        let net = random_network(n, 1, 0.3, &mut rng);
        let losses = mixed_losses(n, &mut rng);
        let star = solve_sync_jacobi(&net, &losses, ORACLE_TOL, 1_000_000).unwrap().theta_star;
        let sched = Schedule::uniform(&net, seed).unwrap();

        let mut at_star = SimState::new(&net, &InitPolicy::PerAgent(star.clone())).unwrap();
        let mut srng = sched.rng();
        let trace = run_djam(&mut at_star, &net, &losses, &sched, &mut srng, 300, Some(&star)).unwrap();
        prop_assert!(trace.v_series().iter().all(|&v| v <= 1e-12));

        let mut init = BTreeMap::new();
        for i in 0..n {
            for nb in net.neighbors(i) {
                init.insert((i, nb.agent), random_vector(1, 8.0, &mut rng));
            }
        }
        let mut st = SimState::new(&net, &InitPolicy::Explicit(init)).unwrap();
        let mut srng = sched.rng();
        let v = run_djam(&mut st, &net, &losses, &sched, &mut srng, 500, Some(&star)).unwrap().v_series();
        prop_assert!(v.iter().all(|&x| x <= v[0] + 1e-10));
    }
}
