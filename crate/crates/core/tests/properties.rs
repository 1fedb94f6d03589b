mod common;

use proptest::prelude::*;
use signet::dynamics::{
    transition_distribution, AcceptanceGate, Change, EdgeConfig, GateScope, Params, TransitionKind, TransitionTable,
};
use signet::energy::{pairwise_energy, total_triad_energy, NodeState, NormalizationMode};
use signet::engine::{rng_for, run, InitialConditions, NetworkState, Rules, RunConfig};
use signet::graph::{Sign, SignedGraph};

fn arb_params() -> impl Strategy<Value = Params> {
    (0.0f64..20.0, 0.0f64..1.0, 0.0f64..20.0, 0.1f64..20.0, 0.0f64..=1.0).prop_map(
        |(beta, ratio, kappa, delta, alpha)| Params {
            beta,
            beta_a: ratio * beta * 0.99,
            kappa,
            delta,
            dt: 0.001,
            alpha,
        },
    )
}

proptest! {
    #[test]
    fn outcome_rows_are_distributions(p in arb_params()) {
        prop_assume!(p.validate().is_ok());
        for c in EdgeConfig::unordered_linked() {
            let outs = transition_distribution(c, &p).unwrap();
            let sum: f64 = outs.iter().map(|o| o.probability).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-15, "{c}: {sum}");
            for o in &outs {
                prop_assert!(o.probability >= 0.0);
                let changed = [o.target.xi != c.xi, o.target.xj != c.xj, o.target.sign != c.sign];
                prop_assert_eq!(changed.iter().filter(|&&b| b).count(), 1);
                prop_assert_eq!(o.kind == TransitionKind::SignFlip, changed[2]);
            }
        }
    }

    #[test]
    fn pair_energy_symmetric(xi in 0usize..3, xj in 0usize..3, s in prop::sample::select(vec![Sign::Negative, Sign::Positive])) {
        let (a, b) = (NodeState::ALL[xi], NodeState::ALL[xj]);
        prop_assert_eq!(pairwise_energy(a, b, s), pairwise_energy(b, a, s));
    }

    #[test]
    fn triad_energy_minimal_iff_balanced(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = rng_for(seed);
        let (g, _) = common::random_instance(&mut rng, n, 1.0);
        let balanced = g.triads().all(|(i, j, k)| {
            g.sign(i, j).value() * g.sign(j, k).value() * g.sign(i, k).value() > 0
        });
        let e = total_triad_energy(&g, NormalizationMode::Binomial);
        prop_assert_eq!((e + 1.0).abs() < 1e-12, balanced);
    }

    #[test]
    fn complete_common_sum_bounded(seed in any::<u64>(), n in 3usize..40) {
        let mut rng = rng_for(seed);
        let (g, _) = common::random_instance(&mut rng, n, 1.0);
        for i in 0..n.min(5) {
            for j in i + 1..n {
                prop_assert!(g.common_sign_product_sum(i, j).unsigned_abs() as usize <= n - 2);
            }
        }
    }

    #[test]
    fn rejected_flips_leave_state_untouched(seed in any::<u64>(), n in 4usize..20) {
        let mut rng = rng_for(seed);
        let (g, states) = common::random_instance(&mut rng, n, 0.8);
        prop_assume!(g.edge_count() > 0);
        let p = Params::default();
        let table = TransitionTable::new(&p).unwrap();
        let rules = Rules::default();
        let mut st = NetworkState::from_parts(g, states, NormalizationMode::Binomial).unwrap();
        for _ in 0..300 {
            let snapshot = st.clone();
            let edges: Vec<_> = st.graph().edges().map(|(i, j, _)| (i, j)).collect();
            let (i, j) = edges[rand::Rng::gen_range(&mut rng, 0..edges.len())];
            let outcome = table.sample(st.edge_config(i, j), &mut rng);
            let d = st.apply_with_acceptance(i, j, &outcome, p.alpha, &rules, &mut rng);
            if !d.accepted {
                prop_assert_eq!(st.graph().edges().collect::<Vec<_>>(), snapshot.graph().edges().collect::<Vec<_>>());
                prop_assert_eq!(st.states(), snapshot.states());
                prop_assert_eq!((st.pair_sum(), st.triad_sum()), (snapshot.pair_sum(), snapshot.triad_sum()));
            }
            prop_assert!(outcome.change != Change::FlipSign || d.kind == TransitionKind::SignFlip);
        }
        prop_assert!(st.caches_consistent());
    }
}

#[test]
fn no_alert_without_kappa() {
    let g = SignedGraph::complete(40, Sign::Positive);
    let p = Params { kappa: 0.0, ..Params::default() };
    let table = TransitionTable::new(&p).unwrap();
    for seed in 0..5 {
        let mut rng = rng_for(seed);
        let ic = InitialConditions { rho0: 0.3, r0: 0.6, seed, ..Default::default() };
        let mut st = NetworkState::initialize(&g, &ic, NormalizationMode::Binomial, &mut rng).unwrap();
        for _ in 0..50_000 {
            st.step(&table, &Rules::default(), &mut rng);
            assert_eq!(st.count(NodeState::Alert), 0);
        }
    }
}

#[test]
fn infected_non_increasing_without_infection() {
    let g = SignedGraph::complete(40, Sign::Positive);
    let p = Params { beta: 0.0, beta_a: 0.0, ..Params::default() };
    let table = TransitionTable::new(&p).unwrap();
    for scope in [GateScope::Flips, GateScope::All] {
        let mut rng = rng_for(9);
        let ic = InitialConditions { rho0: 0.5, r0: 0.5, ..Default::default() };
        let mut st = NetworkState::initialize(&g, &ic, NormalizationMode::Binomial, &mut rng).unwrap();
        let rules = Rules { scope, ..Rules::default() };
        let mut last = st.count(NodeState::Infected);
        for _ in 0..50_000 {
            st.step(&table, &rules, &mut rng);
            let now = st.count(NodeState::Infected);
            assert!(now <= last);
            last = now;
        }
    }
}

#[test]
fn run_is_deterministic() {
    let g = SignedGraph::complete(30, Sign::Positive);
    let cfg = RunConfig {
        steps: 20_000,
        sample_every: 500,
        rules: Rules { gate: AcceptanceGate::Total, ..Rules::default() },
        initial: InitialConditions { seed: 77, ..Default::default() },
        ..RunConfig::default()
    };
    let a = serde_json::to_string(&run(&g, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&g, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = RunConfig { initial: InitialConditions { seed: 78, ..cfg.initial }, ..cfg.clone() };
    assert_ne!(a, serde_json::to_string(&run(&g, &other).unwrap()).unwrap());
}
