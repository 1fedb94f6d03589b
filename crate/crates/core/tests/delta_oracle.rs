mod common;

use common::{delta_oracle_run, oracle_energies, pair_term, random_instance, x, Norm};
use proptest::prelude::*;
use signet::energy::{pairwise_energy, total_energy, NodeState, NormalizationMode};
use signet::engine::rng_for;
use signet::graph::Sign;

#[test]
fn pair_term_matches_table() {
    for xi in NodeState::ALL {
        for xj in NodeState::ALL {
            for a in [Sign::Negative, Sign::Zero, Sign::Positive] {
                let want = pair_term(x(xi), x(xj), i64::from(a.value()));
                assert_eq!(f64::from(pairwise_energy(xi, xj, a)), want, "{xi:?} {xj:?} {a:?}");
            }
        }
    }
}

#[test]
fn incremental_energies_match_recomputation() {
    let rep = delta_oracle_run(11, 3000);
    assert_eq!(rep.accepted, 3000);
    assert!(rep.max_total_err <= 1e-12, "{rep:?}");
    assert!(rep.max_delta_err <= 1e-12, "{rep:?}");
}

proptest! {
    #[test]
    fn full_energy_matches_oracle(seed in any::<u64>(), n in 3usize..25, density in 0.1f64..1.0) {
        let mut rng = rng_for(seed);
        let (g, states) = random_instance(&mut rng, n, density);
        for (mode, norm) in [(NormalizationMode::Binomial, Norm::Binomial), (NormalizationMode::Present, Norm::Present)] {
            let e = total_energy(&g, &states, 0.3, mode);
            let (p, t) = oracle_energies(&g, &states, norm);
            prop_assert!((e.e_pair - p).abs() < 1e-12);
            prop_assert!((e.e_triad - t).abs() < 1e-12);
            prop_assert!((e.e_total - (0.3 * t + 0.7 * p)).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_run_is_exact(seed in any::<u64>()) {
        let rep = delta_oracle_run(seed, 200);
        prop_assert!(rep.max_total_err <= 1e-12 && rep.max_delta_err <= 1e-12, "{:?}", rep);
    }
}
