mod common;

use decseq::best_response::default_o2;
use decseq::infinite_horizon::{
    certificates_at, epsilon_optimal_pair, reference_pair, truncation_bound, value_iterate_o1, value_iterate_o2,
    EpsilonOptions, Role,
};
use decseq::model::{CostModel, LikelihoodTable, ObservationChannel, Variant};
use decseq::policy::{O2Policy, PostRule};
use decseq::wald::{solve_wald_finite, IterationOptions};
use decseq::Error;

use common::{spec, sym02};

fn opts() -> IterationOptions {
    IterationOptions::default()
}

#[test]
fn o1_limit_has_at_most_four_thresholds() {
    let s = spec(0.5, 0.2, 0.2, 0.01, 0.05, (1, 3), Variant::P1);
    let lim = value_iterate_o1(&default_o2(&s), &s, opts()).unwrap();
    assert!(lim.blank_runs() <= 1);
    let changes = lim.labels.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(changes <= 4);
    assert!(lim.deltas.last().unwrap() < &1e-9);
    assert!(lim.max_increase <= 1e-12);
}

#[test]
fn o2_limit_converges_in_p2() {
    let s = spec(0.5, 0.1, 0.2, 0.05, 0.05, (2, 2), Variant::P2);
    let r = reference_pair(&s, opts()).unwrap();
    let lim = value_iterate_o2(&r.o1, &s, opts(), 3).unwrap();
    assert_eq!(lim.classes.len(), 3);
    for c in &lim.classes {
        assert!(c.alpha <= c.beta + 1e-12);
    }
    let p1 = value_iterate_o2(&r.o1, &s.with_variant(Variant::P1).unwrap(), opts(), 3).unwrap();
    assert!(p1.classes.is_empty());
    assert_eq!(p1.post.w1, lim.post.w1);
}

#[test]
fn unsupported_inputs_are_rejected() {
    let s = spec(0.5, 0.2, 0.2, 0.05, 0.05, (1, 3), Variant::P1);
    let mut stationary: O2Policy = default_o2(&s);
    stationary.post = PostRule::Stationary { w1: 0.2, w2: 0.8 };
    assert!(matches!(value_iterate_o1(&stationary, &s, opts()), Err(Error::UnboundedPolicy)));
    let p2 = s.with_horizons(1, 3).unwrap().with_variant(Variant::P2).unwrap();
    assert!(matches!(value_iterate_o1(&default_o2(&p2), &p2, opts()), Err(Error::NonStationary(_))));
    let mut varying = s.clone();
    varying.channel2 = ObservationChannel {
        observer: 2,
        tables: vec![LikelihoodTable::symmetric(0.2), LikelihoodTable::symmetric(0.1), LikelihoodTable::symmetric(0.3)],
    };
    assert!(reference_pair(&varying, opts()).is_err());
    assert!(matches!(
        truncation_bound(Role::O2, 1.5, &CostModel::zero_one(0.1, 0.1), 2),
        Err(Error::InvalidArgument(_))
    ));
    assert!(epsilon_optimal_pair(&s, 0.0, EpsilonOptions::default()).is_err());
}

#[test]
fn certificates_vanish_with_the_horizon() {
    for v in [Variant::P1, Variant::P2] {
        let s = sym02((2, 2), v);
        let r = reference_pair(&s, opts()).unwrap();
        let tails: Vec<f64> = (1..=6)
            .map(|t| {
                let [a, b] = certificates_at(&s, &r, t).unwrap();
                assert_eq!(a.role, Role::O1);
                assert_eq!(b.role, Role::O2);
                a.tail_prob + b.tail_prob
            })
            .collect();
        assert!(tails.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{tails:?}");
        assert!(tails[5] < tails[0]);
        assert!(certificates_at(&s, &r, 0).is_err());
    }
}

#[test]
fn epsilon_pair_is_certified() {
    let s = sym02((2, 2), Variant::P1);
    let p = epsilon_optimal_pair(&s, 0.3, EpsilonOptions::default()).unwrap();
    assert!(p.epsilon <= 0.3);
    assert_eq!(p.solution.o1.horizon(), p.horizon);
    let again = certificates_at(&s, &p.reference, p.horizon).unwrap();
    assert_eq!(again, p.certificates);
    match epsilon_optimal_pair(&s, 1e-9, EpsilonOptions { max_horizon: 2, ..EpsilonOptions::default() }) {
        Err(Error::EpsilonUnattainable { requested, max_horizon, best }) => {
            assert_eq!(requested, 1e-9);
            assert_eq!(max_horizon, 2);
            assert!(best > requested);
        }
        other => panic!("expected failure, got {other:?}"),
    }
}

#[test]
fn reference_thresholds_bracket_finite_ones() {
    let s = sym02((2, 2), Variant::P1);
    let r = reference_pair(&s, opts()).unwrap();
    let fin = solve_wald_finite(&s.channel2, &s.costs, 40);
    assert!((r.w1 - fin.w1[0]).abs() < 1e-6);
    assert!((r.w2 - fin.w2[0]).abs() < 1e-6);
}
