mod common;

use decseq::belief::{bayes, predictive};
use decseq::model::{terminal_cost, CostModel, LikelihoodTable, ObservationChannel};
use decseq::oracle::enumerate_stopping_rules;
use decseq::wald::{solve_wald_finite, solve_wald_infinite, wald_cost, IterationOptions};
use proptest::prelude::*;

use common::{sym, table};

/// Plain backward recursion evaluated at a single belief.
fn pointwise(ch: &ObservationChannel, costs: &CostModel, pi: f64, left: usize, k: usize) -> f64 {
    let stop = terminal_cost(0, pi, costs).min(terminal_cost(1, pi, costs));
    if left == 0 {
        return stop;
    }
    let tab = ch.at(k + 1);
    let mut go = costs.c2;
    for y in 0..tab.alphabet() {
        let p = predictive(pi, y, tab);
        if p > 0.0 {
            let next = bayes(pi, tab.lik(y, 0), tab.lik(y, 1)).unwrap();
            go += p * pointwise(ch, costs, next, left - 1, k + 1);
        }
    }
    stop.min(go)
}

proptest! {
    #[test]
    fn envelope_matches_pointwise(pi in 0.0f64..=1.0, eps in 0.05f64..0.45, c2 in 0.005f64..0.2, t in 0usize..6) {
        let ch = sym(2, eps);
        let costs = CostModel::zero_one(0.0, c2);
        let sol = solve_wald_finite(&ch, &costs, t);
        prop_assert!((wald_cost(&sol, pi, t) - pointwise(&ch, &costs, pi, t, 0)).abs() < 1e-12);
    }
}

#[test]
fn general_costs_and_time_varying_tables() {
    let ch = ObservationChannel {
        observer: 2,
        tables: vec![table(&[0.6, 0.3, 0.1], &[0.2, 0.3, 0.5]), table(&[0.9, 0.1, 0.0], &[0.4, 0.3, 0.3])],
    };
    let costs = CostModel::new(0.01, 0.03, [[0.1, 2.0], [1.5, 0.0]], None).unwrap();
    let sol = solve_wald_finite(&ch, &costs, 4);
    for i in 0..=50 {
        let pi = i as f64 / 50.0;
        for left in 0..=4 {
            let k = 4 - left;
            let got = sol.value(k, pi);
            assert!((got - pointwise(&ch, &costs, pi, left, k)).abs() < 1e-12, "pi={pi} left={left}");
        }
    }
    for p0 in [0.2, 0.5, 0.7] {
        let (want, _) = enumerate_stopping_rules(&ch, &costs, 2, p0).unwrap();
        let small = solve_wald_finite(&ch, &costs, 2);
        assert!((wald_cost(&small, p0, 2) - want).abs() < 1e-12);
    }
}

#[test]
fn continuation_region_shrinks_toward_the_deadline() {
    let sol = solve_wald_finite(&sym(2, 0.2), &CostModel::zero_one(0.0, 0.02), 8);
    for k in 0..8 {
        assert!(sol.w1[k] <= sol.w1[k + 1] + 1e-12);
        assert!(sol.w2[k] >= sol.w2[k + 1] - 1e-12);
        assert!(sol.w1[k] <= sol.w2[k]);
    }
    assert_eq!(sol.w1[8], sol.w2[8]);
}

#[test]
fn decisions_follow_thresholds() {
    let sol = solve_wald_finite(&sym(2, 0.2), &CostModel::zero_one(0.0, 0.05), 3);
    let csv = sol.to_csv();
    assert!(csv.starts_with("k,w1,w2\n"));
    assert_eq!(csv.lines().count(), 5);
    let sol2 = solve_wald_finite(&sym(2, 0.2), &CostModel::zero_one(0.0, 0.05), 1);
    assert!((wald_cost(&sol2, 0.5, 1) - 0.25).abs() < 1e-12);
}

#[test]
fn infinite_value_is_a_fixed_point() {
    let ch = sym(2, 0.15);
    let costs = CostModel::zero_one(0.0, 0.03);
    let inf = solve_wald_infinite(&ch, &costs, IterationOptions::default()).unwrap();
    let tab: &LikelihoodTable = ch.at(1);
    for (i, &pi) in inf.grid.iter().enumerate().step_by(25) {
        let stop = terminal_cost(0, pi, &costs).min(terminal_cost(1, pi, &costs));
        let mut go = costs.c2;
        for y in 0..2 {
            let next = bayes(pi, tab.lik(y, 0), tab.lik(y, 1)).unwrap();
            go += predictive(pi, y, tab) * inf.value.eval(next);
        }
        assert!((stop.min(go) - inf.grid_values[i]).abs() < 1e-8, "pi={pi}");
    }
    assert!((inf.w1 + inf.w2 - 1.0).abs() < 1e-9);
}
