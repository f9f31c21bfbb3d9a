mod common;

use decseq::best_response::{
    default_o2, evaluate_o2_policy, extract_o2_thresholds, extract_thresholds, o1_best_response, o2_best_response,
    pbpo_iteration,
};
use decseq::model::Variant;
use decseq::oracle::{best_o1_given_o2, best_o2_given_o1, DEFAULT_CAP};
use decseq::policy::{message_law, Decision, Interval, Message, O1Policy, StageRule, TerminalRule};
use decseq::seq_decomp::solve;
use decseq::simulate::exact_cost;
use decseq::wald::{solve_wald_finite, wald_cost};
use decseq::Error;

use common::{small_instances, sym02, ternary};

/// Sends at t = 1: symbol 1 below 0.5, symbol 0 above.
fn send_first(m: usize) -> O1Policy {
    let mut regions = vec![None; m];
    regions[0] = Some(Interval { lo: 0.5, hi: 1.0 });
    regions[m - 1] = Some(Interval { lo: 0.0, hi: 0.5 });
    O1Policy {
        m,
        stages: vec![StageRule { regions }],
        terminal: TerminalRule::single(0.5, m),
    }
}

#[test]
fn o2_response_matches_exhaustive_search() {
    for v in [Variant::P1, Variant::P2] {
        let s = sym02((2, 2), v);
        let o1 = send_first(2);
        let r = o2_best_response(&o1, &s).unwrap();
        let cost = exact_cost(&o1, &r.policy, &s).unwrap().cost;
        let want = best_o2_given_o1(&s, &o1, DEFAULT_CAP).unwrap();
        assert!((cost - want).abs() < 1e-9, "{v:?}: {cost} vs {want}");
    }
}

#[test]
fn o1_response_matches_exhaustive_search() {
    for v in [Variant::P1, Variant::P2] {
        for (name, s) in small_instances(v) {
            let o2 = default_o2(&s);
            let r = o1_best_response(&o2, &s).unwrap();
            let (want, _) = best_o1_given_o2(&s, &o2, DEFAULT_CAP).unwrap();
            assert!((r.cost - want).abs() < 1e-9, "{v:?} {name}: {} vs {want}", r.cost);
            let exact = exact_cost(&r.policy, &o2, &s).unwrap().cost;
            assert!((exact - r.cost).abs() < 1e-9);
        }
    }
}

#[test]
fn o2_cost_after_the_message_is_wald() {
    let s = sym02((1, 2), Variant::P1);
    let o1 = O1Policy::send_now(0.5, 2);
    let o2 = o2_best_response(&o1, &s).unwrap().policy;
    let law = message_law(&o1, &s);
    let wald = solve_wald_finite(&s.channel2, &s.costs, s.t2);
    let mut total = 0.0;
    for z in 0..2 {
        let f = law.last[0][z];
        let [a, b] = evaluate_o2_policy(&o2, &s, 1, z).unwrap();
        let pz = 0.5 * f[0] + 0.5 * f[1];
        let post = 0.5 * f[0] / pz;
        let joint = 0.5 * f[0] * a + 0.5 * f[1] * b;
        total += joint;
        assert!((joint / pz - wald_cost(&wald, post, s.t2)).abs() < 1e-12);
    }
    let exact = exact_cost(&o1, &o2, &s).unwrap().cost;
    assert!((exact - s.costs.c1 - total).abs() < 1e-12);
    assert!(matches!(evaluate_o2_policy(&o2, &s, 2, 0), Err(Error::InconsistentHistory(_))));
}

#[test]
fn threshold_extraction() {
    let atoms = [0.1, 0.3, 0.5, 0.7, 0.9];
    let labels = [
        Message::Symbol(2),
        Message::Symbol(2),
        Message::Symbol(1),
        Message::Blank,
        Message::Symbol(0),
    ];
    let rule = extract_thresholds(&atoms, &labels, 3).unwrap();
    assert_eq!(rule.regions.iter().flatten().count(), 3);
    let bad = [Message::Symbol(0), Message::Blank, Message::Symbol(0), Message::Blank, Message::Blank];
    assert!(matches!(extract_thresholds(&atoms, &bad, 2), Err(Error::StructureViolation(_))));
    let flipped = [Message::Symbol(0), Message::Symbol(0), Message::Blank, Message::Symbol(1), Message::Symbol(1)];
    assert!(matches!(extract_thresholds(&atoms, &flipped, 2), Err(Error::StructureViolation(_))));
    let o2 = [Decision::Declare(1), Decision::Continue, Decision::Continue, Decision::Declare(0), Decision::Declare(0)];
    let pre = extract_o2_thresholds(&atoms, &o2).unwrap();
    assert!((pre.alpha - 0.2).abs() < 1e-12 && (pre.beta - 0.6).abs() < 1e-12);
    let o2_bad = [Decision::Continue, Decision::Declare(1), Decision::Continue, Decision::Declare(0), Decision::Declare(0)];
    assert!(extract_o2_thresholds(&atoms, &o2_bad).is_err());
}

#[test]
fn pbpo_reaches_a_mutual_best_response() {
    for v in [Variant::P1, Variant::P2] {
        let s = ternary((2, 2), v);
        let run = pbpo_iteration(&s, default_o2(&s), 30).unwrap();
        let last = *run.trace.last().unwrap();
        let again = o1_best_response(&run.o2, &s).unwrap();
        assert!(again.cost >= last - 1e-9);
        let o2 = o2_best_response(&run.o1, &s).unwrap().policy;
        let cost = exact_cost(&run.o1, &o2, &s).unwrap().cost;
        assert!(cost >= last - 1e-9);
        assert!(last >= solve(&s).unwrap().cost - 1e-9);
    }
    assert!(pbpo_iteration(&sym02((2, 2), Variant::P1), default_o2(&sym02((2, 2), Variant::P1)), 0).is_err());
}
