mod common;

use decseq::model::{LikelihoodTable, Variant};
use decseq::oracle::{enumerate_policies_p1, enumerate_policies_p2, law_by_paths, DEFAULT_CAP};
use decseq::policy::{message_law, Message, PreRule, StageRule};
use decseq::seq_decomp::{q1_p1, q1_p2, q2_p1, q2_p2, solve, solve_p1, InfoStateP1, InfoStateP2};
use decseq::simulate::exact_cost;
use decseq::Error;

use common::{spec, sym02, ternary};

#[test]
fn matches_oracle_beyond_the_acceptance_grid() {
    let cases = [
        sym02((3, 2), Variant::P1),
        sym02((3, 1), Variant::P1),
        spec(0.35, 0.15, 0.25, 0.02, 0.04, (3, 3), Variant::P1),
        ternary((2, 2), Variant::P1),
        sym02((1, 3), Variant::P2),
        sym02((2, 3), Variant::P2),
    ];
    for s in cases {
        let sol = solve(&s).unwrap();
        let oracle = match s.variant {
            Variant::P1 => enumerate_policies_p1(&s, DEFAULT_CAP),
            Variant::P2 => enumerate_policies_p2(&s, DEFAULT_CAP),
        }
        .unwrap();
        assert!((sol.cost - oracle.cost).abs() < 1e-9, "{:?} T=({},{})", s.variant, s.t1, s.t2);
        let exact = exact_cost(&sol.o1, &sol.o2, &s).unwrap();
        assert!((exact.cost - sol.cost).abs() < 1e-9);
        assert!((exact.total_probability - 1.0).abs() < 1e-12);
    }
}

#[test]
fn relabeling_hypotheses_keeps_the_optimum() {
    for v in [Variant::P1, Variant::P2] {
        let s = spec(0.3, 0.15, 0.25, 0.03, 0.04, (2, 3), v);
        let a = solve(&s).unwrap().cost;
        let b = solve(&s.mirrored()).unwrap().cost;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn message_law_agrees_with_path_enumeration() {
    let s = ternary((3, 3), Variant::P1);
    let sol = solve_p1(&s).unwrap();
    let a = message_law(&sol.o1, &s);
    let b = law_by_paths(&sol.o1, &s);
    for k in 0..s.t1 {
        for z in 0..s.m {
            for h in 0..2 {
                assert!((a.last[k][z][h] - b.last[k][z][h]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn restriction_keeps_only_the_message_atoms() {
    let s = sym02((2, 2), Variant::P1);
    let xi = InfoStateP1::initial(&s);
    assert_eq!(xi.beliefs().len(), 2);
    let rule = StageRule::from_cuts(&xi.beliefs(), &[0, 0, 0, 1], 2);
    let eta = q1_p1(&xi, &rule, Message::Symbol(0)).unwrap();
    assert_eq!(eta.atoms.len(), 1);
    assert!((eta.marginal()[0] - 0.2).abs() < 1e-12);
    assert!(matches!(q1_p1(&xi, &rule, Message::Symbol(1)), Err(Error::UnreachableMessage)));
    let blank = q1_p1(&xi, &rule, Message::Blank).unwrap();
    let next = q2_p1(&blank, &LikelihoodTable::symmetric(0.2));
    assert_eq!(next.t, 2);
    assert_eq!(next.atoms.len(), 2);
    assert!((next.total_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn one_step_p2_state_has_four_atoms() {
    let s = sym02((2, 2), Variant::P2);
    let psi = InfoStateP2::initial(&s);
    let atoms: Vec<f64> = psi.o1.iter().map(|a| a.belief).collect();
    let rule = StageRule::all_blank(2);
    let phi = q1_p2(&psi, &rule, Message::Blank, s.channel2.at(1)).unwrap();
    let joint = phi.joint();
    assert_eq!(atoms.len(), 2);
    assert_eq!(phi.o2.len(), 2);
    assert_eq!(joint.len(), 8);
    let pairs: Vec<(f64, Option<f64>)> = joint.iter().filter(|j| j.h == 0).map(|j| (j.pi1, j.pi2)).collect();
    assert_eq!(pairs.len(), 4);
    assert!(pairs.iter().any(|&(a, b)| (a - 0.8).abs() < 1e-12 && (b.unwrap() - 0.8).abs() < 1e-12));
    for h in 0..2 {
        let m: f64 = joint.iter().filter(|j| j.h == h).map(|j| j.mass).sum();
        assert!((m - 0.5).abs() < 1e-12);
    }
    let stop_all = PreRule { alpha: 1.0, beta: 0.0 };
    let next = q2_p2(&phi, &stop_all, s.channel1.at(2));
    assert!(next.o2.is_empty());
    assert!((next.stopped[0] - 1.0).abs() < 1e-12);
    assert!((next.total_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_cap_and_variant_are_checked() {
    let s = sym02((3, 3), Variant::P2);
    assert!(matches!(enumerate_policies_p2(&s, 1e3), Err(Error::CapExceeded { .. })));
    assert!(matches!(enumerate_policies_p1(&s, DEFAULT_CAP), Err(Error::Variant(_))));
}
