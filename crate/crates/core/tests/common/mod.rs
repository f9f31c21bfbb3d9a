#![allow(dead_code)]

use decseq::model::{CostModel, LikelihoodTable, ObservationChannel, ProblemSpec, Variant};

pub fn sym(observer: u8, eps: f64) -> ObservationChannel {
    ObservationChannel::stationary(observer, LikelihoodTable::symmetric(eps))
}

pub fn table(r0: &[f64], r1: &[f64]) -> LikelihoodTable {
    LikelihoodTable::new(r0.to_vec(), r1.to_vec()).unwrap()
}

pub fn spec(p0: f64, e1: f64, e2: f64, c1: f64, c2: f64, t: (usize, usize), v: Variant) -> ProblemSpec {
    ProblemSpec::new(p0, sym(1, e1), sym(2, e2), CostModel::zero_one(c1, c2), t.0, t.1, v, 2).unwrap()
}

/// Symmetric channels with error 0.2, equal step costs 0.05, uniform prior.
pub fn sym02(t: (usize, usize), v: Variant) -> ProblemSpec {
    spec(0.5, 0.2, 0.2, 0.05, 0.05, t, v)
}

/// Binary instances with `T1, T2 <= 2` small enough for the exhaustive oracle.
pub fn small_instances(v: Variant) -> Vec<(String, ProblemSpec)> {
    let mut out = vec![
        ("sym02".to_string(), sym02((2, 2), v)),
        ("p0=0.3".into(), spec(0.3, 0.2, 0.2, 0.05, 0.05, (2, 2), v)),
        ("e1=0.1,e2=0.3".into(), spec(0.5, 0.1, 0.3, 0.05, 0.05, (2, 2), v)),
        ("cheap O1".into(), spec(0.6, 0.2, 0.2, 0.01, 0.1, (2, 2), v)),
        ("cheap O2".into(), spec(0.4, 0.25, 0.15, 0.08, 0.01, (2, 2), v)),
        ("T=(1,1)".into(), sym02((1, 1), v)),
        ("T=(1,2)".into(), spec(0.5, 0.2, 0.2, 0.02, 0.03, (1, 2), v)),
    ];
    let skewed = ProblemSpec::new(
        0.45,
        ObservationChannel::stationary(1, table(&[0.7, 0.3], &[0.1, 0.9])),
        ObservationChannel::stationary(2, table(&[0.85, 0.15], &[0.35, 0.65])),
        CostModel::new(0.03, 0.04, [[0.0, 2.0], [1.0, 0.0]], None).unwrap(),
        2,
        2,
        v,
        2,
    )
    .unwrap();
    out.push(("skewed".into(), skewed));
    let varying = ProblemSpec::new(
        0.5,
        ObservationChannel {
            observer: 1,
            tables: vec![LikelihoodTable::symmetric(0.3), LikelihoodTable::symmetric(0.1)],
        },
        ObservationChannel {
            observer: 2,
            tables: vec![LikelihoodTable::symmetric(0.1), LikelihoodTable::symmetric(0.3)],
        },
        CostModel::zero_one(0.04, 0.04),
        2,
        2,
        v,
        2,
    )
    .unwrap();
    out.push(("time-varying".into(), varying));
    out
}

pub fn ternary(t: (usize, usize), v: Variant) -> ProblemSpec {
    let ch1 = ObservationChannel::stationary(1, table(&[0.6, 0.3, 0.1], &[0.1, 0.3, 0.6]));
    ProblemSpec::new(0.5, ch1, sym(2, 0.2), CostModel::zero_one(0.03, 0.05), t.0, t.1, v, 3).unwrap()
}
