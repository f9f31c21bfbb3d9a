use decseq::model::{load_problem_spec, CostModel, Variant};
use decseq::Error;

const SYM02: &str = r#"{
  "prior": 0.5,
  "channels": [
    { "observer": 1, "tables": [[[0.8, 0.2], [0.2, 0.8]]] },
    { "observer": 2, "tables": [[[0.8, 0.2], [0.2, 0.8]], [[0.9, 0.1], [0.1, 0.9]]] }
  ],
  "costs": { "c1": 0.05, "c2": 0.05, "J": [[0.0, 1.0], [1.0, 0.0]] },
  "horizons": { "T1": 2, "T2": 2 },
  "variant": "P2"
}"#;

#[test]
fn json_round_trip_is_stable() {
    let spec = load_problem_spec(SYM02).unwrap();
    let again = load_problem_spec(&spec.to_json()).unwrap();
    assert_eq!(spec.to_json(), again.to_json());
    assert_eq!(spec.m, 2);
    assert_eq!(spec.variant, Variant::P2);
    assert_eq!(spec.costs.l, 1.0);
}

#[test]
fn last_table_repeats() {
    let spec = load_problem_spec(SYM02).unwrap();
    assert_eq!(spec.channel2.at(1).rows[0], vec![0.8, 0.2]);
    assert_eq!(spec.channel2.at(2).rows[0], vec![0.9, 0.1]);
    assert_eq!(spec.channel2.at(9).rows[0], vec![0.9, 0.1]);
    assert!(!spec.is_stationary());
    assert!(matches!(spec.with_horizons(2, 3), Err(Error::Validation { .. })));
}

#[test]
fn p2_needs_t2_at_least_t1() {
    let bad = SYM02.replace(r#""T2": 2"#, r#""T2": 1"#);
    assert!(matches!(load_problem_spec(&bad), Err(Error::Validation { .. })));
    let spec = load_problem_spec(SYM02).unwrap();
    assert!(spec.with_horizons(3, 2).is_err());
    assert!(spec.with_variant(Variant::P1).unwrap().with_horizons(3, 2).is_ok());
}

#[test]
fn malformed_input_is_rejected() {
    assert!(matches!(load_problem_spec("{"), Err(Error::Schema(_))));
    let extra = SYM02.replace(r#""variant": "P2""#, r#""variant": "P2", "extra": 1"#);
    assert!(load_problem_spec(&extra).is_err());
    let negative = SYM02.replace(r#""c1": 0.05"#, r#""c1": -0.05"#);
    assert!(matches!(load_problem_spec(&negative), Err(Error::Validation { .. })));
    let prior = SYM02.replace(r#""prior": 0.5"#, r#""prior": 1.5"#);
    assert!(matches!(load_problem_spec(&prior), Err(Error::Validation { .. })));
}

#[test]
fn mirror_swaps_costs_and_prior() {
    let spec = load_problem_spec(SYM02).unwrap();
    let mut asym = spec.clone();
    asym.costs = CostModel::new(0.05, 0.05, [[0.0, 2.0], [1.0, 0.0]], None).unwrap();
    asym.prior = decseq::model::HypothesisPrior::new(0.25).unwrap();
    let m = asym.mirrored();
    assert_eq!(m.prior.p0, 0.75);
    assert_eq!(m.costs.j, [[0.0, 1.0], [2.0, 0.0]]);
    assert_eq!(m.mirrored().to_json(), asym.to_json());
}
