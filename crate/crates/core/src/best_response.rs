//! Person-by-person machinery: each observer's exact best response to the
//! other's fixed policy, and the alternating iteration between them.

use serde::{Deserialize, Serialize};

use crate::belief::{bayes, merge_atoms, predictive, reachable_beliefs, ATOM_TOL};
use crate::error::{Error, Result};
use crate::model::{terminal_cost, ProblemSpec, Variant};
use crate::policy::{
    message_law, o2_for_p1, Action, Decision, Interval, Message, O1Policy, O2Policy, PostRule, PreRule, StageRule,
    TerminalRule, ValueTable,
};
use crate::simulate::exact_cost;
use crate::wald::{solve_wald_finite, WaldSolution};

const TIE: f64 = 1e-12;

/// Own-observation frontier: posterior from O2's prior and per-hypothesis path mass.
fn branch(frontier: &[(f64, [f64; 2])], table: &crate::model::LikelihoodTable) -> Vec<(f64, [f64; 2])> {
    let mut cands = Vec::with_capacity(frontier.len() * table.alphabet());
    for &(q, p) in frontier {
        for y in 0..table.alphabet() {
            let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
            let w = [p[0] * l0, p[1] * l1];
            if w[0] == 0.0 && w[1] == 0.0 {
                continue;
            }
            cands.push((bayes(q, l0, l1).unwrap_or(q), w, 1));
        }
    }
    let (atoms, _) = merge_atoms(&cands);
    atoms.into_iter().map(|a| (a.belief, a.weight)).collect()
}

/// Per-hypothesis expected O2 cost `(A, B)` given O1's final message `z` at time `k`.
///
/// O2's cost given O1's belief `pi` is `A * pi + B * (1 - pi)`.
pub fn evaluate_o2_policy(o2: &O2Policy, spec: &ProblemSpec, k: usize, z: usize) -> Result<[f64; 2]> {
    if k == 0 || k > spec.t1 || z >= spec.m {
        return Err(Error::InconsistentHistory(format!(
            "final message {z} at time {k} (T1 = {}, M = {})",
            spec.t1, spec.m
        )));
    }
    let horizon = o2.horizon().ok_or(Error::UnboundedPolicy)?;
    if o2.variant != spec.variant {
        return Err(Error::Variant("O2 policy and problem differ in variant".into()));
    }
    let costs = &spec.costs;
    let mut acc = [0.0; 2];
    let mut stop = |frontier: &mut Vec<(f64, [f64; 2])>, steps: usize, decide: &dyn Fn(f64) -> Decision| {
        frontier.retain(|&(q, p)| match decide(q) {
            Decision::Declare(u) => {
                for h in 0..2 {
                    acc[h] += p[h] * (costs.c2 * steps as f64 + costs.jc(u, h));
                }
                false
            }
            Decision::Continue => true,
        });
    };
    let lik = o2.calibration.final_lik(k, z);
    let mut frontier = vec![(o2.prior, [1.0, 1.0])];
    match spec.variant {
        Variant::P1 => {
            for j in 0..=horizon {
                stop(&mut frontier, j, &|q| o2.post_decide(j, o2.belief(q, lik)));
                if frontier.is_empty() || j == horizon {
                    break;
                }
                frontier = branch(&frontier, spec.channel2.at(j + 1));
            }
        }
        Variant::P2 => {
            if horizon < k {
                return Err(Error::InconsistentHistory(format!("message at {k} after O2 horizon {horizon}")));
            }
            for t in 1..=horizon {
                frontier = branch(&frontier, spec.channel2.at(t));
                if t < k {
                    let b = o2.calibration.blank_lik(t);
                    stop(&mut frontier, t, &|q| o2.pre_decide(t, o2.belief(q, b)));
                } else {
                    stop(&mut frontier, t, &|q| o2.post_decide(t, o2.belief(q, lik)));
                }
                if frontier.is_empty() {
                    break;
                }
            }
        }
    }
    Ok(acc)
}

/// Region for atoms `a..b` of a sorted list, extended to 0 or 1 at the ends.
fn region(atoms: &[f64], a: usize, b: usize) -> Interval {
    let n = atoms.len();
    let lo = if a == 0 { 0.0 } else { 0.5 * (atoms[a - 1] + atoms[a]) };
    let hi = if b == n { 1.0 } else { 0.5 * (atoms[b - 1] + atoms[b]) };
    Interval { lo, hi }
}

fn runs<T: PartialEq + Copy>(labels: &[T]) -> Vec<(T, usize, usize)> {
    let mut out: Vec<(T, usize, usize)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.0 == l => r.2 = i + 1,
            _ => out.push((l, i, i + 1)),
        }
    }
    out
}

/// Reads a non-terminal stage rule off labeled sorted atoms.
///
/// Every symbol must occupy one contiguous run, higher symbols to the left.
pub fn extract_thresholds(atoms: &[f64], labels: &[Message], m: usize) -> Result<StageRule> {
    let mut regions = vec![None; m];
    let mut prev: Option<usize> = None;
    for (l, a, b) in runs(labels) {
        if let Message::Symbol(z) = l {
            if z >= m {
                return Err(Error::StructureViolation(format!("symbol {z} outside alphabet")));
            }
            if regions[z].is_some() {
                return Err(Error::StructureViolation(format!("symbol {z} region is not an interval")));
            }
            if let Some(p) = prev {
                if z >= p {
                    return Err(Error::StructureViolation(format!("symbol {z} lies right of symbol {p}")));
                }
            }
            prev = Some(z);
            regions[z] = Some(region(atoms, a, b));
        }
    }
    Ok(StageRule { regions })
}

/// Reads the terminal cut rule off labeled sorted atoms (no blanks allowed).
pub fn extract_terminal(atoms: &[f64], labels: &[Message], m: usize) -> Result<TerminalRule> {
    let mut syms = Vec::with_capacity(labels.len());
    for l in labels {
        match l {
            Message::Symbol(z) if *z < m => syms.push(*z),
            _ => return Err(Error::StructureViolation("terminal stage must send a symbol".into())),
        }
    }
    if syms.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::StructureViolation("terminal symbols not monotone in belief".into()));
    }
    let cuts: Vec<usize> = (0..m - 1)
        .map(|i| syms.iter().filter(|&&s| s >= m - 1 - i).count())
        .collect();
    Ok(TerminalRule::from_cuts(atoms, &cuts))
}

/// Reads O2's `(alpha, beta)` off labeled sorted atoms.
pub fn extract_o2_thresholds(atoms: &[f64], labels: &[Decision]) -> Result<PreRule> {
    let rank = |d: &Decision| match d {
        Decision::Declare(1) => 0,
        Decision::Continue => 1,
        _ => 2,
    };
    if labels.windows(2).any(|w| rank(&w[1]) < rank(&w[0])) {
        return Err(Error::StructureViolation("O2 continuation region is not an interval".into()));
    }
    let i = labels.iter().filter(|d| rank(d) == 0).count();
    let j = i + labels.iter().filter(|d| rank(d) == 1).count();
    Ok(PreRule::from_cuts(atoms, i, j))
}

fn best_send(sends: &[f64]) -> (usize, f64) {
    let m = sends.len();
    let mut best = (m - 1, sends[m - 1]);
    for z in (0..m - 1).rev() {
        if sends[z] < best.1 - TIE {
            best = (z, sends[z]);
        }
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct O1Response {
    pub policy: O1Policy,
    pub tables: Vec<ValueTable>,
    /// Team cost with O2 fixed, `c1 + E[V_1]`.
    pub cost: f64,
    /// Send-cost coefficients `send[k-1][z] = (A, B)`.
    pub send: Vec<Vec<[f64; 2]>>,
}

/// Backward induction over O1's reachable atoms against a fixed O2 map.
pub fn o1_best_response(o2: &O2Policy, spec: &ProblemSpec) -> Result<O1Response> {
    if o2.variant != spec.variant {
        return Err(Error::Variant(format!("O2 policy is for {:?}", o2.variant)));
    }
    let (t1, m) = (spec.t1, spec.m);
    let send: Vec<Vec<[f64; 2]>> = (1..=t1)
        .map(|k| (0..m).map(|z| evaluate_o2_policy(o2, spec, k, z)).collect())
        .collect::<Result<_>>()?;
    let set = reachable_beliefs(spec.prior.p0, &spec.channel1, t1);
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); t1 + 1];
    let mut tables = Vec::with_capacity(t1);
    let mut rules = Vec::with_capacity(t1.saturating_sub(1));
    let mut terminal = None;
    for t in (1..=t1).rev() {
        let lvl = set.level(t);
        let atoms = set.beliefs(t);
        let mut vals = Vec::with_capacity(atoms.len());
        let mut labels = Vec::with_capacity(atoms.len());
        for (i, &pi) in atoms.iter().enumerate() {
            let sends: Vec<f64> = send[t - 1].iter().map(|c| c[0] * pi + c[1] * (1.0 - pi)).collect();
            let (z, v) = best_send(&sends);
            if t == t1 {
                vals.push(v);
                labels.push(Message::Symbol(z));
                continue;
            }
            let table = spec.channel1.at(t + 1);
            let mut cont = spec.costs.c1;
            for (y, nx) in lvl.next[i].iter().enumerate() {
                if let Some(j) = nx {
                    cont += predictive(pi, y, table) * values[t + 1][*j];
                }
            }
            if cont < v - TIE {
                vals.push(cont);
                labels.push(Message::Blank);
            } else {
                vals.push(v);
                labels.push(Message::Symbol(z));
            }
        }
        if t == t1 {
            terminal = Some(extract_terminal(&atoms, &labels, m)?);
        } else {
            rules.push(extract_thresholds(&atoms, &labels, m)?);
        }
        tables.push(ValueTable {
            t,
            history: format!("b^{}", t - 1),
            atoms,
            values: vals.clone(),
            actions: labels.into_iter().map(Action::Message).collect(),
        });
        values[t] = vals;
    }
    rules.reverse();
    tables.reverse();
    let p = &spec.prior;
    let cost = spec.costs.c1
        + set
            .level(1)
            .atoms
            .iter()
            .zip(&values[1])
            .map(|(a, v)| (p.p(0) * a.weight[0] + p.p(1) * a.weight[1]) * v)
            .sum::<f64>();
    Ok(O1Response {
        policy: O1Policy {
            m,
            stages: rules,
            terminal: terminal.expect("terminal stage computed"),
        },
        tables,
        cost,
        send,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct O2Response {
    pub policy: O2Policy,
    pub tables: Vec<ValueTable>,
    pub wald: WaldSolution,
}

fn stop_choice(pi: f64, spec: &ProblemSpec) -> (usize, f64) {
    let j0 = terminal_cost(0, pi, &spec.costs);
    let j1 = terminal_cost(1, pi, &spec.costs);
    if j0 <= j1 {
        (0, j0)
    } else {
        (1, j1)
    }
}

/// O2's exact best response to a fixed O1 policy.
///
/// After the final message the response is the Wald table; in P2 the blank
/// classes are solved by backward induction over O2's reachable atoms.
pub fn o2_best_response(o1: &O1Policy, spec: &ProblemSpec) -> Result<O2Response> {
    o1.validate()?;
    if o1.m != spec.m || o1.horizon() != spec.t1 {
        return Err(Error::InvalidArgument("O1 policy does not match the problem".into()));
    }
    let wald = solve_wald_finite(&spec.channel2, &spec.costs, spec.t2);
    let law = message_law(o1, spec);
    let mut tables = Vec::new();
    let mut policy = o2_for_p1(wald.w1.clone(), wald.w2.clone(), &law, spec);
    match spec.variant {
        Variant::P1 => {
            for k in 1..=spec.t1 {
                for z in 0..spec.m {
                    let lik = law.last[k - 1][z];
                    if lik == [0.0, 0.0] {
                        continue;
                    }
                    let e = policy.belief(spec.prior.p0, lik);
                    let set = reachable_beliefs(e, &spec.channel2, spec.t2);
                    for j in 0..=spec.t2 {
                        let atoms = set.beliefs(j);
                        tables.push(ValueTable {
                            t: j,
                            history: format!("k={k},z={z}"),
                            values: wald.evaluate_on(j, &atoms),
                            actions: atoms.iter().map(|&p| Action::Decision(wald.decide(j, p))).collect(),
                            atoms,
                        });
                    }
                }
            }
        }
        Variant::P2 => {
            let t1 = spec.t1;
            let set = reachable_beliefs(spec.prior.p0, &spec.channel2, t1);
            let star = spec.costs.crossing();
            let mut pre = vec![PreRule { alpha: star, beta: star }; t1 - 1];
            let mut next_vals: Vec<f64> = Vec::new();
            for t in (1..t1).rev() {
                let s = law.blank[t];
                let lvl = set.level(t);
                let table = spec.channel2.at(t + 1);
                let step_b = law.step_lik(t, Message::Blank);
                let steps: Vec<[f64; 2]> = (0..spec.m).map(|z| law.step_lik(t, Message::Symbol(z))).collect();
                let mut atoms = Vec::with_capacity(lvl.atoms.len());
                let mut vals = Vec::with_capacity(lvl.atoms.len());
                let mut labels = Vec::with_capacity(lvl.atoms.len());
                for (i, a) in lvl.atoms.iter().enumerate() {
                    let pi = policy.belief(a.belief, s);
                    let (u, stopv) = stop_choice(pi, spec);
                    let mut cont = spec.costs.c2;
                    for y in 0..table.alphabet() {
                        let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
                        if t + 1 < t1 {
                            if let Some(j) = lvl.next[i][y] {
                                let p = pi * l0 * step_b[0] + (1.0 - pi) * l1 * step_b[1];
                                if p > 0.0 {
                                    cont += p * next_vals[j];
                                }
                            }
                        }
                        for st in &steps {
                            let (m0, m1) = (l0 * st[0], l1 * st[1]);
                            let p = pi * m0 + (1.0 - pi) * m1;
                            if p > 0.0 {
                                let post = bayes(pi, m0, m1).unwrap();
                                cont += p * wald.value(t + 1, post);
                            }
                        }
                    }
                    atoms.push(pi);
                    if cont < stopv - TIE {
                        vals.push(cont);
                        labels.push(Decision::Continue);
                    } else {
                        vals.push(stopv);
                        labels.push(Decision::Declare(u));
                    }
                }
                if s != [0.0, 0.0] && !atoms.is_empty() {
                    pre[t - 1] = extract_o2_thresholds(&atoms, &labels)?;
                }
                tables.push(ValueTable {
                    t,
                    history: format!("b^{t}"),
                    atoms,
                    values: vals.clone(),
                    actions: labels.into_iter().map(Action::Decision).collect(),
                });
                next_vals = vals;
            }
            tables.reverse();
            policy.variant = Variant::P2;
            policy.pre = pre;
        }
    }
    Ok(O2Response { policy, tables, wald })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ATOM_TOL
}

/// Whether two O2 maps agree up to numerical noise.
pub fn same_o2(a: &O2Policy, b: &O2Policy) -> bool {
    let post = match (&a.post, &b.post) {
        (PostRule::Wald { w1, w2 }, PostRule::Wald { w1: v1, w2: v2 }) => {
            w1.len() == v1.len()
                && w1.iter().zip(v1).all(|(x, y)| close(*x, *y))
                && w2.iter().zip(v2).all(|(x, y)| close(*x, *y))
        }
        (PostRule::Stationary { w1, w2 }, PostRule::Stationary { w1: v1, w2: v2 }) => close(*w1, *v1) && close(*w2, *v2),
        _ => false,
    };
    let pair = |x: &[f64; 2], y: &[f64; 2]| close(x[0], y[0]) && close(x[1], y[1]);
    post && a.variant == b.variant
        && close(a.prior, b.prior)
        && a.pre.len() == b.pre.len()
        && a.pre.iter().zip(&b.pre).all(|(x, y)| close(x.alpha, y.alpha) && close(x.beta, y.beta))
        && a.calibration.blank.len() == b.calibration.blank.len()
        && a.calibration.blank.iter().zip(&b.calibration.blank).all(|(x, y)| pair(x, y))
        && a.calibration.last.len() == b.calibration.last.len()
        && a.calibration.last.iter().zip(&b.calibration.last).all(|(r, s)| {
            r.len() == s.len() && r.iter().zip(s).all(|(x, y)| pair(x, y))
        })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PbpoResult {
    pub o1: O1Policy,
    pub o2: O2Policy,
    /// Team cost after each round.
    pub trace: Vec<f64>,
    /// Team cost after each O1 step, before O2 responds.
    pub half_trace: Vec<f64>,
}

/// Alternating best responses starting from `init`.
pub fn pbpo_iteration(spec: &ProblemSpec, init: O2Policy, max_rounds: usize) -> Result<PbpoResult> {
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
    }
    let mut o2 = init;
    let mut o1 = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut half_trace = Vec::new();
    for _ in 0..max_rounds {
        let r1 = o1_best_response(&o2, spec)?;
        half_trace.push(r1.cost);
        let r2 = o2_best_response(&r1.policy, spec)?;
        let cost = exact_cost(&r1.policy, &r2.policy, spec)?.cost;
        let fixed = same_o2(&r2.policy, &o2);
        let stalled = trace.last().is_some_and(|&prev| prev - cost < 1e-12);
        trace.push(cost);
        o1 = Some(r1.policy);
        o2 = r2.policy;
        if fixed || stalled {
            break;
        }
    }
    Ok(PbpoResult {
        o1: o1.expect("at least one round"),
        o2,
        trace,
        half_trace,
    })
}

/// A simple starting point: Wald tables calibrated to an O1 that sends at
/// t = 1 by the crossing cut.
pub fn default_o2(spec: &ProblemSpec) -> O2Policy {
    let wald = solve_wald_finite(&spec.channel2, &spec.costs, spec.t2);
    let (m, star) = (spec.m, spec.costs.crossing());
    let split = StageRule {
        regions: (0..m)
            .map(|z| {
                if z == m - 1 {
                    Some(Interval { lo: 0.0, hi: star })
                } else if z == 0 {
                    Some(Interval { lo: star, hi: 1.0 })
                } else {
                    None
                }
            })
            .collect(),
    };
    let first = O1Policy {
        m,
        stages: vec![split; spec.t1 - 1],
        terminal: TerminalRule::single(star, m),
    };
    let law = message_law(&first, spec);
    let mut o2 = o2_for_p1(wald.w1, wald.w2, &law, spec);
    o2.variant = spec.variant;
    if spec.variant == Variant::P2 {
        o2.pre = vec![PreRule { alpha: 0.0, beta: 1.0 }; spec.t1 - 1];
    }
    o2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostModel, LikelihoodTable, ObservationChannel};
    use crate::policy::Calibration;

    fn sym(variant: Variant, t1: usize, t2: usize) -> ProblemSpec {
        ProblemSpec::new(
            0.5,
            ObservationChannel::stationary(1, LikelihoodTable::symmetric(0.2)),
            ObservationChannel::stationary(2, LikelihoodTable::symmetric(0.2)),
            CostModel::zero_one(0.05, 0.05),
            t1,
            t2,
            variant,
            2,
        )
        .unwrap()
    }

    #[test]
    fn stop_immediately_declare_zero() {
        let spec = sym(Variant::P1, 1, 2);
        let o2 = O2Policy {
            variant: Variant::P1,
            prior: 0.5,
            pre: vec![],
            post: PostRule::Wald {
                w1: vec![-1.0; 3],
                w2: vec![-1.0; 3],
            },
            calibration: Calibration {
                blank: vec![],
                last: vec![vec![[1.0, 1.0]; 2]],
            },
        };
        assert_eq!(evaluate_o2_policy(&o2, &spec, 1, 0).unwrap(), [0.0, 1.0]);
        assert!(evaluate_o2_policy(&o2, &spec, 2, 0).is_err());
    }

    #[test]
    fn extract_examples() {
        use Message::*;
        let atoms = [0.1, 0.2, 0.5, 0.8, 0.9];
        let r = extract_thresholds(&atoms, &[Symbol(1), Symbol(1), Blank, Symbol(0), Symbol(0)], 2).unwrap();
        assert_eq!(r.thresholds4(), Some([0.0, 0.35, 0.65, 1.0]));
        let r = extract_thresholds(&atoms, &[Blank; 5], 2).unwrap();
        assert_eq!(r.regions, vec![None, None]);
        let r = extract_thresholds(&atoms, &[Symbol(2), Symbol(2), Symbol(1), Blank, Symbol(0)], 3).unwrap();
        assert!(r.regions.iter().all(|x| x.is_some()));
        let e = extract_thresholds(&atoms, &[Symbol(1), Blank, Symbol(1), Blank, Symbol(0)], 2).unwrap_err();
        assert!(e.to_string().contains("structure violation"));
        assert!(extract_thresholds(&atoms, &[Symbol(0), Blank, Symbol(1), Blank, Blank], 2).is_err());
    }

    #[test]
    fn uninformative_o1_sends_at_once() {
        let mut spec = sym(Variant::P1, 3, 2);
        spec.channel1 = ObservationChannel::stationary(1, LikelihoodTable::uninformative());
        let r = o1_best_response(&default_o2(&spec), &spec).unwrap();
        for t in &r.tables {
            assert!(t.actions.iter().all(|a| *a != Action::Message(Message::Blank)));
        }
    }
}
