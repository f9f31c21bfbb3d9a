//! Untruncated horizons: value-iteration limits for each observer and
//! truncation certificates for finite-horizon solutions.

use serde::{Deserialize, Serialize};

use crate::belief::{bayes, merge_atoms};
use crate::best_response::evaluate_o2_policy;
use crate::envelope::{bellman, expectation, Envelope, Line};
use crate::error::{Error, Result};
use crate::model::{CostModel, LikelihoodTable, ProblemSpec, Variant};
use crate::policy::{
    message_law, threshold_decision, Decision, Interval, Message, MessageLaw, MessageRule, O1Policy, O2Policy,
    StageRule, TerminalRule,
};
use crate::seq_decomp::{solve, DesignerSolution};
use crate::wald::{solve_wald_infinite, stop_lines, thresholds, InfiniteWaldSolution, IterationOptions};

fn require_stationary(spec: &ProblemSpec) -> Result<()> {
    if !spec.channel1.is_stationary() {
        return Err(Error::NonStationary("observer 1 channel varies with time".into()));
    }
    if !spec.channel2.is_stationary() {
        return Err(Error::NonStationary("observer 2 channel varies with time".into()));
    }
    Ok(())
}

/// Message law of `rule` applied at every time up to `horizon`.
fn stationary_law(rule: &StageRule, spec: &ProblemSpec, horizon: usize) -> MessageLaw {
    let mut s = spec.clone();
    s.t1 = horizon;
    s.t2 = horizon;
    let o1 = O1Policy {
        m: spec.m,
        stages: vec![rule.clone(); horizon],
        terminal: TerminalRule::single(spec.costs.crossing(), spec.m),
    };
    message_law(&o1, &s)
}

/// Limit of O2's value for one all-blank message history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassLimit {
    pub t: usize,
    pub alpha: f64,
    pub beta: f64,
    pub value: Envelope,
    pub grid_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2Limit {
    /// Post-message class: the stationary Wald problem.
    pub post: InfiniteWaldSolution,
    /// P2 only: blank classes `t = 1..=window`.
    pub classes: Vec<ClassLimit>,
    /// O2 horizon at which the blank classes converged.
    pub horizon: usize,
    pub deltas: Vec<f64>,
    pub max_increase: f64,
}

/// O2's value as its horizon grows, against a stationary O1 rule.
///
/// After the final message O2 faces the stationary Wald problem. In P2 the
/// blank classes are solved by backward passes of growing length until the
/// reported classes change by less than `opts.tol`.
pub fn value_iterate_o2(o1: &StageRule, spec: &ProblemSpec, opts: IterationOptions, window: usize) -> Result<O2Limit> {
    opts.check()?;
    require_stationary(spec)?;
    o1.validate(spec.m)?;
    let post = solve_wald_infinite(&spec.channel2, &spec.costs, opts)?;
    if spec.variant == Variant::P1 {
        return Ok(O2Limit {
            deltas: post.deltas.clone(),
            max_increase: post.max_increase,
            post,
            classes: Vec::new(),
            horizon: 0,
        });
    }
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let costs = &spec.costs;
    let stops = stop_lines(costs);
    let table = spec.channel2.at(1);
    let grid = opts.grid();
    let mut law_horizon = 0;
    let mut law = stationary_law(o1, spec, 1);
    let mut prev: Option<Vec<ClassLimit>> = None;
    let mut deltas = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    let mut horizon = window + 1;
    loop {
        if law_horizon < horizon {
            law_horizon = (2 * law_horizon).max(horizon);
            law = stationary_law(o1, spec, law_horizon);
        }
        let mut v = Envelope::from_lines(stops);
        let mut classes = Vec::with_capacity(window);
        for t in (1..horizon).rev() {
            let mb = law.step_lik(t, Message::Blank);
            let mut terms = Vec::new();
            for y in 0..table.alphabet() {
                let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
                terms.push((l0 * mb[0], l1 * mb[1], &v));
                for z in 0..spec.m {
                    let mz = law.step_lik(t, Message::Symbol(z));
                    terms.push((l0 * mz[0], l1 * mz[1], &post.value));
                }
            }
            let cont = expectation(&terms).shift(costs.c2);
            let (alpha, beta) = thresholds(costs, &cont);
            let next = Envelope::from_lines(stops.iter().copied().chain(cont.lines().iter().copied()));
            if t <= window {
                classes.push(ClassLimit {
                    t,
                    alpha,
                    beta,
                    grid_values: grid.iter().map(|&p| next.eval(p)).collect(),
                    value: next.clone(),
                });
            }
            v = next;
        }
        classes.reverse();
        let mut delta = f64::INFINITY;
        if let Some(p) = &prev {
            delta = 0.0;
            for (a, b) in classes.iter().zip(p) {
                delta = delta.max(a.value.sup_distance(&b.value));
                for (x, y) in a.grid_values.iter().zip(&b.grid_values) {
                    max_increase = max_increase.max(x - y);
                }
            }
            deltas.push(delta);
        }
        prev = Some(classes);
        if delta < opts.tol || deltas.len() >= opts.max_iter {
            break;
        }
        horizon += 1;
    }
    Ok(O2Limit {
        post,
        classes: prev.unwrap_or_default(),
        horizon,
        deltas,
        max_increase,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O1Limit {
    pub rule: StageRule,
    /// Per-hypothesis O2 cost of each symbol.
    pub send_costs: Vec<[f64; 2]>,
    pub value: Envelope,
    pub grid: Vec<f64>,
    pub grid_values: Vec<f64>,
    pub labels: Vec<Message>,
    pub iterations: usize,
    pub deltas: Vec<f64>,
    pub max_increase: f64,
}

impl O1Limit {
    /// Number of maximal blank runs over the grid.
    pub fn blank_runs(&self) -> usize {
        let mut runs = 0;
        let mut prev = false;
        for l in &self.labels {
            let b = *l == Message::Blank;
            if b && !prev {
                runs += 1;
            }
            prev = b;
        }
        runs
    }
}

fn send_limit(send_costs: Vec<[f64; 2]>, spec: &ProblemSpec, opts: IterationOptions) -> O1Limit {
    let stops: Vec<Line> = send_costs.iter().map(|c| Line::new(c[0], c[1])).collect();
    let table = spec.channel1.at(1);
    let grid = opts.grid();
    let mut value = Envelope::from_lines(stops.iter().copied());
    let mut on_grid: Vec<f64> = grid.iter().map(|&p| value.eval(p)).collect();
    let mut deltas = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    let mut cont;
    loop {
        let (next, c) = bellman(&stops, spec.costs.c1, table, &value);
        let next_grid: Vec<f64> = grid.iter().map(|&p| next.eval(p)).collect();
        for (a, b) in next_grid.iter().zip(&on_grid) {
            max_increase = max_increase.max(a - b);
        }
        deltas.push(next.sup_distance(&value));
        value = next;
        cont = c;
        on_grid = next_grid;
        if deltas[deltas.len() - 1] < opts.tol || deltas.len() >= opts.max_iter {
            break;
        }
    }
    let regions = (0..stops.len())
        .map(|z| {
            if stops[z + 1..].contains(&stops[z]) {
                return None;
            }
            let others = stops
                .iter()
                .enumerate()
                .filter(|&(w, _)| w != z)
                .map(|(_, l)| *l)
                .chain(cont.lines().iter().copied());
            Envelope::from_lines(others)
                .sublevel(&stops[z])
                .map(|(lo, hi)| Interval { lo, hi })
        })
        .collect();
    let rule = StageRule { regions };
    let labels = grid.iter().map(|&p| rule.classify(p)).collect();
    O1Limit {
        rule,
        send_costs,
        value,
        grid,
        grid_values: on_grid,
        labels,
        iterations: deltas.len(),
        deltas,
        max_increase,
    }
}

/// O1's value as its horizon grows, against a fixed finite-horizon O2.
///
/// Needs a P1 problem whose O2 cost for each symbol does not depend on when
/// the symbol is sent.
pub fn value_iterate_o1(o2: &O2Policy, spec: &ProblemSpec, opts: IterationOptions) -> Result<O1Limit> {
    opts.check()?;
    if o2.horizon().is_none() {
        return Err(Error::UnboundedPolicy);
    }
    if spec.variant != Variant::P1 {
        return Err(Error::NonStationary("O2 send costs depend on the message time in P2".into()));
    }
    require_stationary(spec)?;
    let mut send_costs = Vec::with_capacity(spec.m);
    for z in 0..spec.m {
        let a = evaluate_o2_policy(o2, spec, 1, z)?;
        for k in 2..=spec.t1 {
            let b = evaluate_o2_policy(o2, spec, k, z)?;
            if (a[0] - b[0]).abs() > 1e-12 || (a[1] - b[1]).abs() > 1e-12 {
                return Err(Error::NonStationary(format!("cost of symbol {z} changes with the message time")));
            }
        }
        send_costs.push(a);
    }
    Ok(send_limit(send_costs, spec, opts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    O1,
    O2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub role: Role,
    pub horizon: usize,
    pub tail_prob: f64,
    pub epsilon: f64,
    pub formula: String,
}

/// Cost of truncating one observer's policy at its horizon.
///
/// O2: `L * P`. O1: `(c2 * T2 + L) * P`.
pub fn truncation_bound(role: Role, tail_prob: f64, costs: &CostModel, t2: usize) -> Result<TruncationCertificate> {
    if !(0.0..=1.0).contains(&tail_prob) {
        return Err(Error::InvalidArgument(format!("tail probability {tail_prob} outside [0,1]")));
    }
    let (epsilon, formula) = match role {
        Role::O2 => (costs.l * tail_prob, "L*P"),
        Role::O1 => ((costs.c2 * t2 as f64 + costs.l) * tail_prob, "(c2*T2+L)*P"),
    };
    Ok(TruncationCertificate {
        role,
        horizon: t2,
        tail_prob,
        epsilon,
        formula: formula.into(),
    })
}

/// Untruncated policy pair the certificates are measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// O1's stationary rule.
    pub o1: StageRule,
    /// O2's stationary post-message thresholds; O2 waits for the message.
    pub w1: f64,
    pub w2: f64,
}

/// Builds the reference pair: stationary Wald for O2 and O1's limit rule
/// against it, with symbol costs taken at the one-step designer posteriors.
pub fn reference_pair(spec: &ProblemSpec, opts: IterationOptions) -> Result<Reference> {
    opts.check()?;
    require_stationary(spec)?;
    let wald = solve_wald_infinite(&spec.channel2, &spec.costs, opts)?;
    let one = spec.with_horizons(1, 1)?;
    let sol = solve(&one)?;
    let law = message_law(&sol.o1, &one);
    let p0 = spec.prior.p0;
    let send_costs = (0..spec.m)
        .map(|z| {
            let f = law.last[0][z];
            let entry = bayes(p0, f[0], f[1]).unwrap_or(spec.costs.crossing());
            let l = wald.value.active(entry);
            [l.a0, l.a1]
        })
        .collect();
    let limit = send_limit(send_costs, spec, opts);
    Ok(Reference {
        o1: limit.rule,
        w1: wald.w1,
        w2: wald.w2,
    })
}

/// Per-hypothesis mass that keeps continuing through `decisions` stationary
/// Wald decisions, observing in between.
fn wald_survival(start: Vec<(f64, [f64; 2])>, w1: f64, w2: f64, decisions: usize, table: &LikelihoodTable) -> [f64; 2] {
    let mut atoms = start;
    for d in 0..decisions {
        atoms.retain(|a| threshold_decision(w1, w2, a.0) == Decision::Continue);
        if d + 1 == decisions {
            break;
        }
        let mut cands = Vec::new();
        for &(pi, w) in &atoms {
            for y in 0..table.alphabet() {
                let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
                let nw = [w[0] * l0, w[1] * l1];
                if nw[0] + nw[1] > 0.0 {
                    cands.push((bayes(pi, l0, l1).unwrap_or(pi), nw, 1));
                }
            }
        }
        atoms = merge_atoms(&cands).0.into_iter().map(|a| (a.belief, a.weight)).collect();
    }
    atoms.iter().fold([0.0; 2], |acc, a| [acc[0] + a.1[0], acc[1] + a.1[1]])
}

/// Exact tail probabilities of the reference pair at horizon `t` (both observers).
pub fn certificates_at(spec: &ProblemSpec, reference: &Reference, t: usize) -> Result<[TruncationCertificate; 2]> {
    if t == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    require_stationary(spec)?;
    let law = stationary_law(&reference.o1, spec, t);
    let p = [spec.prior.p(0), spec.prior.p(1)];
    let late = p[0] * law.blank[t][0] + p[1] * law.blank[t][1];
    let table = spec.channel2.at(1);
    let (w1, w2) = (reference.w1, reference.w2);
    let mut survive = [0.0; 2];
    match spec.variant {
        Variant::P1 => {
            for k in 1..=t {
                for z in 0..spec.m {
                    let f = law.last[k - 1][z];
                    if f[0] + f[1] <= 0.0 {
                        continue;
                    }
                    let entry = bayes(spec.prior.p0, f[0], f[1]).unwrap_or(spec.prior.p0);
                    let s = wald_survival(vec![(entry, f)], w1, w2, t + 1, table);
                    survive = [survive[0] + s[0], survive[1] + s[1]];
                }
            }
        }
        Variant::P2 => {
            let mut own = vec![(spec.prior.p0, [1.0, 1.0])];
            for k in 1..=t {
                let mut cands = Vec::new();
                for &(q, w) in &own {
                    for y in 0..table.alphabet() {
                        let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
                        let nw = [w[0] * l0, w[1] * l1];
                        if nw[0] + nw[1] > 0.0 {
                            cands.push((bayes(q, l0, l1).unwrap_or(q), nw, 1));
                        }
                    }
                }
                own = merge_atoms(&cands).0.into_iter().map(|a| (a.belief, a.weight)).collect();
                for z in 0..spec.m {
                    let f = law.last[k - 1][z];
                    if f[0] + f[1] <= 0.0 {
                        continue;
                    }
                    let start = own
                        .iter()
                        .map(|&(q, w)| (bayes(q, f[0], f[1]).unwrap_or(q), [w[0] * f[0], w[1] * f[1]]))
                        .collect();
                    let s = wald_survival(start, w1, w2, t - k + 1, table);
                    survive = [survive[0] + s[0], survive[1] + s[1]];
                }
            }
        }
    }
    let tail2 = (p[0] * survive[0] + p[1] * survive[1] + late).min(1.0);
    let o1 = TruncationCertificate {
        horizon: t,
        ..truncation_bound(Role::O1, late.min(1.0), &spec.costs, t)?
    };
    let o2 = truncation_bound(Role::O2, tail2, &spec.costs, t)?;
    Ok([o1, o2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOptions {
    pub max_horizon: usize,
    pub iteration: IterationOptions,
}

impl Default for EpsilonOptions {
    fn default() -> Self {
        Self {
            max_horizon: 4,
            iteration: IterationOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPair {
    /// Designer optimum at `T1 = T2 = horizon`.
    pub solution: DesignerSolution,
    pub horizon: usize,
    pub certificates: [TruncationCertificate; 2],
    pub epsilon: f64,
    pub requested: f64,
    pub reference: Reference,
}

/// Smallest common horizon whose certificates sum to at most `eps`, with the
/// designer's optimum at that horizon.
pub fn epsilon_optimal_pair(spec: &ProblemSpec, eps: f64, opts: EpsilonOptions) -> Result<EpsilonPair> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let reference = reference_pair(spec, opts.iteration)?;
    let mut best = f64::INFINITY;
    for t in 1..=opts.max_horizon {
        let certificates = certificates_at(spec, &reference, t)?;
        let total = certificates[0].epsilon + certificates[1].epsilon;
        best = best.min(total);
        if total <= eps {
            let solution = solve(&spec.with_horizons(t, t)?)?;
            return Ok(EpsilonPair {
                solution,
                horizon: t,
                certificates,
                epsilon: total,
                requested: eps,
                reference,
            });
        }
    }
    Err(Error::EpsilonUnattainable {
        requested: eps,
        max_horizon: opts.max_horizon,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_formulas() {
        let c = CostModel::zero_one(0.05, 0.05);
        assert_eq!(truncation_bound(Role::O2, 0.0, &c, 3).unwrap().epsilon, 0.0);
        assert_eq!(truncation_bound(Role::O2, 0.01, &c, 3).unwrap().epsilon, 0.01);
        let e = truncation_bound(Role::O1, 0.02, &c, 10).unwrap().epsilon;
        assert!((e - 0.03).abs() < 1e-15);
        assert!(truncation_bound(Role::O1, 1.5, &c, 1).is_err());
    }
}
