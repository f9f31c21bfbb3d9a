//! The designer's sequential decomposition.
//!
//! Costs depend on thresholds only through which reachable atoms fall in
//! which region, so each stage is searched over interval partitions of the
//! sorted atoms. Recursion runs on information states and is memoized on a
//! rounded canonical key.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::belief::{bayes, merge_atoms};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::model::{LikelihoodTable, ProblemSpec, Variant};
use crate::policy::{
    message_law, o2_for_p1, Decision, Message, MessageRule, O1Policy, O2Policy, PostRule, PreRule, StageRule,
    TerminalRule,
};
use crate::wald::solve_wald_finite;

/// Candidates must beat the incumbent by this much to replace it.
const TIE_TOL: f64 = 1e-12;
/// Resolution of the memo key.
const KEY_SCALE: f64 = 1e10;

/// A belief atom with joint mass `P(H = h, atom)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassAtom {
    pub belief: f64,
    pub mass: [f64; 2],
}

/// O2's active (not yet stopped) branch: own-observation belief and `P(path | H)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2Atom {
    pub own: f64,
    pub weight: [f64; 2],
}

fn marginal(atoms: &[MassAtom]) -> [f64; 2] {
    atoms.iter().fold([0.0; 2], |acc, a| [acc[0] + a.mass[0], acc[1] + a.mass[1]])
}

fn scaled(atoms: &[MassAtom], s: f64) -> Vec<MassAtom> {
    atoms
        .iter()
        .map(|a| MassAtom {
            belief: a.belief,
            mass: [a.mass[0] * s, a.mass[1] * s],
        })
        .collect()
}

fn push_forward(atoms: &[MassAtom], table: &LikelihoodTable) -> Vec<MassAtom> {
    let mut cands = Vec::with_capacity(atoms.len() * table.alphabet());
    for a in atoms {
        for y in 0..table.alphabet() {
            let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
            let w = [a.mass[0] * l0, a.mass[1] * l1];
            if w[0] + w[1] > 0.0 {
                cands.push((bayes(a.belief, l0, l1).unwrap_or(a.belief), w, 1));
            }
        }
    }
    merge_atoms(&cands)
        .0
        .into_iter()
        .map(|a| MassAtom {
            belief: a.belief,
            mass: a.weight,
        })
        .collect()
}

fn split_o2(atoms: &[O2Atom], table: &LikelihoodTable) -> Vec<O2Atom> {
    let mut cands = Vec::with_capacity(atoms.len() * table.alphabet());
    for a in atoms {
        for y in 0..table.alphabet() {
            let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
            let w = [a.weight[0] * l0, a.weight[1] * l1];
            if w[0] + w[1] > 0.0 {
                cands.push((bayes(a.own, l0, l1).unwrap_or(a.own), w, 1));
            }
        }
    }
    merge_atoms(&cands)
        .0
        .into_iter()
        .map(|a| O2Atom {
            own: a.belief,
            weight: a.weight,
        })
        .collect()
}

/// `P(H, pi1_t | blank messages so far)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoStateP1 {
    pub t: usize,
    pub atoms: Vec<MassAtom>,
}

impl InfoStateP1 {
    /// State at t = 1: the prior pushed through O1's first observation.
    pub fn initial(spec: &ProblemSpec) -> Self {
        let start = [MassAtom {
            belief: spec.prior.p0,
            mass: [spec.prior.p(0), spec.prior.p(1)],
        }];
        Self {
            t: 1,
            atoms: push_forward(&start, spec.channel1.at(1)),
        }
    }

    pub fn total_mass(&self) -> f64 {
        let m = marginal(&self.atoms);
        m[0] + m[1]
    }

    pub fn marginal(&self) -> [f64; 2] {
        marginal(&self.atoms)
    }

    pub fn beliefs(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.belief).collect()
    }
}

/// Restricts `xi` to the atoms the rule maps to `z` and renormalizes.
pub fn q1_p1(xi: &InfoStateP1, rule: &dyn MessageRule, z: Message) -> Result<InfoStateP1> {
    let kept: Vec<MassAtom> = xi.atoms.iter().filter(|a| rule.classify(a.belief) == z).copied().collect();
    let m = marginal(&kept);
    let p = m[0] + m[1];
    if p <= 0.0 {
        return Err(Error::UnreachableMessage);
    }
    Ok(InfoStateP1 {
        t: xi.t,
        atoms: scaled(&kept, 1.0 / p),
    })
}

/// Pushes the blank-conditioned state through O1's next observation.
pub fn q2_p1(eta_b: &InfoStateP1, next: &LikelihoodTable) -> InfoStateP1 {
    InfoStateP1 {
        t: eta_b.t + 1,
        atoms: push_forward(&eta_b.atoms, next),
    }
}

/// `P(H, pi1, pi2, D | blank messages so far)` in product form.
///
/// Given H the two observers' paths are independent, so the joint measure is
/// `o1[i].mass[h] * o2[j].weight[h]`. Stopped O2 branches are pooled in
/// `stopped`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoStateP2 {
    pub t: usize,
    pub o1: Vec<MassAtom>,
    pub o2: Vec<O2Atom>,
    pub stopped: [f64; 2],
}

/// One atom of the expanded joint measure; `pi2` is `None` once O2 has stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointAtom {
    pub h: usize,
    pub pi1: f64,
    pub pi2: Option<f64>,
    pub mass: f64,
}

impl InfoStateP2 {
    pub fn initial(spec: &ProblemSpec) -> Self {
        Self {
            t: 1,
            o1: InfoStateP1::initial(spec).atoms,
            o2: vec![O2Atom {
                own: spec.prior.p0,
                weight: [1.0, 1.0],
            }],
            stopped: [0.0; 2],
        }
    }

    pub fn marginal(&self) -> [f64; 2] {
        marginal(&self.o1)
    }

    /// O2's belief on an active branch given the message history.
    pub fn o2_belief(&self, a: &O2Atom) -> f64 {
        let m = self.marginal();
        let w = [m[0] * a.weight[0], m[1] * a.weight[1]];
        w[0] / (w[0] + w[1])
    }

    pub fn joint(&self) -> Vec<JointAtom> {
        let mut out = Vec::new();
        for a in &self.o1 {
            for h in 0..2 {
                for b in &self.o2 {
                    out.push(JointAtom {
                        h,
                        pi1: a.belief,
                        pi2: Some(self.o2_belief(b)),
                        mass: a.mass[h] * b.weight[h],
                    });
                }
                if self.stopped[h] > 0.0 {
                    out.push(JointAtom {
                        h,
                        pi1: a.belief,
                        pi2: None,
                        mass: a.mass[h] * self.stopped[h],
                    });
                }
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.joint().iter().map(|j| j.mass).sum()
    }
}

/// Restricts to message `z`, renormalizes, and advances O2 by its observation at `t`.
pub fn q1_p2(psi: &InfoStateP2, rule: &dyn MessageRule, z: Message, table2: &LikelihoodTable) -> Result<InfoStateP2> {
    let kept: Vec<MassAtom> = psi.o1.iter().filter(|a| rule.classify(a.belief) == z).copied().collect();
    let m = marginal(&kept);
    let p = m[0] + m[1];
    if p <= 0.0 {
        return Err(Error::UnreachableMessage);
    }
    Ok(InfoStateP2 {
        t: psi.t,
        o1: scaled(&kept, 1.0 / p),
        o2: split_o2(&psi.o2, table2),
        stopped: psi.stopped,
    })
}

/// Applies O2's blank-history rule, then pushes O1 through its next observation.
pub fn q2_p2(phi_b: &InfoStateP2, rule: &PreRule, next: &LikelihoodTable) -> InfoStateP2 {
    let mut o2 = Vec::new();
    let mut stopped = phi_b.stopped;
    for a in &phi_b.o2 {
        if rule.decide(phi_b.o2_belief(a)) == Decision::Continue {
            o2.push(*a);
        } else {
            stopped[0] += a.weight[0];
            stopped[1] += a.weight[1];
        }
    }
    InfoStateP2 {
        t: phi_b.t + 1,
        o1: push_forward(&phi_b.o1, next),
        o2,
        stopped,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub memo_hits: u64,
    pub partitions: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignerSolution {
    pub variant: Variant,
    pub cost: f64,
    pub o1: O1Policy,
    pub o2: O2Policy,
    pub stats: SearchStats,
}

/// Nondecreasing vectors of length `k` over `0..=n`, in lexicographic order.
fn cut_vectors(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in from..=n {
            cur.push(c);
            rec(n, k, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

struct Partition {
    /// `(symbol, lo, hi)` over sorted atom indices.
    sends: Vec<(usize, usize, usize)>,
    blank: Vec<bool>,
}

fn partition(n: usize, cuts: &[usize], m: usize, terminal: bool) -> Partition {
    let mut sends = Vec::with_capacity(m);
    let mut blank = vec![!terminal; n];
    if terminal {
        let mut lo = 0;
        for (i, &c) in cuts.iter().enumerate() {
            sends.push((m - 1 - i, lo, c));
            lo = c;
        }
        sends.push((0, lo, n));
    } else {
        for i in 0..m {
            let (lo, hi) = (cuts[2 * i], cuts[2 * i + 1]);
            sends.push((m - 1 - i, lo, hi));
            for b in &mut blank[lo..hi] {
                *b = false;
            }
        }
    }
    sends.retain(|s| s.1 < s.2);
    Partition { sends, blank }
}

fn prefix(atoms: &[MassAtom]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]];
    for a in atoms {
        let l = out[out.len() - 1];
        out.push([l[0] + a.mass[0], l[1] + a.mass[1]]);
    }
    out
}

fn range(pre: &[[f64; 2]], lo: usize, hi: usize) -> [f64; 2] {
    [pre[hi][0] - pre[lo][0], pre[hi][1] - pre[lo][1]]
}

/// `P(event) * K(posterior)` from the event's joint masses.
fn kval(k: &Envelope, w: [f64; 2]) -> f64 {
    let s = w[0] + w[1];
    if s <= 0.0 {
        0.0
    } else {
        s * k.eval(w[0] / s)
    }
}

fn select(atoms: &[MassAtom], mask: &[bool]) -> Vec<MassAtom> {
    atoms.iter().zip(mask).filter(|(_, &b)| b).map(|(a, _)| *a).collect()
}

fn round(x: f64) -> i64 {
    (x * KEY_SCALE).round() as i64
}

type Key = (usize, Vec<[i64; 3]>, Vec<[i64; 3]>);

fn key(t: usize, o1: &[MassAtom], o2: &[O2Atom]) -> Key {
    (
        t,
        o1.iter().map(|a| [round(a.belief), round(a.mass[0]), round(a.mass[1])]).collect(),
        o2.iter().map(|a| [round(a.own), round(a.weight[0]), round(a.weight[1])]).collect(),
    )
}

struct P1Search<'a> {
    spec: &'a ProblemSpec,
    k: Envelope,
    memo: HashMap<Key, (f64, Vec<usize>)>,
    stats: SearchStats,
}

impl P1Search<'_> {
    fn blank_state(&self, xi: &InfoStateP1, mask: &[bool]) -> (f64, Option<InfoStateP1>) {
        let kept = select(&xi.atoms, mask);
        let m = marginal(&kept);
        let p = m[0] + m[1];
        if p <= 0.0 {
            return (0.0, None);
        }
        let eta = InfoStateP1 {
            t: xi.t,
            atoms: scaled(&kept, 1.0 / p),
        };
        (p, Some(q2_p1(&eta, self.spec.channel1.at(xi.t + 1))))
    }

    fn value(&mut self, xi: &InfoStateP1) -> f64 {
        let key = key(xi.t, &xi.atoms, &[]);
        if let Some((v, _)) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return *v;
        }
        self.stats.nodes += 1;
        let (n, m) = (xi.atoms.len(), self.spec.m);
        let terminal = xi.t == self.spec.t1;
        let pre = prefix(&xi.atoms);
        let mut blank_cache: HashMap<Vec<bool>, f64> = HashMap::new();
        let mut best = (f64::INFINITY, Vec::new());
        for cuts in cut_vectors(n, if terminal { m - 1 } else { 2 * m }) {
            self.stats.partitions += 1;
            let part = partition(n, &cuts, m, terminal);
            let mut v = self.spec.costs.c1;
            for &(_, lo, hi) in &part.sends {
                v += kval(&self.k, range(&pre, lo, hi));
            }
            if part.blank.iter().any(|&b| b) {
                v += match blank_cache.get(&part.blank) {
                    Some(x) => *x,
                    None => {
                        let x = match self.blank_state(xi, &part.blank) {
                            (p, Some(next)) => p * self.value(&next),
                            _ => 0.0,
                        };
                        blank_cache.insert(part.blank.clone(), x);
                        x
                    }
                };
            }
            if v < best.0 - TIE_TOL {
                best = (v, cuts);
            }
        }
        self.memo.insert(key, best.clone());
        best.0
    }

    fn policy(&self) -> O1Policy {
        let (spec, m) = (self.spec, self.spec.m);
        let mut xi = InfoStateP1::initial(spec);
        let mut stages = Vec::new();
        let mut terminal = None;
        loop {
            let cuts = &self.memo[&key(xi.t, &xi.atoms, &[])].1;
            let beliefs = xi.beliefs();
            if xi.t == spec.t1 {
                terminal = Some(TerminalRule::from_cuts(&beliefs, cuts));
                break;
            }
            stages.push(StageRule::from_cuts(&beliefs, cuts, m));
            let part = partition(beliefs.len(), cuts, m, false);
            match self.blank_state(&xi, &part.blank) {
                (_, Some(next)) => xi = next,
                _ => break,
            }
        }
        stages.resize(spec.t1 - 1, StageRule::all_blank(m));
        O1Policy {
            m,
            stages,
            terminal: terminal.unwrap_or_else(|| TerminalRule::single(spec.costs.crossing(), m)),
        }
    }
}

/// Global optimum of the P1 problem.
pub fn solve_p1(spec: &ProblemSpec) -> Result<DesignerSolution> {
    spec.validate()?;
    if spec.variant != Variant::P1 {
        return Err(Error::Variant("solve_p1 needs a P1 problem".into()));
    }
    let wald = solve_wald_finite(&spec.channel2, &spec.costs, spec.t2);
    let mut search = P1Search {
        spec,
        k: wald.values[0].clone(),
        memo: HashMap::new(),
        stats: SearchStats::default(),
    };
    let cost = search.value(&InfoStateP1::initial(spec));
    let o1 = search.policy();
    let law = message_law(&o1, spec);
    let o2 = o2_for_p1(wald.w1, wald.w2, &law, spec);
    Ok(DesignerSolution {
        variant: Variant::P1,
        cost,
        o1,
        o2,
        stats: search.stats,
    })
}

/// Memo entry for P2: value, O1 cuts, and O2 cuts for the resulting blank branch.
type P2Entry = (f64, Vec<usize>, Option<(usize, usize)>);

struct P2Search<'a> {
    spec: &'a ProblemSpec,
    values: Vec<Envelope>,
    memo: HashMap<Key, P2Entry>,
    stats: SearchStats,
}

impl P2Search<'_> {
    /// Blank-branch state before O2's decision, and its probability.
    fn blank_state(&self, psi: &InfoStateP2, mask: &[bool], o2_next: &[O2Atom]) -> (f64, Option<InfoStateP2>) {
        let kept = select(&psi.o1, mask);
        let m = marginal(&kept);
        let p = m[0] + m[1];
        if p <= 0.0 {
            return (0.0, None);
        }
        let phi = InfoStateP2 {
            t: psi.t,
            o1: scaled(&kept, 1.0 / p),
            o2: o2_next.to_vec(),
            stopped: psi.stopped,
        };
        (p, Some(phi))
    }

    fn after_o2(&self, phi: &InfoStateP2, i: usize, j: usize) -> InfoStateP2 {
        let mut stopped = phi.stopped;
        for a in phi.o2[..i].iter().chain(&phi.o2[j..]) {
            stopped[0] += a.weight[0];
            stopped[1] += a.weight[1];
        }
        InfoStateP2 {
            t: phi.t + 1,
            o1: push_forward(&phi.o1, self.spec.channel1.at(phi.t + 1)),
            o2: phi.o2[i..j].to_vec(),
            stopped,
        }
    }

    /// Best O2 cut over the blank branch; returns `(cost, (i, j))` weighted by `p`.
    fn blank_value(&mut self, p: f64, phi: &InfoStateP2) -> (f64, (usize, usize)) {
        let j_cost = &self.spec.costs;
        let mb = phi.marginal();
        let n2 = phi.o2.len();
        // stop costs per atom, weighted by the blank-branch probability
        let stop: Vec<[f64; 2]> = phi
            .o2
            .iter()
            .map(|a| {
                let w = [p * mb[0] * a.weight[0], p * mb[1] * a.weight[1]];
                [0, 1].map(|u| w[0] * j_cost.jc(u, 0) + w[1] * j_cost.jc(u, 1))
            })
            .collect();
        let mut best = (f64::INFINITY, (0, 0));
        for i in 0..=n2 {
            for j in i..=n2 {
                self.stats.partitions += 1;
                let mut v: f64 = stop[..i].iter().map(|s| s[1]).sum::<f64>() + stop[j..].iter().map(|s| s[0]).sum::<f64>();
                let next = self.after_o2(phi, i, j);
                v += p * self.value(&next);
                if v < best.0 - TIE_TOL {
                    best = (v, (i, j));
                }
            }
        }
        best
    }

    fn value(&mut self, psi: &InfoStateP2) -> f64 {
        let key = key(psi.t, &psi.o1, &psi.o2);
        if let Some((v, ..)) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return *v;
        }
        self.stats.nodes += 1;
        let spec = self.spec;
        let (n, m, t) = (psi.o1.len(), spec.m, psi.t);
        let terminal = t == spec.t1;
        let pre = prefix(&psi.o1);
        let hm = psi.marginal();
        let active = psi.o2.iter().fold([0.0; 2], |acc, a| [acc[0] + a.weight[0], acc[1] + a.weight[1]]);
        let base = spec.costs.c1 + spec.costs.c2 * (hm[0] * active[0] + hm[1] * active[1]);
        let o2_next = split_o2(&psi.o2, spec.channel2.at(t));
        let k = self.values[t].clone();
        let final_cost = |w: [f64; 2]| -> f64 {
            o2_next
                .iter()
                .map(|a| kval(&k, [w[0] * a.weight[0], w[1] * a.weight[1]]))
                .sum()
        };
        let mut blank_cache: HashMap<Vec<bool>, (f64, Option<(usize, usize)>)> = HashMap::new();
        let mut best: P2Entry = (f64::INFINITY, Vec::new(), None);
        for cuts in cut_vectors(n, if terminal { m - 1 } else { 2 * m }) {
            self.stats.partitions += 1;
            let part = partition(n, &cuts, m, terminal);
            let mut v = base;
            for &(_, lo, hi) in &part.sends {
                v += final_cost(range(&pre, lo, hi));
            }
            let mut o2_cut = None;
            if part.blank.iter().any(|&b| b) {
                let (x, c) = match blank_cache.get(&part.blank) {
                    Some(e) => *e,
                    None => {
                        let e = match self.blank_state(psi, &part.blank, &o2_next) {
                            (p, Some(phi)) => {
                                let (x, c) = self.blank_value(p, &phi);
                                (x, Some(c))
                            }
                            _ => (0.0, None),
                        };
                        blank_cache.insert(part.blank.clone(), e);
                        e
                    }
                };
                v += x;
                o2_cut = c;
            }
            if v < best.0 - TIE_TOL {
                best = (v, cuts, o2_cut);
            }
        }
        self.memo.insert(key, best.clone());
        best.0
    }

    fn policies(&self) -> (O1Policy, Vec<PreRule>) {
        let (spec, m) = (self.spec, self.spec.m);
        let idle = PreRule { alpha: 0.0, beta: 1.0 };
        let mut psi = InfoStateP2::initial(spec);
        let mut stages = Vec::new();
        let mut pre = Vec::new();
        let mut terminal = None;
        loop {
            let (_, cuts, o2_cut) = &self.memo[&key(psi.t, &psi.o1, &psi.o2)];
            let beliefs: Vec<f64> = psi.o1.iter().map(|a| a.belief).collect();
            if psi.t == spec.t1 {
                terminal = Some(TerminalRule::from_cuts(&beliefs, cuts));
                break;
            }
            stages.push(StageRule::from_cuts(&beliefs, cuts, m));
            let part = partition(beliefs.len(), cuts, m, false);
            let o2_next = split_o2(&psi.o2, spec.channel2.at(psi.t));
            let phi = match self.blank_state(&psi, &part.blank, &o2_next) {
                (_, Some(phi)) => phi,
                _ => break,
            };
            let (i, j) = o2_cut.expect("reachable blank branch has an O2 cut");
            let pi2: Vec<f64> = phi.o2.iter().map(|a| phi.o2_belief(a)).collect();
            pre.push(if pi2.is_empty() {
                idle
            } else {
                PreRule::from_cuts(&pi2, i, j)
            });
            psi = self.after_o2(&phi, i, j);
        }
        stages.resize(spec.t1 - 1, StageRule::all_blank(m));
        pre.resize(spec.t1 - 1, idle);
        let o1 = O1Policy {
            m,
            stages,
            terminal: terminal.unwrap_or_else(|| TerminalRule::single(spec.costs.crossing(), m)),
        };
        (o1, pre)
    }
}

/// Global optimum of the P2 problem.
pub fn solve_p2(spec: &ProblemSpec) -> Result<DesignerSolution> {
    spec.validate()?;
    if spec.variant != Variant::P2 {
        return Err(Error::Variant("solve_p2 needs a P2 problem".into()));
    }
    let wald = solve_wald_finite(&spec.channel2, &spec.costs, spec.t2);
    let mut search = P2Search {
        spec,
        values: wald.values.clone(),
        memo: HashMap::new(),
        stats: SearchStats::default(),
    };
    let cost = search.value(&InfoStateP2::initial(spec));
    let (o1, pre) = search.policies();
    let law = message_law(&o1, spec);
    let o2 = O2Policy {
        variant: Variant::P2,
        prior: spec.prior.p0,
        pre,
        post: PostRule::Wald {
            w1: wald.w1,
            w2: wald.w2,
        },
        calibration: law.calibration(spec.t1),
    };
    Ok(DesignerSolution {
        variant: Variant::P2,
        cost,
        o1,
        o2,
        stats: search.stats,
    })
}

/// Dispatches on the problem's variant.
pub fn solve(spec: &ProblemSpec) -> Result<DesignerSolution> {
    match spec.variant {
        Variant::P1 => solve_p1(spec),
        Variant::P2 => solve_p2(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostModel, ObservationChannel};

    #[test]
    fn cut_vector_count() {
        assert_eq!(cut_vectors(3, 4).len(), 35);
        assert_eq!(cut_vectors(3, 1).len(), 4);
        assert_eq!(cut_vectors(0, 4).len(), 1);
    }

    #[test]
    fn pushforward_sym() {
        let start = [MassAtom {
            belief: 0.5,
            mass: [0.5, 0.5],
        }];
        let out = push_forward(&start, &LikelihoodTable::symmetric(0.2));
        assert_eq!(out.len(), 2);
        assert!((out[0].belief - 0.2).abs() < 1e-15);
        assert!((out[0].mass[0] - 0.1).abs() < 1e-15 && (out[0].mass[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn uninformative_sends_at_once() {
        let u = |o| ObservationChannel::stationary(o, LikelihoodTable::uninformative());
        let spec = ProblemSpec::new(0.3, u(1), u(2), CostModel::zero_one(0.1, 0.05), 3, 2, Variant::P1, 2).unwrap();
        let s = solve_p1(&spec).unwrap();
        assert!((s.cost - 0.4).abs() < 1e-12);
    }
}
