//! Exhaustive search over deterministic history-indexed policies.
//!
//! Policies are trees keyed by raw observation and message histories; no
//! beliefs or thresholds are involved. For a fixed O1 map the O2 cost splits
//! over O2's first information node (message class in P1, first observation
//! and message status in P2), so each subtree is minimized on its own.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::bayes;
use crate::error::{Error, Result};
use crate::model::{CostModel, ObservationChannel, ProblemSpec, Variant};
use crate::policy::{Decision, Message, MessageLaw, O1Policy, O2Policy};

pub const DEFAULT_CAP: f64 = 1e8;

/// Largest number of subtrees materialized for a single node shape.
const SHAPE_LIMIT: f64 = 5e6;

#[derive(Clone, Debug, PartialEq)]
enum O1Tree {
    Send(usize),
    Wait(Vec<O1Tree>),
}

#[derive(Clone, Debug, PartialEq)]
enum O2Tree {
    Stop(usize),
    Go(Vec<O2Tree>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub cost: f64,
    /// O1 action per observation history, e.g. `"0,1" -> "b"`.
    pub o1: BTreeMap<String, String>,
    /// O2 action per (message, observation) history.
    pub o2: BTreeMap<String, String>,
    /// Number of O1 maps enumerated.
    pub o1_policies: u64,
    /// Number of (O1 map, O2 subtree) evaluations.
    pub evaluations: f64,
}

fn product<T: Clone>(choices: &[&[T]]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts.iter() {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn o1_count(spec: &ProblemSpec, t: usize) -> f64 {
    let m = spec.m as f64;
    if t == spec.t1 {
        m
    } else {
        m + o1_count(spec, t + 1).powi(spec.channel1.at(t + 1).alphabet() as i32)
    }
}

/// All O1 subtrees rooted after the observation at time `t`.
fn o1_trees(spec: &ProblemSpec, t: usize) -> Vec<O1Tree> {
    let mut out: Vec<O1Tree> = (0..spec.m).map(O1Tree::Send).collect();
    if t < spec.t1 {
        let sub = o1_trees(spec, t + 1);
        let ny = spec.channel1.at(t + 1).alphabet();
        let slots: Vec<&[O1Tree]> = vec![&sub; ny];
        out.extend(product(&slots).into_iter().map(O1Tree::Wait));
    }
    out
}

fn law_rec(node: &O1Tree, t: usize, ph: [f64; 2], spec: &ProblemSpec, law: &mut MessageLaw) {
    match node {
        O1Tree::Send(z) => {
            for h in 0..2 {
                law.last[t - 1][*z][h] += ph[h];
                law.expected_tau[h] += t as f64 * ph[h];
            }
        }
        O1Tree::Wait(children) => {
            let tab = spec.channel1.at(t + 1);
            for h in 0..2 {
                law.blank[t][h] += ph[h];
            }
            for (y, c) in children.iter().enumerate() {
                law_rec(c, t + 1, [ph[0] * tab.lik(y, 0), ph[1] * tab.lik(y, 1)], spec, law);
            }
        }
    }
}

fn empty_law(spec: &ProblemSpec) -> MessageLaw {
    let mut blank = vec![[0.0; 2]; spec.t1 + 1];
    blank[0] = [1.0, 1.0];
    MessageLaw {
        blank,
        last: vec![vec![[0.0; 2]; spec.m]; spec.t1],
        expected_tau: [0.0; 2],
    }
}

fn law_of_tree(roots: &[O1Tree], spec: &ProblemSpec) -> MessageLaw {
    let mut law = empty_law(spec);
    let tab = spec.channel1.at(1);
    for (y, r) in roots.iter().enumerate() {
        law_rec(r, 1, [tab.lik(y, 0), tab.lik(y, 1)], spec, &mut law);
    }
    law
}

/// Message law of a threshold policy by enumerating every observation path.
pub fn law_by_paths(o1: &O1Policy, spec: &ProblemSpec) -> MessageLaw {
    fn rec(o1: &O1Policy, spec: &ProblemSpec, t: usize, pi: f64, ph: [f64; 2], law: &mut MessageLaw) {
        let tab = spec.channel1.at(t);
        for y in 0..tab.alphabet() {
            let (l0, l1) = (tab.lik(y, 0), tab.lik(y, 1));
            let p = [ph[0] * l0, ph[1] * l1];
            if p == [0.0, 0.0] {
                continue;
            }
            let post = bayes(pi, l0, l1).unwrap_or(pi);
            match o1.act(t, post) {
                Message::Symbol(z) => {
                    for h in 0..2 {
                        law.last[t - 1][z][h] += p[h];
                        law.expected_tau[h] += t as f64 * p[h];
                    }
                }
                Message::Blank => {
                    for h in 0..2 {
                        law.blank[t][h] += p[h];
                    }
                    rec(o1, spec, t + 1, post, p, law);
                }
            }
        }
    }
    let mut law = empty_law(spec);
    rec(o1, spec, 1, spec.prior.p0, [1.0, 1.0], &mut law);
    law
}

fn o1_table(roots: &[O1Tree]) -> BTreeMap<String, String> {
    fn rec(node: &O1Tree, path: &mut Vec<usize>, out: &mut BTreeMap<String, String>) {
        let key = path.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(",");
        match node {
            O1Tree::Send(z) => {
                out.insert(key, z.to_string());
            }
            O1Tree::Wait(ch) => {
                out.insert(key, "b".into());
                for (y, c) in ch.iter().enumerate() {
                    path.push(y);
                    rec(c, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (y, r) in roots.iter().enumerate() {
        rec(r, &mut vec![y], &mut out);
    }
    out
}

/// O2 subtrees after `j` observations in the P1 ordering.
fn o2_trees_p1(ch: &ObservationChannel, j: usize, horizon: usize) -> Vec<O2Tree> {
    let mut out = vec![O2Tree::Stop(0), O2Tree::Stop(1)];
    if j < horizon {
        let sub = o2_trees_p1(ch, j + 1, horizon);
        let slots: Vec<&[O2Tree]> = vec![&sub; ch.at(j + 1).alphabet()];
        out.extend(product(&slots).into_iter().map(O2Tree::Go));
    }
    out
}

fn o2_count_p1(ch: &ObservationChannel, j: usize, horizon: usize) -> f64 {
    if j == horizon {
        2.0
    } else {
        2.0 + o2_count_p1(ch, j + 1, horizon).powi(ch.at(j + 1).alphabet() as i32)
    }
}

fn cost_p1(tree: &O2Tree, j: usize, h: usize, ch: &ObservationChannel, costs: &CostModel) -> f64 {
    match tree {
        O2Tree::Stop(u) => costs.c2 * j as f64 + costs.jc(*u, h),
        O2Tree::Go(children) => {
            let tab = ch.at(j + 1);
            children
                .iter()
                .enumerate()
                .map(|(y, c)| {
                    let p = tab.lik(y, h);
                    if p == 0.0 {
                        0.0
                    } else {
                        p * cost_p1(c, j + 1, h, ch, costs)
                    }
                })
                .sum()
        }
    }
}

fn o2_label(tree: &O2Tree) -> &'static str {
    match tree {
        O2Tree::Stop(0) => "0",
        O2Tree::Stop(_) => "1",
        O2Tree::Go(_) => "N",
    }
}

fn o2_table_p1(prefix: &str, tree: &O2Tree, path: &mut Vec<usize>, out: &mut BTreeMap<String, String>) {
    let key = format!("{prefix}|y={}", path.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(","));
    out.insert(key, o2_label(tree).into());
    if let O2Tree::Go(ch) = tree {
        for (y, c) in ch.iter().enumerate() {
            path.push(y);
            o2_table_p1(prefix, c, path, out);
            path.pop();
        }
    }
}

/// Message status O2 sees: still blank, or the final symbol and its time.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Status {
    Blank,
    Final(usize),
}

struct P2Shapes {
    /// `blank[t]`, `fin[t]`: every subtree at time `t` for each status kind.
    blank: Vec<Vec<O2Tree>>,
    fin: Vec<Vec<O2Tree>>,
}

/// Child statuses from a blank node at time `t`.
fn blank_children(spec: &ProblemSpec, t: usize) -> Vec<Status> {
    let mut s = Vec::with_capacity(spec.m + 1);
    if t + 1 < spec.t1 {
        s.push(Status::Blank);
    }
    s.extend((0..spec.m).map(Status::Final));
    s
}

fn p2_counts(spec: &ProblemSpec) -> (Vec<f64>, Vec<f64>) {
    let t2 = spec.t2;
    let mut b = vec![2.0f64; t2 + 1];
    let mut f = vec![2.0f64; t2 + 1];
    for t in (1..t2).rev() {
        let ny = spec.channel2.at(t + 1).alphabet() as i32;
        f[t] = 2.0 + f[t + 1].powi(ny);
        let per_y: f64 = blank_children(spec, t)
            .iter()
            .map(|s| if *s == Status::Blank { b[t + 1] } else { f[t + 1] })
            .product();
        b[t] = 2.0 + per_y.powi(ny);
    }
    (b, f)
}

fn p2_shapes(spec: &ProblemSpec) -> P2Shapes {
    let t2 = spec.t2;
    let stops = vec![O2Tree::Stop(0), O2Tree::Stop(1)];
    let mut blank = vec![stops.clone(); t2 + 1];
    let mut fin = vec![stops.clone(); t2 + 1];
    for t in (1..t2).rev() {
        let ny = spec.channel2.at(t + 1).alphabet();
        let slots: Vec<&[O2Tree]> = vec![&fin[t + 1]; ny];
        let mut f = stops.clone();
        f.extend(product(&slots).into_iter().map(O2Tree::Go));
        let kinds = blank_children(spec, t);
        let mut slots: Vec<&[O2Tree]> = Vec::new();
        for _ in 0..ny {
            for s in &kinds {
                slots.push(if *s == Status::Blank { &blank[t + 1] } else { &fin[t + 1] });
            }
        }
        let mut b = stops.clone();
        b.extend(product(&slots).into_iter().map(O2Tree::Go));
        fin[t] = f;
        blank[t] = b;
    }
    P2Shapes { blank, fin }
}

fn cost_p2(tree: &O2Tree, t: usize, status: Status, h: usize, law: &MessageLaw, spec: &ProblemSpec) -> f64 {
    match tree {
        O2Tree::Stop(u) => spec.costs.c2 * t as f64 + spec.costs.jc(*u, h),
        O2Tree::Go(children) => {
            let tab = spec.channel2.at(t + 1);
            let kinds = match status {
                Status::Blank => blank_children(spec, t),
                Status::Final(_) => vec![status],
            };
            let mut acc = 0.0;
            for (i, c) in children.iter().enumerate() {
                let (y, s) = (i / kinds.len(), kinds[i % kinds.len()]);
                let ps = match (status, s) {
                    (Status::Final(_), _) => 1.0,
                    (Status::Blank, Status::Blank) => law.step_lik(t, Message::Blank)[h],
                    (Status::Blank, Status::Final(z)) => law.step_lik(t, Message::Symbol(z))[h],
                };
                let p = tab.lik(y, h) * ps;
                if p > 0.0 {
                    acc += p * cost_p2(c, t + 1, s, h, law, spec);
                }
            }
            acc
        }
    }
}

fn status_label(s: Status) -> String {
    match s {
        Status::Blank => "b".into(),
        Status::Final(z) => z.to_string(),
    }
}

fn o2_table_p2(
    spec: &ProblemSpec,
    tree: &O2Tree,
    t: usize,
    status: Status,
    path: &mut Vec<(usize, Status)>,
    out: &mut BTreeMap<String, String>,
) {
    let ys = path.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join(",");
    let ms = path.iter().map(|p| status_label(p.1)).collect::<Vec<_>>().join(",");
    out.insert(format!("y={ys};m={ms}"), o2_label(tree).into());
    if let O2Tree::Go(children) = tree {
        let kinds = match status {
            Status::Blank => blank_children(spec, t),
            Status::Final(_) => vec![status],
        };
        for (i, c) in children.iter().enumerate() {
            let (y, s) = (i / kinds.len(), kinds[i % kinds.len()]);
            path.push((y, s));
            o2_table_p2(spec, c, t + 1, s, path, out);
            path.pop();
        }
    }
}

/// Per-class minimum of the O2 part given a message law; returns cost and argmin indices.
struct O2Part {
    cost: f64,
    picks: Vec<usize>,
}

struct P1Ctx {
    trees: Vec<O2Tree>,
    costs: Vec<[f64; 2]>,
}

impl P1Ctx {
    fn new(spec: &ProblemSpec) -> Self {
        let trees = o2_trees_p1(&spec.channel2, 0, spec.t2);
        let costs = trees
            .iter()
            .map(|t| [0, 1].map(|h| cost_p1(t, 0, h, &spec.channel2, &spec.costs)))
            .collect();
        Self { trees, costs }
    }

    fn solve(&self, law: &MessageLaw, spec: &ProblemSpec) -> O2Part {
        let p = [spec.prior.p(0), spec.prior.p(1)];
        let mut cost = 0.0;
        let mut picks = Vec::new();
        for k in 0..spec.t1 {
            for z in 0..spec.m {
                let f = law.last[k][z];
                let w = [p[0] * f[0], p[1] * f[1]];
                let mut best = (0, f64::INFINITY);
                for (i, c) in self.costs.iter().enumerate() {
                    let v = w[0] * c[0] + w[1] * c[1];
                    if v < best.1 {
                        best = (i, v);
                    }
                }
                cost += best.1;
                picks.push(best.0);
            }
        }
        O2Part { cost, picks }
    }

    fn table(&self, picks: &[usize], spec: &ProblemSpec) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for k in 0..spec.t1 {
            for z in 0..spec.m {
                let tree = &self.trees[picks[k * spec.m + z]];
                o2_table_p1(&format!("k={},z={z}", k + 1), tree, &mut Vec::new(), &mut out);
            }
        }
        out
    }
}

struct P2Ctx {
    shapes: P2Shapes,
    roots: Vec<(usize, Status)>,
}

impl P2Ctx {
    fn new(spec: &ProblemSpec) -> Self {
        let ny = spec.channel2.at(1).alphabet();
        let mut roots = Vec::new();
        for y in 0..ny {
            if spec.t1 > 1 {
                roots.push((y, Status::Blank));
            }
            for z in 0..spec.m {
                roots.push((y, Status::Final(z)));
            }
        }
        Self {
            shapes: p2_shapes(spec),
            roots,
        }
    }

    fn trees(&self, s: Status) -> &[O2Tree] {
        match s {
            Status::Blank => &self.shapes.blank[1],
            Status::Final(_) => &self.shapes.fin[1],
        }
    }

    fn solve(&self, law: &MessageLaw, spec: &ProblemSpec) -> O2Part {
        let tab = spec.channel2.at(1);
        let mut cost = 0.0;
        let mut picks = Vec::with_capacity(self.roots.len());
        for &(y, s) in &self.roots {
            let ps = match s {
                Status::Blank => law.blank[1],
                Status::Final(z) => law.last[0][z],
            };
            let w = [0, 1].map(|h| spec.prior.p(h) * tab.lik(y, h) * ps[h]);
            let mut best = (0, f64::INFINITY);
            if w != [0.0, 0.0] {
                for (i, tree) in self.trees(s).iter().enumerate() {
                    let mut v = 0.0;
                    for h in 0..2 {
                        if w[h] > 0.0 {
                            v += w[h] * cost_p2(tree, 1, s, h, law, spec);
                        }
                    }
                    if v < best.1 {
                        best = (i, v);
                    }
                }
            } else {
                best.1 = 0.0;
            }
            cost += best.1;
            picks.push(best.0);
        }
        O2Part { cost, picks }
    }

    fn table(&self, picks: &[usize], spec: &ProblemSpec) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (r, &(y, s)) in self.roots.iter().enumerate() {
            let tree = &self.trees(s)[picks[r]];
            o2_table_p2(spec, tree, 1, s, &mut vec![(y, s)], &mut out);
        }
        out
    }
}

enum Ctx {
    P1(P1Ctx),
    P2(P2Ctx),
}

impl Ctx {
    fn new(spec: &ProblemSpec, cap: f64, o1_maps: f64) -> Result<Self> {
        let per_map = match spec.variant {
            Variant::P1 => {
                let n = o2_count_p1(&spec.channel2, 0, spec.t2);
                if n > SHAPE_LIMIT {
                    return Err(Error::CapExceeded { estimate: n, cap });
                }
                n * (spec.t1 * spec.m) as f64
            }
            Variant::P2 => {
                let (b, f) = p2_counts(spec);
                if b[1] > SHAPE_LIMIT || f[1] > SHAPE_LIMIT {
                    return Err(Error::CapExceeded {
                        estimate: b[1].max(f[1]),
                        cap,
                    });
                }
                let ny = spec.channel2.at(1).alphabet() as f64;
                let blank = if spec.t1 > 1 { b[1] } else { 0.0 };
                ny * (blank + spec.m as f64 * f[1])
            }
        };
        let estimate = per_map * o1_maps;
        if estimate > cap {
            return Err(Error::CapExceeded { estimate, cap });
        }
        Ok(match spec.variant {
            Variant::P1 => Ctx::P1(P1Ctx::new(spec)),
            Variant::P2 => Ctx::P2(P2Ctx::new(spec)),
        })
    }

    fn solve(&self, law: &MessageLaw, spec: &ProblemSpec) -> O2Part {
        match self {
            Ctx::P1(c) => c.solve(law, spec),
            Ctx::P2(c) => c.solve(law, spec),
        }
    }

    fn table(&self, picks: &[usize], spec: &ProblemSpec) -> BTreeMap<String, String> {
        match self {
            Ctx::P1(c) => c.table(picks, spec),
            Ctx::P2(c) => c.table(picks, spec),
        }
    }

    fn evaluations(&self, spec: &ProblemSpec) -> f64 {
        match self {
            Ctx::P1(c) => (c.trees.len() * spec.t1 * spec.m) as f64,
            Ctx::P2(c) => c.roots.iter().map(|r| c.trees(r.1).len() as f64).sum(),
        }
    }
}

fn o1_cost(law: &MessageLaw, spec: &ProblemSpec) -> f64 {
    (0..2)
        .map(|h| spec.prior.p(h) * spec.costs.c1 * law.expected_tau[h])
        .sum()
}

fn o1_maps(spec: &ProblemSpec) -> f64 {
    o1_count(spec, 1).powi(spec.channel1.at(1).alphabet() as i32)
}

fn all_o1_maps(spec: &ProblemSpec) -> Vec<Vec<O1Tree>> {
    let sub = o1_trees(spec, 1);
    let slots: Vec<&[O1Tree]> = vec![&sub; spec.channel1.at(1).alphabet()];
    product(&slots)
}

fn enumerate(spec: &ProblemSpec, cap: f64) -> Result<OracleResult> {
    let maps_n = o1_maps(spec);
    if maps_n > SHAPE_LIMIT {
        return Err(Error::CapExceeded { estimate: maps_n, cap });
    }
    let ctx = Ctx::new(spec, cap, maps_n)?;
    let maps = all_o1_maps(spec);
    let scored: Vec<(f64, Vec<usize>)> = maps
        .par_iter()
        .map(|roots| {
            let law = law_of_tree(roots, spec);
            let part = ctx.solve(&law, spec);
            (o1_cost(&law, spec) + part.cost, part.picks)
        })
        .collect();
    let mut best = 0;
    for (i, s) in scored.iter().enumerate() {
        if s.0 < scored[best].0 {
            best = i;
        }
    }
    Ok(OracleResult {
        cost: scored[best].0,
        o1: o1_table(&maps[best]),
        o2: ctx.table(&scored[best].1, spec),
        o1_policies: maps.len() as u64,
        evaluations: ctx.evaluations(spec) * maps.len() as f64,
    })
}

/// Global optimum of the P1 problem over all history-indexed policy pairs.
pub fn enumerate_policies_p1(spec: &ProblemSpec, cap: f64) -> Result<OracleResult> {
    if spec.variant != Variant::P1 {
        return Err(Error::Variant("enumerate_policies_p1 needs a P1 problem".into()));
    }
    enumerate(spec, cap)
}

/// Global optimum of the P2 problem over all history-indexed policy pairs.
pub fn enumerate_policies_p2(spec: &ProblemSpec, cap: f64) -> Result<OracleResult> {
    if spec.variant != Variant::P2 {
        return Err(Error::Variant("enumerate_policies_p2 needs a P2 problem".into()));
    }
    enumerate(spec, cap)
}

/// Best O2 map for a fixed O1 threshold policy; returns the team cost.
pub fn best_o2_given_o1(spec: &ProblemSpec, o1: &O1Policy, cap: f64) -> Result<f64> {
    let ctx = Ctx::new(spec, cap, 1.0)?;
    let law = law_by_paths(o1, spec);
    Ok(o1_cost(&law, spec) + ctx.solve(&law, spec).cost)
}

/// O2's expected cost per hypothesis for class `(k, z)`, by walking raw paths.
fn o2_cost_by_paths(o2: &O2Policy, spec: &ProblemSpec, k: usize, z: usize) -> [f64; 2] {
    let lik = o2.calibration.final_lik(k, z);
    let horizon = o2.horizon().unwrap_or(usize::MAX);
    let c = &spec.costs;
    let mut out = [0.0; 2];
    for h in 0..2 {
        let mut stack = vec![(0usize, o2.prior, 1.0f64)];
        while let Some((t, q, p)) = stack.pop() {
            let d = match spec.variant {
                Variant::P1 => o2.post_decide(t, o2.belief(q, lik)),
                Variant::P2 if t == 0 => Decision::Continue,
                Variant::P2 if t < k => o2.pre_decide(t, o2.belief(q, o2.calibration.blank_lik(t))),
                Variant::P2 => o2.post_decide(t, o2.belief(q, lik)),
            };
            let d = if t >= horizon && d == Decision::Continue {
                Decision::Declare(0)
            } else {
                d
            };
            match d {
                Decision::Declare(u) => out[h] += p * (c.c2 * t as f64 + c.jc(u, h)),
                Decision::Continue => {
                    let tab = spec.channel2.at(t + 1);
                    for y in 0..tab.alphabet() {
                        let (l0, l1) = (tab.lik(y, 0), tab.lik(y, 1));
                        let py = if h == 0 { l0 } else { l1 };
                        if py > 0.0 {
                            stack.push((t + 1, bayes(q, l0, l1).unwrap_or(q), p * py));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Best O1 map for a fixed O2 policy; returns the team cost and the O1 table.
pub fn best_o1_given_o2(spec: &ProblemSpec, o2: &O2Policy, cap: f64) -> Result<(f64, BTreeMap<String, String>)> {
    let maps_n = o1_maps(spec);
    if maps_n > cap.min(SHAPE_LIMIT) {
        return Err(Error::CapExceeded { estimate: maps_n, cap });
    }
    let send: Vec<Vec<[f64; 2]>> = (1..=spec.t1)
        .map(|k| (0..spec.m).map(|z| o2_cost_by_paths(o2, spec, k, z)).collect())
        .collect();
    let maps = all_o1_maps(spec);
    let scored: Vec<f64> = maps
        .par_iter()
        .map(|roots| {
            let law = law_of_tree(roots, spec);
            let mut v = o1_cost(&law, spec);
            for k in 0..spec.t1 {
                for z in 0..spec.m {
                    for h in 0..2 {
                        v += spec.prior.p(h) * law.last[k][z][h] * send[k][z][h];
                    }
                }
            }
            v
        })
        .collect();
    let mut best = 0;
    for (i, &s) in scored.iter().enumerate() {
        if s < scored[best] {
            best = i;
        }
    }
    Ok((scored[best], o1_table(&maps[best])))
}

/// Exhaustive optimum over history-indexed stopping rules for a Wald problem.
///
/// Returns the optimal cost at `prior` and the number of rules enumerated.
pub fn enumerate_stopping_rules(
    channel: &ObservationChannel,
    costs: &CostModel,
    horizon: usize,
    prior: f64,
) -> Result<(f64, usize)> {
    let n = o2_count_p1(channel, 0, horizon);
    if n > SHAPE_LIMIT {
        return Err(Error::CapExceeded {
            estimate: n,
            cap: SHAPE_LIMIT,
        });
    }
    let trees = o2_trees_p1(channel, 0, horizon);
    let best = trees
        .iter()
        .map(|t| prior * cost_p1(t, 0, 0, channel, costs) + (1.0 - prior) * cost_p1(t, 0, 1, channel, costs))
        .fold(f64::INFINITY, f64::min);
    Ok((best, trees.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LikelihoodTable;

    #[test]
    fn stopping_rule_count() {
        let ch = ObservationChannel::stationary(2, LikelihoodTable::symmetric(0.2));
        let c = CostModel::zero_one(0.05, 0.05);
        let (v, n) = enumerate_stopping_rules(&ch, &c, 3, 0.5).unwrap();
        assert_eq!(n, 1446);
        assert!(v <= 0.5);
        let (v1, _) = enumerate_stopping_rules(&ch, &c, 1, 0.5).unwrap();
        assert!((v1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uninformative_optimum() {
        let u = || ObservationChannel::stationary(1, LikelihoodTable::uninformative());
        let mut c2 = u();
        c2.observer = 2;
        let spec = ProblemSpec::new(0.3, u(), c2, CostModel::zero_one(0.1, 0.05), 2, 1, Variant::P1, 2).unwrap();
        let r = enumerate_policies_p1(&spec, DEFAULT_CAP).unwrap();
        assert!((r.cost - (0.1 + 0.3)).abs() < 1e-12);
        let p2 = spec.with_horizons(1, 1).unwrap().with_variant(Variant::P2).unwrap();
        let r = enumerate_policies_p2(&p2, DEFAULT_CAP).unwrap();
        assert!((r.cost - (0.1 + 0.05 + 0.3)).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let ch = |o| ObservationChannel::stationary(o, LikelihoodTable::symmetric(0.2));
        let spec = ProblemSpec::new(0.5, ch(1), ch(2), CostModel::zero_one(0.05, 0.05), 3, 3, Variant::P1, 2).unwrap();
        match enumerate_policies_p1(&spec, 1e3) {
            Err(Error::CapExceeded { estimate, .. }) => assert!(estimate > 1e3),
            other => panic!("expected cap error, got {other:?}"),
        }
    }
}
