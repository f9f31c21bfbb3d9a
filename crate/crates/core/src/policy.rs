//! Threshold policies for both observers and the message law they induce.

use serde::{Deserialize, Serialize};

use crate::belief::{bayes, reachable_beliefs, Belief};
use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Variant};

const OVERLAP_TOL: f64 = 1e-12;

/// O1's message at one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Message {
    Blank,
    Symbol(usize),
}

impl std::fmt::Display for Message {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Message::Blank => write!(f, "b"),
            Message::Symbol(z) => write!(f, "{z}"),
        }
    }
}

/// O2's action at one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Continue,
    Declare(usize),
}

/// Closed belief interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, pi: f64) -> bool {
        self.lo <= pi && pi <= self.hi
    }
}

/// Anything that maps O1's belief to a message.
pub trait MessageRule {
    fn classify(&self, pi: Belief) -> Message;
    fn validate(&self, m: usize) -> Result<()>;
}

/// Non-terminal O1 rule: one closed interval per symbol, blank elsewhere.
///
/// Where two intervals touch, the higher symbol wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRule {
    pub regions: Vec<Option<Interval>>,
}

impl StageRule {
    pub fn all_blank(m: usize) -> Self {
        Self {
            regions: vec![None; m],
        }
    }

    /// Builds the rule from `2m` nondecreasing cut indices into sorted atoms.
    ///
    /// Symbol `m-1-i` owns atoms `cuts[2i]..cuts[2i+1]`.
    pub fn from_cuts(atoms: &[f64], cuts: &[usize], m: usize) -> Self {
        let n = atoms.len();
        let mut regions = vec![None; m];
        for i in 0..m {
            let (a, b) = (cuts[2 * i], cuts[2 * i + 1]);
            if a < b {
                let lo = if a == 0 { 0.0 } else { 0.5 * (atoms[a - 1] + atoms[a]) };
                let hi = if b == n { 1.0 } else { 0.5 * (atoms[b - 1] + atoms[b]) };
                regions[m - 1 - i] = Some(Interval { lo, hi });
            }
        }
        Self { regions }
    }

    /// `(alpha, beta, delta, theta)` for binary rules; empty regions collapse.
    pub fn thresholds4(&self) -> Option<[f64; 4]> {
        if self.regions.len() != 2 {
            return None;
        }
        let one = self.regions[1];
        let zero = self.regions[0];
        let (a, b) = match one {
            Some(i) => (i.lo, i.hi),
            None => {
                let x = zero.map(|z| z.lo).unwrap_or(0.0);
                (x, x)
            }
        };
        let (d, t) = match zero {
            Some(i) => (i.lo, i.hi),
            None => (b, b),
        };
        Some([a, b, d, t])
    }

    pub fn mirrored(&self) -> Self {
        let mut regions: Vec<_> = self
            .regions
            .iter()
            .map(|r| r.map(|i| Interval { lo: 1.0 - i.hi, hi: 1.0 - i.lo }))
            .collect();
        regions.reverse();
        Self { regions }
    }
}

impl MessageRule for StageRule {
    fn classify(&self, pi: Belief) -> Message {
        for z in (0..self.regions.len()).rev() {
            if let Some(i) = self.regions[z] {
                if i.contains(pi) {
                    return Message::Symbol(z);
                }
            }
        }
        Message::Blank
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.regions.len() != m {
            return Err(Error::NotPartition(format!("{} regions for {m} symbols", self.regions.len())));
        }
        let mut iv: Vec<Interval> = self.regions.iter().flatten().copied().collect();
        for i in &iv {
            if !(0.0 <= i.lo && i.lo <= i.hi && i.hi <= 1.0) {
                return Err(Error::NotPartition(format!("bad interval [{}, {}]", i.lo, i.hi)));
            }
        }
        iv.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in iv.windows(2) {
            if w[0].hi > w[1].lo + OVERLAP_TOL {
                return Err(Error::NotPartition(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(())
    }
}

/// Terminal O1 rule: `pi <= cuts[0]` sends `m-1`, ..., `pi > cuts[m-2]` sends 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalRule {
    pub cuts: Vec<f64>,
}

impl TerminalRule {
    pub fn single(cut: f64, m: usize) -> Self {
        Self {
            cuts: vec![cut; m - 1],
        }
    }

    /// `m-1` nondecreasing cut indices into sorted atoms.
    pub fn from_cuts(atoms: &[f64], cuts: &[usize]) -> Self {
        let n = atoms.len();
        let cuts = cuts
            .iter()
            .map(|&c| {
                if n == 0 {
                    0.5
                } else if c == 0 {
                    0.5 * atoms[0]
                } else if c == n {
                    0.5 * (atoms[n - 1] + 1.0)
                } else {
                    0.5 * (atoms[c - 1] + atoms[c])
                }
            })
            .collect();
        Self { cuts }
    }

    pub fn symbol(&self, pi: Belief) -> usize {
        let above = self.cuts.iter().filter(|&&c| pi > c).count();
        self.cuts.len() - above
    }

    pub fn mirrored(&self) -> Self {
        let mut cuts: Vec<f64> = self.cuts.iter().map(|c| 1.0 - c).collect();
        cuts.reverse();
        Self { cuts }
    }
}

impl MessageRule for TerminalRule {
    fn classify(&self, pi: Belief) -> Message {
        Message::Symbol(self.symbol(pi))
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.cuts.len() + 1 != m {
            return Err(Error::NotPartition(format!("{} cuts for {m} symbols", self.cuts.len())));
        }
        if self.cuts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotPartition("terminal cuts not ascending".into()));
        }
        Ok(())
    }
}

/// O1's policy: one stage rule per time before the horizon, then a terminal rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O1Policy {
    pub m: usize,
    pub stages: Vec<StageRule>,
    pub terminal: TerminalRule,
}

impl O1Policy {
    /// Sends at t = 1 using a single terminal cut.
    pub fn send_now(cut: f64, m: usize) -> Self {
        Self {
            m,
            stages: Vec::new(),
            terminal: TerminalRule::single(cut, m),
        }
    }

    pub fn horizon(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn act(&self, t: usize, pi: Belief) -> Message {
        if t >= self.horizon() {
            self.terminal.classify(pi)
        } else {
            self.stages[t - 1].classify(pi)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.stages {
            s.validate(self.m)?;
        }
        self.terminal.validate(self.m)
    }

    pub fn mirrored(&self) -> Self {
        Self {
            m: self.m,
            stages: self.stages.iter().map(StageRule::mirrored).collect(),
            terminal: self.terminal.mirrored(),
        }
    }
}

/// O2's pre-message rule: declare 1 at `pi <= alpha`, 0 at `pi >= beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreRule {
    pub alpha: f64,
    pub beta: f64,
}

impl PreRule {
    pub fn decide(&self, pi: Belief) -> Decision {
        threshold_decision(self.alpha, self.beta, pi)
    }

    /// Builds `(alpha, beta)` from cut indices `i <= j` into sorted atoms.
    pub fn from_cuts(atoms: &[f64], i: usize, j: usize) -> Self {
        let n = atoms.len();
        let thr = |c: usize| {
            if c == 0 {
                0.5 * atoms[0]
            } else if c == n {
                0.5 * (atoms[n - 1] + 1.0)
            } else {
                0.5 * (atoms[c - 1] + atoms[c])
            }
        };
        Self {
            alpha: thr(i),
            beta: thr(j),
        }
    }
}

#[inline]
pub(crate) fn threshold_decision(w1: f64, w2: f64, pi: f64) -> Decision {
    if pi >= w2 {
        Decision::Declare(0)
    } else if pi <= w1 {
        Decision::Declare(1)
    } else {
        Decision::Continue
    }
}

/// O2's rule after the final message.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PostRule {
    /// Finite-horizon Wald tables indexed by the number of O2 observations.
    Wald { w1: Vec<f64>, w2: Vec<f64> },
    /// Stationary Wald thresholds with no forced stop.
    Stationary { w1: f64, w2: f64 },
}

/// What O2 assumes about the message process: joint likelihoods per class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `blank[t-1] = P(b_1..b_t | H)` for t = 1..T1-1.
    pub blank: Vec<[f64; 2]>,
    /// `last[k-1][z] = P(b_1..b_{k-1}, z_k | H)`; rows past the end repeat the last row.
    pub last: Vec<Vec<[f64; 2]>>,
}

impl Calibration {
    pub fn blank_lik(&self, t: usize) -> [f64; 2] {
        if t == 0 {
            [1.0, 1.0]
        } else {
            self.blank.get(t - 1).copied().unwrap_or([0.0, 0.0])
        }
    }

    pub fn final_lik(&self, k: usize, z: usize) -> [f64; 2] {
        let row = self.last.get(k.max(1) - 1).or(self.last.last());
        row.and_then(|r| r.get(z).copied()).unwrap_or([0.0, 0.0])
    }
}

/// O2's policy as a fixed map from (own observations, message history) to actions.
///
/// The belief O2 thresholds is Bayes(prior, own likelihood, calibration), so
/// the map does not change when O1's policy does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2Policy {
    pub variant: Variant,
    pub prior: f64,
    /// P2 only: rules for the blank classes t = 1..T1-1.
    pub pre: Vec<PreRule>,
    pub post: PostRule,
    pub calibration: Calibration,
}

impl O2Policy {
    /// Forced-stop index, `None` for a stationary rule.
    pub fn horizon(&self) -> Option<usize> {
        match &self.post {
            PostRule::Wald { w1, .. } => Some(w1.len() - 1),
            PostRule::Stationary { .. } => None,
        }
    }

    /// Combines the own-observation posterior `q` with a message likelihood.
    ///
    /// A class the calibration marks impossible leaves `q` unchanged.
    pub fn belief(&self, q: Belief, lik: [f64; 2]) -> Belief {
        bayes(q, lik[0], lik[1]).unwrap_or(q)
    }

    pub fn pre_decide(&self, t: usize, pi: Belief) -> Decision {
        match self.pre.get(t - 1) {
            Some(r) => r.decide(pi),
            None => Decision::Continue,
        }
    }

    /// Wald decision after `k` own observations.
    pub fn post_decide(&self, k: usize, pi: Belief) -> Decision {
        match &self.post {
            PostRule::Wald { w1, w2 } => {
                let i = k.min(w1.len() - 1);
                threshold_decision(w1[i], w2[i], pi)
            }
            PostRule::Stationary { w1, w2 } => threshold_decision(*w1, *w2, pi),
        }
    }

    pub fn mirrored(&self) -> Self {
        let flip = |l: &[f64; 2]| [l[1], l[0]];
        let post = match &self.post {
            PostRule::Wald { w1, w2 } => PostRule::Wald {
                w1: w2.iter().map(|w| 1.0 - w).collect(),
                w2: w1.iter().map(|w| 1.0 - w).collect(),
            },
            PostRule::Stationary { w1, w2 } => PostRule::Stationary { w1: 1.0 - w2, w2: 1.0 - w1 },
        };
        Self {
            variant: self.variant,
            prior: 1.0 - self.prior,
            pre: self
                .pre
                .iter()
                .map(|r| PreRule {
                    alpha: 1.0 - r.beta,
                    beta: 1.0 - r.alpha,
                })
                .collect(),
            post,
            calibration: Calibration {
                blank: self.calibration.blank.iter().map(flip).collect(),
                last: self
                    .calibration
                    .last
                    .iter()
                    .map(|row| row.iter().rev().map(flip).collect())
                    .collect(),
            },
        }
    }
}

/// Pair of policies, the unit exchanged through JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyPair {
    pub o1: O1Policy,
    pub o2: O2Policy,
}

/// Law of O1's message process under a fixed policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageLaw {
    /// `blank[t] = P(b_1..b_t | H)`, t = 0..T1.
    pub blank: Vec<[f64; 2]>,
    /// `last[k-1][z] = P(tau1 = k, Z = z | H)`.
    pub last: Vec<Vec<[f64; 2]>>,
    pub expected_tau: [f64; 2],
}

impl MessageLaw {
    pub fn calibration(&self, t1: usize) -> Calibration {
        Calibration {
            blank: self.blank[1..t1].to_vec(),
            last: self.last.clone(),
        }
    }

    /// `P(Z_{t+1} = msg | H, b_1..b_t)`, zero where the blank history is impossible.
    pub fn step_lik(&self, t: usize, msg: Message) -> [f64; 2] {
        let s = self.blank[t];
        let num = match msg {
            Message::Blank => self.blank.get(t + 1).copied().unwrap_or([0.0; 2]),
            Message::Symbol(z) => self.last.get(t).map(|r| r[z]).unwrap_or([0.0; 2]),
        };
        [0, 1].map(|h| if s[h] > 0.0 { num[h] / s[h] } else { 0.0 })
    }
}

/// Exact message law of `o1` by forward propagation over reachable atoms.
pub fn message_law(o1: &O1Policy, spec: &ProblemSpec) -> MessageLaw {
    let t1 = spec.t1;
    let set = reachable_beliefs(spec.prior.p0, &spec.channel1, t1);
    let mut mass = vec![1.0f64; 1];
    let mut mass_h = vec![[1.0f64, 1.0]; 1];
    let mut blank = vec![[1.0, 1.0]];
    let mut last = Vec::with_capacity(t1);
    let mut tau = [0.0; 2];
    for t in 1..=t1 {
        let prev = set.level(t - 1);
        let cur = set.level(t);
        let table = spec.channel1.at(t);
        let mut w = vec![[0.0f64; 2]; cur.atoms.len()];
        for (i, ph) in mass_h.iter().enumerate() {
            if mass[i] == 0.0 {
                continue;
            }
            for (y, nx) in prev.next[i].iter().enumerate() {
                if let Some(j) = *nx {
                    w[j][0] += ph[0] * table.lik(y, 0);
                    w[j][1] += ph[1] * table.lik(y, 1);
                }
            }
        }
        let mut row = vec![[0.0; 2]; spec.m];
        let mut b = [0.0; 2];
        let mut next_mass = vec![0.0; cur.atoms.len()];
        let mut next_h = vec![[0.0; 2]; cur.atoms.len()];
        for (j, a) in cur.atoms.iter().enumerate() {
            match o1.act(t, a.belief) {
                Message::Symbol(z) => {
                    row[z][0] += w[j][0];
                    row[z][1] += w[j][1];
                }
                Message::Blank => {
                    b[0] += w[j][0];
                    b[1] += w[j][1];
                    next_h[j] = w[j];
                    next_mass[j] = w[j][0] + w[j][1];
                }
            }
        }
        for h in 0..2 {
            tau[h] += t as f64 * row.iter().map(|r| r[h]).sum::<f64>();
        }
        last.push(row);
        blank.push(b);
        mass = next_mass;
        mass_h = next_h;
    }
    MessageLaw {
        blank,
        last,
        expected_tau: tau,
    }
}

/// O2 policy for P1 built from Wald tables and the message law of `o1`.
pub fn o2_for_p1(w1: Vec<f64>, w2: Vec<f64>, law: &MessageLaw, spec: &ProblemSpec) -> O2Policy {
    O2Policy {
        variant: Variant::P1,
        prior: spec.prior.p0,
        pre: Vec::new(),
        post: PostRule::Wald { w1, w2 },
        calibration: law.calibration(spec.t1),
    }
}

/// Action recorded in a value table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Message(Message),
    Decision(Decision),
}

/// Values and chosen actions on sorted belief atoms for one (time, history) class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub t: usize,
    pub history: String,
    pub atoms: Vec<f64>,
    pub values: Vec<f64>,
    pub actions: Vec<Action>,
}

impl ValueTable {
    /// Largest violation of the midpoint concavity test over adjacent triples.
    pub fn concavity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..self.atoms.len().saturating_sub(1) {
            let (a, b, c) = (self.atoms[i - 1], self.atoms[i], self.atoms[i + 1]);
            if c - a <= 0.0 {
                continue;
            }
            let lam = (b - a) / (c - a);
            let interp = (1.0 - lam) * self.values[i - 1] + lam * self.values[i + 1];
            worst = worst.max(interp - self.values[i]);
        }
        worst
    }
}
