//! Posterior updates and reachable belief sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LikelihoodTable, ObservationChannel};
use crate::policy::{Message, MessageRule};

/// Posterior probability of `{H = 0}`.
pub type Belief = f64;

/// Absolute tolerance under which two beliefs are the same atom.
pub const ATOM_TOL: f64 = 1e-12;

/// Bayes rule with likelihoods `l0 = P(e | H=0)` and `l1 = P(e | H=1)`.
#[inline]
pub fn bayes(pi: Belief, l0: f64, l1: f64) -> Option<Belief> {
    let num = l0 * pi;
    let den = num + l1 * (1.0 - pi);
    if den > 0.0 {
        Some((num / den).clamp(0.0, 1.0))
    } else {
        None
    }
}

/// Predictive probability of symbol `y` at belief `pi`.
#[inline]
pub fn predictive(pi: Belief, y: usize, table: &LikelihoodTable) -> f64 {
    table.lik(y, 0) * pi + table.lik(y, 1) * (1.0 - pi)
}

pub fn update_observer1(pi: Belief, y: usize, table: &LikelihoodTable) -> Result<Belief> {
    if y >= table.alphabet() {
        return Err(Error::InvalidArgument(format!("symbol {y} outside alphabet")));
    }
    bayes(pi, table.lik(y, 0), table.lik(y, 1)).ok_or(Error::ImpossibleObservation)
}

pub fn update_observer2(pi2: Belief, y2: usize, table: &LikelihoodTable, msg_lik: [f64; 2]) -> Result<Belief> {
    if y2 >= table.alphabet() {
        return Err(Error::InvalidArgument(format!("symbol {y2} outside alphabet")));
    }
    bayes(pi2, table.lik(y2, 0) * msg_lik[0], table.lik(y2, 1) * msg_lik[1]).ok_or(Error::ImpossiblePair)
}

/// Per-hypothesis probability of each message under a region rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageLikelihood {
    /// `symbols[z] = [P(z | H=0), P(z | H=1)]`.
    pub symbols: Vec<[f64; 2]>,
    pub blank: [f64; 2],
}

impl MessageLikelihood {
    pub fn of(&self, msg: Message) -> [f64; 2] {
        match msg {
            Message::Blank => self.blank,
            Message::Symbol(z) => self.symbols[z],
        }
    }
}

/// Probability of each message given the conditional law of O1's belief.
///
/// `marginal` lists atoms with weights `P(atom | H=h)`.
pub fn message_likelihood(
    marginal: &[(Belief, [f64; 2])],
    rule: &dyn MessageRule,
    m: usize,
) -> Result<MessageLikelihood> {
    rule.validate(m)?;
    let mut out = MessageLikelihood {
        symbols: vec![[0.0; 2]; m],
        blank: [0.0; 2],
    };
    for &(pi, w) in marginal {
        let slot = match rule.classify(pi) {
            Message::Blank => &mut out.blank,
            Message::Symbol(z) => &mut out.symbols[z],
        };
        slot[0] += w[0];
        slot[1] += w[1];
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub belief: Belief,
    /// `P(atom | H=h)` over all observation histories of this length.
    pub weight: [f64; 2],
    /// Number of observation histories mapping to this atom.
    pub paths: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomLevel {
    pub atoms: Vec<Atom>,
    /// `next[i][y]`: index of the successor atom at the following level.
    pub next: Vec<Vec<Option<usize>>>,
}

/// Reachable beliefs, level `t` holding the atoms after `t` observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSet {
    pub levels: Vec<AtomLevel>,
}

impl AtomSet {
    pub fn level(&self, t: usize) -> &AtomLevel {
        &self.levels[t]
    }

    pub fn beliefs(&self, t: usize) -> Vec<Belief> {
        self.levels[t].atoms.iter().map(|a| a.belief).collect()
    }
}

/// Sorts candidate atoms and merges those within [`ATOM_TOL`].
///
/// Returns the merged atoms and, for every input, its merged index.
pub(crate) fn merge_atoms(cands: &[(Belief, [f64; 2], u64)]) -> (Vec<Atom>, Vec<usize>) {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[a].0.total_cmp(&cands[b].0));
    let mut atoms: Vec<Atom> = Vec::new();
    let mut index = vec![0; cands.len()];
    let mut anchor = f64::NEG_INFINITY;
    for i in order {
        let (b, w, p) = cands[i];
        if atoms.is_empty() || b - anchor > ATOM_TOL {
            anchor = b;
            atoms.push(Atom {
                belief: b,
                weight: w,
                paths: p,
            });
        } else {
            let a = atoms.last_mut().unwrap();
            a.weight[0] += w[0];
            a.weight[1] += w[1];
            a.paths += p;
        }
        index[i] = atoms.len() - 1;
    }
    (atoms, index)
}

/// Enumerates the beliefs reachable from `prior` in up to `horizon` steps.
pub fn reachable_beliefs(prior: Belief, channel: &ObservationChannel, horizon: usize) -> AtomSet {
    let mut levels = vec![AtomLevel {
        atoms: vec![Atom {
            belief: prior,
            weight: [1.0, 1.0],
            paths: 1,
        }],
        next: Vec::new(),
    }];
    for t in 1..=horizon {
        let table = channel.at(t);
        let prev = levels.last().unwrap();
        let mut cands = Vec::new();
        let mut origin = Vec::new();
        for (i, a) in prev.atoms.iter().enumerate() {
            for y in 0..table.alphabet() {
                let (l0, l1) = (table.lik(y, 0), table.lik(y, 1));
                let w = [a.weight[0] * l0, a.weight[1] * l1];
                if w[0] == 0.0 && w[1] == 0.0 {
                    continue;
                }
                let b = bayes(a.belief, l0, l1).unwrap_or(a.belief);
                cands.push((b, w, a.paths));
                origin.push((i, y));
            }
        }
        let (atoms, index) = merge_atoms(&cands);
        let prev = levels.last_mut().unwrap();
        prev.next = vec![vec![None; table.alphabet()]; prev.atoms.len()];
        for (c, &(i, y)) in origin.iter().enumerate() {
            prev.next[i][y] = Some(index[c]);
        }
        levels.push(AtomLevel {
            atoms,
            next: Vec::new(),
        });
    }
    AtomSet { levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{Interval, StageRule};

    fn sym() -> LikelihoodTable {
        LikelihoodTable::symmetric(0.2)
    }

    #[test]
    fn observer1_examples() {
        assert!((update_observer1(0.5, 0, &sym()).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(update_observer1(0.5, 1, &LikelihoodTable::uninformative()).unwrap(), 0.5);
        assert_eq!(update_observer1(1.0, 1, &sym()).unwrap(), 1.0);
    }

    #[test]
    fn impossible_observation() {
        let t = LikelihoodTable::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let e = update_observer1(1.0, 1, &t).unwrap_err();
        assert_eq!(e.to_string(), "impossible observation under current belief");
        let e = update_observer2(0.5, 0, &sym(), [0.0, 0.0]).unwrap_err();
        assert_eq!(e.to_string(), "impossible observation/message pair");
    }

    #[test]
    fn observer2_examples() {
        let u = LikelihoodTable::uninformative();
        assert_eq!(update_observer2(0.5, 0, &u, [1.0, 1.0]).unwrap(), 0.5);
        assert!((update_observer2(0.5, 0, &sym(), [1.0, 1.0]).unwrap() - 0.8).abs() < 1e-15);
        assert!((update_observer2(0.5, 1, &u, [0.6, 0.2]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn reachable_sym() {
        let ch = ObservationChannel::stationary(1, sym());
        let set = reachable_beliefs(0.5, &ch, 2);
        let b1 = set.beliefs(1);
        assert_eq!(b1.len(), 2);
        assert!((b1[0] - 0.2).abs() < 1e-15 && (b1[1] - 0.8).abs() < 1e-15);
        let b2 = set.beliefs(2);
        assert_eq!(b2.len(), 3);
        assert!((b2[0] - 1.0 / 17.0).abs() < 1e-15);
        assert!((b2[1] - 0.5).abs() < 1e-15);
        assert!((b2[2] - 16.0 / 17.0).abs() < 1e-15);
        assert_eq!(set.level(2).atoms[1].paths, 2);
        for lvl in &set.levels {
            for h in 0..2 {
                let s: f64 = lvl.atoms.iter().map(|a| a.weight[h]).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reachable_uninformative() {
        let ch = ObservationChannel::stationary(1, LikelihoodTable::uninformative());
        let set = reachable_beliefs(0.3, &ch, 4);
        for t in 0..=4 {
            assert_eq!(set.beliefs(t), vec![0.3]);
        }
    }

    #[test]
    fn message_likelihood_examples() {
        let set = reachable_beliefs(0.5, &ObservationChannel::stationary(1, sym()), 1);
        let marg: Vec<_> = set.level(1).atoms.iter().map(|a| (a.belief, a.weight)).collect();
        let all_blank = StageRule::all_blank(2);
        let ml = message_likelihood(&marg, &all_blank, 2).unwrap();
        assert_eq!(ml.blank, [1.0, 1.0]);
        let r = StageRule {
            regions: vec![None, Some(Interval { lo: 0.75, hi: 1.0 })],
        };
        let ml = message_likelihood(&marg, &r, 2).unwrap();
        assert!((ml.symbols[1][0] - 0.8).abs() < 1e-15);
        assert!((ml.symbols[1][1] - 0.2).abs() < 1e-15);
        let overlapping = StageRule {
            regions: vec![Some(Interval { lo: 0.3, hi: 1.0 }), Some(Interval { lo: 0.0, hi: 0.6 })],
        };
        assert!(message_likelihood(&marg, &overlapping, 2).is_err());
    }
}
