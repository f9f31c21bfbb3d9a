//! Piecewise-linear concave functions on [0,1] as lower envelopes of lines.
//!
//! A line `(a0, a1)` has value `a0 * pi + a1 * (1 - pi)`: `a0` is the
//! expected cost under H=0 and `a1` under H=1. Bayes updates act on lines by
//! scaling the coefficients, so stopping-problem Bellman operators map
//! envelopes to envelopes exactly.

use serde::{Deserialize, Serialize};

use crate::model::LikelihoodTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub a0: f64,
    pub a1: f64,
}

impl Line {
    pub const fn new(a0: f64, a1: f64) -> Self {
        Self { a0, a1 }
    }

    #[inline]
    pub fn eval(&self, pi: f64) -> f64 {
        self.a0 * pi + self.a1 * (1.0 - pi)
    }

    #[inline]
    fn slope(&self) -> f64 {
        self.a0 - self.a1
    }

    pub fn shift(&self, c: f64) -> Self {
        Self::new(self.a0 + c, self.a1 + c)
    }

    pub fn scale(&self, l0: f64, l1: f64) -> Self {
        Self::new(self.a0 * l0, self.a1 * l1)
    }
}

/// Lower envelope restricted to [0,1]; line `i` is active on `[breaks[i], breaks[i+1]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    lines: Vec<Line>,
    breaks: Vec<f64>,
}

const MIN_WIDTH: f64 = 1e-14;

impl Envelope {
    pub fn from_lines<I: IntoIterator<Item = Line>>(lines: I) -> Self {
        let mut ls: Vec<Line> = lines.into_iter().collect();
        assert!(!ls.is_empty(), "envelope needs at least one line");
        // decreasing slope, then increasing intercept
        ls.sort_by(|p, q| q.slope().total_cmp(&p.slope()).then(p.a1.total_cmp(&q.a1)));
        let mut hull: Vec<Line> = Vec::with_capacity(ls.len());
        for l in ls {
            if let Some(last) = hull.last() {
                if last.slope() == l.slope() {
                    continue;
                }
            }
            while hull.len() >= 2 {
                let l1 = hull[hull.len() - 2];
                let l2 = hull[hull.len() - 1];
                // l2 is useless if l meets l1 no later than l2 does
                let lhs = (l.a1 - l1.a1) * (l1.slope() - l2.slope());
                let rhs = (l2.a1 - l1.a1) * (l1.slope() - l.slope());
                if lhs <= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(l);
        }
        let cross = |p: &Line, q: &Line| (q.a1 - p.a1) / (p.slope() - q.slope());
        let mut lines = Vec::with_capacity(hull.len());
        let mut breaks = vec![0.0];
        for i in 0..hull.len() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { cross(&hull[i - 1], &hull[i]) };
            let hi = if i + 1 == hull.len() { f64::INFINITY } else { cross(&hull[i], &hull[i + 1]) };
            let (lo, hi) = (lo.max(0.0), hi.min(1.0));
            if hi - lo > MIN_WIDTH || (lines.is_empty() && i + 1 == hull.len()) {
                if !lines.is_empty() {
                    breaks.push(lo);
                }
                lines.push(hull[i]);
            }
        }
        if lines.is_empty() {
            // every piece narrower than MIN_WIDTH: keep the minimizer at 1/2
            let best = *hull
                .iter()
                .min_by(|p, q| p.eval(0.5).total_cmp(&q.eval(0.5)))
                .unwrap();
            lines.push(best);
        }
        breaks.push(1.0);
        Self { lines, breaks }
    }

    pub fn constant(v: f64) -> Self {
        Self::from_lines([Line::new(v, v)])
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    fn segment(&self, pi: f64) -> usize {
        let inner = &self.breaks[1..self.breaks.len() - 1];
        inner.partition_point(|&b| b < pi)
    }

    pub fn eval(&self, pi: f64) -> f64 {
        let i = self.segment(pi);
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.lines.len() - 1);
        (lo..=hi).map(|k| self.lines[k].eval(pi)).fold(f64::INFINITY, f64::min)
    }

    pub fn active(&self, pi: f64) -> Line {
        self.lines[self.segment(pi)]
    }

    pub fn shift(&self, c: f64) -> Self {
        Self {
            lines: self.lines.iter().map(|l| l.shift(c)).collect(),
            breaks: self.breaks.clone(),
        }
    }

    /// Pointwise sum.
    pub fn sum(parts: &[Envelope]) -> Self {
        if parts.is_empty() {
            return Self::constant(0.0);
        }
        let mut pts: Vec<f64> = parts.iter().flat_map(|e| e.breaks.iter().copied()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut pieces = Vec::with_capacity(pts.len());
        for w in pts.windows(2) {
            if w[1] - w[0] <= 0.0 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let mut acc = Line::new(0.0, 0.0);
            for e in parts {
                let l = e.active(mid);
                acc.a0 += l.a0;
                acc.a1 += l.a1;
            }
            pieces.push(acc);
        }
        if pieces.is_empty() {
            let mut acc = Line::new(0.0, 0.0);
            for e in parts {
                let l = e.active(0.5);
                acc.a0 += l.a0;
                acc.a1 += l.a1;
            }
            pieces.push(acc);
        }
        Self::from_lines(pieces)
    }

    /// `pi -> min_i (l0 a0_i pi + l1 a1_i (1 - pi))`, i.e. `P(e | pi) * V(Bayes(pi, e))`.
    pub fn transformed(&self, l0: f64, l1: f64) -> Self {
        Self::from_lines(self.lines.iter().map(|l| l.scale(l0, l1)))
    }

    /// Largest absolute difference over [0,1].
    pub fn sup_distance(&self, other: &Envelope) -> f64 {
        let mut pts: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.iter()
            .map(|&p| (self.eval(p) - other.eval(p)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest amount by which `self` exceeds `other` over [0,1].
    pub fn max_excess(&self, other: &Envelope) -> f64 {
        let mut pts: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.iter()
            .map(|&p| self.eval(p) - other.eval(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `{pi in [0,1] : line(pi) <= self(pi)}` as a closed interval.
    pub fn sublevel(&self, line: &Line) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, seg) in self.lines.iter().enumerate() {
            let (x0, x1) = (self.breaks[i], self.breaks[i + 1]);
            let g0 = line.eval(x0) - seg.eval(x0);
            let g1 = line.eval(x1) - seg.eval(x1);
            let mut take = |x: f64| {
                lo = lo.min(x);
                hi = hi.max(x);
            };
            if g0 <= 0.0 {
                take(x0);
            }
            if g1 <= 0.0 {
                take(x1);
            }
            if (g0 <= 0.0) != (g1 <= 0.0) {
                take(x0 + (x1 - x0) * g0 / (g0 - g1));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Expected next-step value `sum_e P(e | pi) V_e(Bayes(pi, e))`.
///
/// Each term is `(P(e | H=0), P(e | H=1), V_e)`; terms with both likelihoods
/// zero are skipped.
pub fn expectation(terms: &[(f64, f64, &Envelope)]) -> Envelope {
    let parts: Vec<Envelope> = terms
        .iter()
        .filter(|(l0, l1, _)| *l0 > 0.0 || *l1 > 0.0)
        .map(|(l0, l1, e)| e.transformed(*l0, *l1))
        .collect();
    Envelope::sum(&parts)
}

/// One stopping-problem Bellman step: `min(stops, c + E[next])`.
///
/// Returns the new value and the continuation envelope.
pub fn bellman(stops: &[Line], c: f64, table: &LikelihoodTable, next: &Envelope) -> (Envelope, Envelope) {
    let terms: Vec<_> = (0..table.alphabet())
        .map(|y| (table.lik(y, 0), table.lik(y, 1), next))
        .collect();
    let cont = expectation(&terms).shift(c);
    let value = Envelope::from_lines(stops.iter().copied().chain(cont.lines().iter().copied()));
    (value, cont)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lines: &[Line], pi: f64) -> f64 {
        lines.iter().map(|l| l.eval(pi)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn envelope_matches_min() {
        let ls = vec![
            Line::new(0.0, 1.0),
            Line::new(1.0, 0.0),
            Line::new(0.3, 0.3),
            Line::new(0.5, 0.5),
            Line::new(2.0, -1.0),
            Line::new(0.3, 0.3),
        ];
        let e = Envelope::from_lines(ls.clone());
        assert_eq!(e.lines().len(), 3);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            assert!((e.eval(p) - brute(&ls, p)).abs() < 1e-15);
        }
    }

    #[test]
    fn sum_and_transform() {
        let a = Envelope::from_lines([Line::new(0.0, 1.0), Line::new(1.0, 0.0)]);
        let b = Envelope::from_lines([Line::new(0.2, 0.7), Line::new(0.6, 0.1)]);
        let s = Envelope::sum(&[a.clone(), b.clone()]);
        for i in 0..=200 {
            let p = i as f64 / 200.0;
            assert!((s.eval(p) - a.eval(p) - b.eval(p)).abs() < 1e-14);
            let t = a.transformed(0.8, 0.2);
            let d = 0.8 * p + 0.2 * (1.0 - p);
            assert!((t.eval(p) - d * a.eval(0.8 * p / d)).abs() < 1e-14);
        }
    }

    #[test]
    fn sublevel_interval() {
        let e = Envelope::from_lines([Line::new(0.4, 0.4)]);
        let (lo, hi) = e.sublevel(&Line::new(1.0, 0.0)).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.4).abs() < 1e-15);
        assert!(e.sublevel(&Line::new(1.0, 1.0)).is_none());
    }
}
