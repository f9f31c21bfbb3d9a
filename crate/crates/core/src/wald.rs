//! The centralized Wald problem for O2: finite-horizon tables and the
//! stationary limit.

use serde::{Deserialize, Serialize};

use crate::envelope::{bellman, Envelope, Line};
use crate::error::{Error, Result};
use crate::model::{CostModel, ObservationChannel};
use crate::policy::{threshold_decision, Decision};

pub fn stop_lines(costs: &CostModel) -> [Line; 2] {
    [
        Line::new(costs.j[0][0], costs.j[0][1]),
        Line::new(costs.j[1][0], costs.j[1][1]),
    ]
}

/// Thresholds `(w1, w2)` separating stop-1 / continue / stop-0 given the
/// continuation value. Stopping wins ties; at a stop/stop tie 0 is declared.
pub fn thresholds(costs: &CostModel, cont: &Envelope) -> (f64, f64) {
    let star = costs.crossing();
    let [l0, l1] = stop_lines(costs);
    let w1 = match cont.sublevel(&l1) {
        Some((lo, hi)) if lo <= 0.0 => hi.min(star),
        _ => 0.0f64.min(star),
    };
    let w2 = match cont.sublevel(&l0) {
        Some((lo, hi)) if hi >= 1.0 => lo.max(star),
        _ => 1.0f64.max(star),
    };
    (w1, w2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldSolution {
    pub horizon: usize,
    /// Index `k` = number of observations already taken.
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    /// `values[k]` is `K` with `horizon - k` steps left.
    pub values: Vec<Envelope>,
}

impl WaldSolution {
    pub fn value(&self, k: usize, pi: f64) -> f64 {
        self.values[k.min(self.horizon)].eval(pi)
    }

    pub fn decide(&self, k: usize, pi: f64) -> Decision {
        let k = k.min(self.horizon);
        threshold_decision(self.w1[k], self.w2[k], pi)
    }

    pub fn evaluate_on(&self, k: usize, atoms: &[f64]) -> Vec<f64> {
        atoms.iter().map(|&p| self.value(k, p)).collect()
    }

    /// CSV with header `k,w1,w2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,w1,w2\n");
        for k in 0..=self.horizon {
            s.push_str(&format!("{k},{},{}\n", self.w1[k], self.w2[k]));
        }
        s
    }
}

/// Backward induction for a Wald problem with `horizon` observations left.
///
/// The observation taken after `k` earlier ones uses `channel.at(k + 1)`.
pub fn solve_wald_finite(channel: &ObservationChannel, costs: &CostModel, horizon: usize) -> WaldSolution {
    let stops = stop_lines(costs);
    let star = costs.crossing();
    let mut values = vec![Envelope::from_lines(stops); horizon + 1];
    let mut w1 = vec![star; horizon + 1];
    let mut w2 = vec![star; horizon + 1];
    for k in (0..horizon).rev() {
        let (v, cont) = bellman(&stops, costs.c2, channel.at(k + 1), &values[k + 1]);
        let (a, b) = thresholds(costs, &cont);
        w1[k] = a;
        w2[k] = b;
        values[k] = v;
    }
    WaldSolution {
        horizon,
        w1,
        w2,
        values,
    }
}

/// `K` with `remaining` steps left at belief `pi`.
pub fn wald_cost(sol: &WaldSolution, pi: f64, remaining: usize) -> f64 {
    sol.value(sol.horizon - remaining.min(sol.horizon), pi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfiniteWaldSolution {
    pub w1: f64,
    pub w2: f64,
    pub value: Envelope,
    pub grid: Vec<f64>,
    pub grid_values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change per iteration.
    pub deltas: Vec<f64>,
    /// Largest pointwise increase observed between iterates on the grid.
    pub max_increase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    pub grid_size: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            grid_size: 1001,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

impl IterationOptions {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_size - 1;
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.grid_size < 3 {
            return Err(Error::InvalidArgument("grid_size must be at least 3".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Value iteration for the untruncated Wald problem.
///
/// Iterates are exact envelopes; the grid is used for reporting and for the
/// monotonicity record.
pub fn solve_wald_infinite(
    channel: &ObservationChannel,
    costs: &CostModel,
    opts: IterationOptions,
) -> Result<InfiniteWaldSolution> {
    opts.check()?;
    if !channel.is_stationary() {
        return Err(Error::NonStationary("observer 2 channel varies with time".into()));
    }
    let table = channel.at(1);
    let stops = stop_lines(costs);
    let grid = opts.grid();
    let mut value = Envelope::from_lines(stops);
    let mut on_grid: Vec<f64> = grid.iter().map(|&p| value.eval(p)).collect();
    let mut deltas = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    let mut cont;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (next, c) = bellman(&stops, costs.c2, table, &value);
        let delta = next.sup_distance(&value);
        let next_grid: Vec<f64> = grid.iter().map(|&p| next.eval(p)).collect();
        for (a, b) in next_grid.iter().zip(&on_grid) {
            max_increase = max_increase.max(a - b);
        }
        deltas.push(delta);
        value = next;
        cont = c;
        on_grid = next_grid;
        if delta < opts.tol || iterations >= opts.max_iter {
            break;
        }
    }
    let (w1, w2) = thresholds(costs, &cont);
    Ok(InfiniteWaldSolution {
        w1,
        w2,
        value,
        grid,
        grid_values: on_grid,
        iterations,
        deltas,
        max_increase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LikelihoodTable;

    fn ch(eps: f64) -> ObservationChannel {
        ObservationChannel::stationary(2, LikelihoodTable::symmetric(eps))
    }

    #[test]
    fn horizon_zero() {
        let c = CostModel::zero_one(0.05, 0.05);
        let s = solve_wald_finite(&ch(0.2), &c, 0);
        assert!((wald_cost(&s, 0.3, 0) - 0.3).abs() < 1e-15);
        assert_eq!((s.w1[0], s.w2[0]), (0.5, 0.5));
    }

    #[test]
    fn one_step_sym() {
        let c = CostModel::zero_one(0.05, 0.05);
        let s = solve_wald_finite(&ch(0.2), &c, 1);
        assert!((wald_cost(&s, 0.5, 1) - 0.25).abs() < 1e-15);
        assert_eq!(s.decide(0, 0.5), Decision::Continue);
        assert!((wald_cost(&s, 0.0, 1) - 0.0).abs() < 1e-15);
        assert!((wald_cost(&s, 1.0, 1) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn expensive_sampling_never_continues() {
        let c = CostModel::zero_one(0.05, 1.0);
        let s = solve_wald_finite(&ch(0.1), &c, 4);
        for k in 0..=4 {
            assert_eq!(s.w1[k], 0.5);
            assert_eq!(s.w2[k], 0.5);
        }
    }

    #[test]
    fn infinite_uninformative() {
        let c = CostModel::zero_one(0.05, 0.05);
        let u = ObservationChannel::stationary(2, LikelihoodTable::uninformative());
        let s = solve_wald_infinite(&u, &c, IterationOptions::default()).unwrap();
        assert_eq!((s.w1, s.w2), (0.5, 0.5));
        assert!(s.iterations <= 2);
    }

    #[test]
    fn infinite_rejects_time_varying() {
        let c = CostModel::zero_one(0.05, 0.05);
        let tv = ObservationChannel {
            observer: 2,
            tables: vec![LikelihoodTable::symmetric(0.2), LikelihoodTable::symmetric(0.1)],
        };
        assert!(solve_wald_infinite(&tv, &c, IterationOptions::default()).is_err());
    }

    #[test]
    fn infinite_sym_symmetric_thresholds() {
        let c = CostModel::zero_one(0.05, 0.05);
        let s = solve_wald_infinite(&ch(0.2), &c, IterationOptions::default()).unwrap();
        assert!((s.w1 + s.w2 - 1.0).abs() < 1e-9, "{} {}", s.w1, s.w2);
        assert!(s.w1 < 0.5 && s.w2 > 0.5);
    }
}
