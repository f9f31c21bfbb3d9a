//! Exact and Monte Carlo evaluation of a policy pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::bayes;
use crate::best_response::evaluate_o2_policy;
use crate::error::{Error, Result};
use crate::model::{LikelihoodTable, ProblemSpec, Variant};
use crate::policy::{message_law, Decision, Message, O1Policy, O2Policy};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub h: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub u: usize,
    pub cost: f64,
}

fn sample(table: &LikelihoodTable, h: usize, rng: &mut impl Rng) -> usize {
    let r: f64 = rng.gen();
    let row = &table.rows[h];
    let mut acc = 0.0;
    for (y, &p) in row.iter().enumerate() {
        acc += p;
        if r < acc {
            return y;
        }
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

fn o1_step<R: Rng>(o1: &O1Policy, spec: &ProblemSpec, h: usize, t: usize, pi1: &mut f64, rng: &mut R) -> Message {
    let tab = spec.channel1.at(t);
    let y = sample(tab, h, rng);
    *pi1 = bayes(*pi1, tab.lik(y, 0), tab.lik(y, 1)).unwrap_or(*pi1);
    o1.act(t, *pi1)
}

/// Plays one episode with the variant's time ordering.
pub fn simulate_once<R: Rng>(o1: &O1Policy, o2: &O2Policy, spec: &ProblemSpec, rng: &mut R) -> EpisodeOutcome {
    let h = if rng.gen::<f64>() < spec.prior.p0 { 0 } else { 1 };
    let mut pi1 = spec.prior.p0;
    let mut q = o2.prior;
    let mut tau1 = 0;
    let (tau2, u);
    let mut msg: Option<(usize, usize)> = None;
    match spec.variant {
        Variant::P1 => {
            for t in 1..=spec.t1 {
                if let Message::Symbol(z) = o1_step(o1, spec, h, t, &mut pi1, rng) {
                    tau1 = t;
                    msg = Some((t, z));
                    break;
                }
            }
            let (k, z) = msg.expect("terminal stage always sends");
            let lik = o2.calibration.final_lik(k, z);
            let mut j = 0;
            loop {
                if let Decision::Declare(d) = o2.post_decide(j, o2.belief(q, lik)) {
                    u = d;
                    tau2 = j;
                    break;
                }
                let tab = spec.channel2.at(j + 1);
                let y = sample(tab, h, rng);
                q = bayes(q, tab.lik(y, 0), tab.lik(y, 1)).unwrap_or(q);
                j += 1;
            }
        }
        Variant::P2 => {
            let mut t = 0;
            loop {
                t += 1;
                if msg.is_none() {
                    if let Message::Symbol(z) = o1_step(o1, spec, h, t, &mut pi1, rng) {
                        tau1 = t;
                        msg = Some((t, z));
                    }
                }
                let tab = spec.channel2.at(t);
                let y = sample(tab, h, rng);
                q = bayes(q, tab.lik(y, 0), tab.lik(y, 1)).unwrap_or(q);
                let d = match msg {
                    Some((k, z)) => o2.post_decide(t, o2.belief(q, o2.calibration.final_lik(k, z))),
                    None => o2.pre_decide(t, o2.belief(q, o2.calibration.blank_lik(t))),
                };
                if let Decision::Declare(d) = d {
                    u = d;
                    tau2 = t;
                    break;
                }
            }
            if msg.is_none() {
                for s in t + 1..=spec.t1 {
                    if let Message::Symbol(_) = o1_step(o1, spec, h, s, &mut pi1, rng) {
                        tau1 = s;
                        break;
                    }
                }
            }
        }
    }
    let c = &spec.costs;
    EpisodeOutcome {
        h,
        tau1,
        tau2,
        u,
        cost: c.c1 * tau1 as f64 + c.c2 * tau2 as f64 + c.jc(u, h),
    }
}

/// Independent stream for episode `index` under `seed`.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    /// `None` when `n = 1`.
    pub stderr: Option<f64>,
    pub n: usize,
    pub seed: u64,
}

fn check_pair(o1: &O1Policy, o2: &O2Policy, spec: &ProblemSpec) -> Result<()> {
    o1.validate()?;
    if o1.m != spec.m || o1.horizon() != spec.t1 {
        return Err(Error::InvalidArgument(format!(
            "O1 policy has M = {} and horizon {}, problem has M = {} and T1 = {}",
            o1.m,
            o1.horizon(),
            spec.m,
            spec.t1
        )));
    }
    if o2.variant != spec.variant {
        return Err(Error::Variant(format!("O2 policy is for {:?}", o2.variant)));
    }
    Ok(())
}

/// Sample mean and standard error over `n` episodes.
pub fn estimate_cost(o1: &O1Policy, o2: &O2Policy, spec: &ProblemSpec, n: usize, seed: u64) -> Result<CostEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    check_pair(o1, o2, spec)?;
    let costs: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_once(o1, o2, spec, &mut episode_rng(seed, i)).cost)
        .collect();
    let mean = costs.iter().sum::<f64>() / n as f64;
    let stderr = (n > 1).then(|| {
        let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    });
    Ok(CostEstimate { mean, stderr, n, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCost {
    pub cost: f64,
    /// Probability mass of all terminated paths; 1 up to rounding.
    pub total_probability: f64,
    pub expected_tau1: [f64; 2],
}

/// Expected total cost summed over every hypothesis and observation path.
pub fn exact_cost(o1: &O1Policy, o2: &O2Policy, spec: &ProblemSpec) -> Result<ExactCost> {
    check_pair(o1, o2, spec)?;
    let law = message_law(o1, spec);
    let mut per_h = [0.0; 2];
    let mut mass = [0.0; 2];
    for k in 1..=spec.t1 {
        for z in 0..spec.m {
            let f = law.last[k - 1][z];
            if f == [0.0, 0.0] {
                continue;
            }
            let a = evaluate_o2_policy(o2, spec, k, z)?;
            for h in 0..2 {
                per_h[h] += f[h] * a[h];
                mass[h] += f[h];
            }
        }
    }
    let p = &spec.prior;
    let c1 = spec.costs.c1;
    let cost = (0..2).map(|h| p.p(h) * (c1 * law.expected_tau[h] + per_h[h])).sum();
    let total_probability = (0..2).map(|h| p.p(h) * mass[h]).sum();
    Ok(ExactCost {
        cost,
        total_probability,
        expected_tau1: law.expected_tau,
    })
}
