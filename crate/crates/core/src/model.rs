//! Problem definition: prior, observation channels, costs, horizons.
//!
//! A [`ProblemSpec`] is always validated on construction, so every solver can
//! assume normalized likelihood rows and the strict cost ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-12;

/// Which time ordering the observers follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// O2 starts observing only after O1's final message.
    P1,
    /// Both observe from t = 1; O1's message at t precedes O2's decision at t.
    P2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisPrior {
    pub p0: f64,
}

impl HypothesisPrior {
    pub fn new(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::validation("prior", "prior outside [0,1]"));
        }
        Ok(Self { p0 })
    }

    /// Prior probability of hypothesis `h`.
    pub fn p(&self, h: usize) -> f64 {
        if h == 0 {
            self.p0
        } else {
            1.0 - self.p0
        }
    }
}

/// Likelihood rows `P(y | H=0)` and `P(y | H=1)` for one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTable {
    pub rows: [Vec<f64>; 2],
}

impl LikelihoodTable {
    pub fn new(row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        let t = Self { rows: [row0, row1] };
        t.check("table")?;
        Ok(t)
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn symmetric(eps: f64) -> Self {
        Self {
            rows: [vec![1.0 - eps, eps], vec![eps, 1.0 - eps]],
        }
    }

    /// Two-symbol channel whose rows coincide.
    pub fn uninformative() -> Self {
        Self {
            rows: [vec![0.5, 0.5], vec![0.5, 0.5]],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.rows[0].len()
    }

    #[inline]
    pub fn lik(&self, y: usize, h: usize) -> f64 {
        self.rows[h][y]
    }

    fn check(&self, path: &str) -> Result<()> {
        if self.rows[0].is_empty() {
            return Err(Error::validation(path, "empty alphabet"));
        }
        if self.rows[0].len() != self.rows[1].len() {
            return Err(Error::validation(path, "alphabet differs between hypothesis rows"));
        }
        for (h, row) in self.rows.iter().enumerate() {
            let rp = format!("{path}[{h}]");
            if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::validation(rp, "negative or non-finite probability"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::validation(rp, format!("row not normalized (sum {s})")));
            }
        }
        Ok(())
    }
}

/// Per-time likelihood tables for one observer.
///
/// A single table stands for a stationary channel of unbounded length;
/// otherwise table `k - 1` governs the observation taken at time `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationChannel {
    pub observer: u8,
    pub tables: Vec<LikelihoodTable>,
}

impl ObservationChannel {
    pub fn stationary(observer: u8, table: LikelihoodTable) -> Self {
        Self {
            observer,
            tables: vec![table],
        }
    }

    /// Table for the observation taken at time `t >= 1`.
    pub fn at(&self, t: usize) -> &LikelihoodTable {
        let i = t.max(1) - 1;
        &self.tables[i.min(self.tables.len() - 1)]
    }

    pub fn is_stationary(&self) -> bool {
        self.tables.windows(2).all(|w| w[0] == w[1])
    }

    /// Number of explicitly listed steps, `None` for the replicated shorthand.
    pub fn horizon(&self) -> Option<usize> {
        (self.tables.len() > 1).then_some(self.tables.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c1: f64,
    pub c2: f64,
    /// Terminal cost `j[u][h]`.
    pub j: [[f64; 2]; 2],
    pub l: f64,
}

impl CostModel {
    /// Builds a cost model; `l` defaults to the largest terminal cost.
    pub fn new(c1: f64, c2: f64, j: [[f64; 2]; 2], l: Option<f64>) -> Result<Self> {
        let jmax = j.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let c = Self {
            c1,
            c2,
            j,
            l: l.unwrap_or(jmax),
        };
        c.check()?;
        Ok(c)
    }

    pub fn zero_one(c1: f64, c2: f64) -> Self {
        Self {
            c1,
            c2,
            j: [[0.0, 1.0], [1.0, 0.0]],
            l: 1.0,
        }
    }

    #[inline]
    pub fn jc(&self, u: usize, h: usize) -> f64 {
        self.j[u][h]
    }

    /// Belief at which both declarations cost the same.
    pub fn crossing(&self) -> f64 {
        let d1 = self.j[0][1] - self.j[1][1];
        let d0 = self.j[1][0] - self.j[0][0];
        d1 / (d1 + d0)
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [("costs.c1", self.c1), ("costs.c2", self.c2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, "must be finite and positive"));
            }
        }
        for u in 0..2 {
            for h in 0..2 {
                let v = self.j[u][h];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation(format!("costs.J[{u}][{h}]"), "must be finite and >= 0"));
                }
                if v > self.l {
                    return Err(Error::validation("costs.L", "L must dominate every J entry"));
                }
            }
        }
        if !self.l.is_finite() {
            return Err(Error::validation("costs.L", "must be finite"));
        }
        if !(self.j[0][1] > self.j[1][1] && self.j[1][0] > self.j[0][0]) {
            return Err(Error::validation("costs.J", "cost ordering violated"));
        }
        Ok(())
    }
}

/// Expected terminal cost of declaring `u` at belief `pi = P(H=0)`.
#[inline]
pub fn terminal_cost(u: usize, pi: f64, costs: &CostModel) -> f64 {
    costs.j[u][0] * pi + costs.j[u][1] * (1.0 - pi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub prior: HypothesisPrior,
    pub channel1: ObservationChannel,
    pub channel2: ObservationChannel,
    pub costs: CostModel,
    pub t1: usize,
    pub t2: usize,
    pub variant: Variant,
    pub m: usize,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p0: f64,
        channel1: ObservationChannel,
        channel2: ObservationChannel,
        costs: CostModel,
        t1: usize,
        t2: usize,
        variant: Variant,
        m: usize,
    ) -> Result<Self> {
        let s = Self {
            prior: HypothesisPrior::new(p0)?,
            channel1,
            channel2,
            costs,
            t1,
            t2,
            variant,
            m,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        HypothesisPrior::new(self.prior.p0)?;
        self.costs.check()?;
        for (i, ch) in [&self.channel1, &self.channel2].into_iter().enumerate() {
            if ch.tables.is_empty() {
                return Err(Error::validation(format!("channels[{i}].tables"), "no tables"));
            }
            for (k, t) in ch.tables.iter().enumerate() {
                t.check(&format!("channels[{i}].tables[{k}]"))?;
            }
        }
        if self.t1 < 1 {
            return Err(Error::validation("horizons.T1", "must be at least 1"));
        }
        if self.variant == Variant::P2 && self.t2 < self.t1 {
            return Err(Error::validation("horizons.T2", "variant P2 requires T2 >= T1"));
        }
        if let Some(h) = self.channel1.horizon() {
            if h < self.t1 {
                return Err(Error::validation("channels[0].tables", "fewer tables than T1"));
            }
        }
        if let Some(h) = self.channel2.horizon() {
            if h < self.t2 {
                return Err(Error::validation("channels[1].tables", "fewer tables than T2"));
            }
        }
        if self.m < 2 {
            return Err(Error::validation("M", "message alphabet needs at least 2 symbols"));
        }
        Ok(())
    }

    pub fn with_horizons(&self, t1: usize, t2: usize) -> Result<Self> {
        let mut s = self.clone();
        s.t1 = t1;
        s.t2 = t2;
        s.validate()?;
        Ok(s)
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        let mut s = self.clone();
        s.variant = variant;
        s.validate()?;
        Ok(s)
    }

    /// The same problem with the hypothesis labels exchanged.
    pub fn mirrored(&self) -> Self {
        let flip = |ch: &ObservationChannel| ObservationChannel {
            observer: ch.observer,
            tables: ch
                .tables
                .iter()
                .map(|t| LikelihoodTable {
                    rows: [t.rows[1].clone(), t.rows[0].clone()],
                })
                .collect(),
        };
        let j = self.costs.j;
        let mut s = self.clone();
        s.prior.p0 = 1.0 - self.prior.p0;
        s.channel1 = flip(&self.channel1);
        s.channel2 = flip(&self.channel2);
        s.costs.j = [[j[1][1], j[1][0]], [j[0][1], j[0][0]]];
        s
    }

    pub fn is_stationary(&self) -> bool {
        self.channel1.is_stationary() && self.channel2.is_stationary()
    }

    pub fn to_file(&self) -> SpecFile {
        let ch = |c: &ObservationChannel| ChannelFile {
            observer: c.observer,
            tables: c.tables.iter().map(|t| t.rows.clone()).collect(),
        };
        SpecFile {
            prior: self.prior.p0,
            channels: vec![ch(&self.channel1), ch(&self.channel2)],
            costs: CostFile {
                c1: self.costs.c1,
                c2: self.costs.c2,
                j: self.costs.j,
                l: Some(self.costs.l),
            },
            horizons: HorizonFile {
                t1: self.t1,
                t2: self.t2,
            },
            variant: self.variant,
            m: self.m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serializes")
    }
}

/// On-disk problem description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub prior: f64,
    pub channels: Vec<ChannelFile>,
    pub costs: CostFile,
    pub horizons: HorizonFile,
    pub variant: Variant,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
}

fn default_m() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub observer: u8,
    pub tables: Vec<[Vec<f64>; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFile {
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "J")]
    pub j: [[f64; 2]; 2],
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonFile {
    #[serde(rename = "T1")]
    pub t1: usize,
    #[serde(rename = "T2")]
    pub t2: usize,
}

impl SpecFile {
    pub fn resolve(self) -> Result<ProblemSpec> {
        let mut ch: [Option<ObservationChannel>; 2] = [None, None];
        for (i, c) in self.channels.into_iter().enumerate() {
            let slot = match c.observer {
                1 => 0,
                2 => 1,
                _ => return Err(Error::validation(format!("channels[{i}].observer"), "observer must be 1 or 2")),
            };
            if ch[slot].is_some() {
                return Err(Error::validation(format!("channels[{i}].observer"), "duplicate observer"));
            }
            let tables = c
                .tables
                .into_iter()
                .enumerate()
                .map(|(k, [r0, r1])| {
                    let t = LikelihoodTable { rows: [r0, r1] };
                    t.check(&format!("channels[{i}].tables[{k}]")).map(|_| t)
                })
                .collect::<Result<Vec<_>>>()?;
            ch[slot] = Some(ObservationChannel {
                observer: c.observer,
                tables,
            });
        }
        let [c1, c2] = ch;
        let channel1 = c1.ok_or_else(|| Error::validation("channels", "missing observer 1"))?;
        let channel2 = c2.ok_or_else(|| Error::validation("channels", "missing observer 2"))?;
        let costs = CostModel::new(self.costs.c1, self.costs.c2, self.costs.j, self.costs.l)?;
        ProblemSpec::new(
            self.prior,
            channel1,
            channel2,
            costs,
            self.horizons.t1,
            self.horizons.t2,
            self.variant,
            self.m,
        )
    }
}

/// Parses and validates a JSON problem description.
pub fn load_problem_spec(text: &str) -> Result<ProblemSpec> {
    let file: SpecFile = serde_json::from_str(text)?;
    file.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym_json(j: &str, row: &str) -> String {
        format!(
            r#"{{"prior":0.5,
                "channels":[{{"observer":1,"tables":[[{row},[0.2,0.8]]]}},
                            {{"observer":2,"tables":[[[0.8,0.2],[0.2,0.8]]]}}],
                "costs":{{"c1":0.05,"c2":0.05,"J":{j}}},
                "horizons":{{"T1":2,"T2":2}},"variant":"P1","M":2}}"#
        )
    }

    #[test]
    fn loads_and_round_trips() {
        let s = load_problem_spec(&sym_json("[[0,1],[1,0]]", "[0.8,0.2]")).unwrap();
        assert_eq!(s.costs.l, 1.0);
        assert_eq!(s.channel1.at(5).lik(0, 0), 0.8);
        let back = load_problem_spec(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_cost_ordering() {
        let e = load_problem_spec(&sym_json("[[0,0],[1,0]]", "[0.8,0.2]")).unwrap_err();
        assert!(e.to_string().contains("cost ordering violated"), "{e}");
    }

    #[test]
    fn rejects_unnormalized_row_with_path() {
        let e = load_problem_spec(&sym_json("[[0,1],[1,0]]", "[0.7,0.2]")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("row not normalized"), "{msg}");
        assert!(msg.starts_with("channels[0].tables[0][0]"), "{msg}");
    }

    #[test]
    fn terminal_cost_examples() {
        let c = CostModel::zero_one(0.1, 0.1);
        assert!((terminal_cost(0, 0.3, &c) - 0.7).abs() < 1e-15);
        let c = CostModel::new(0.1, 0.1, [[0.2, 3.0], [2.0, 0.5]], None).unwrap();
        assert_eq!(terminal_cost(1, 0.0, &c), 0.5);
        assert_eq!(terminal_cost(0, 1.0, &c), 0.2);
        assert_eq!(c.l, 3.0);
    }

    #[test]
    fn l_must_dominate() {
        assert!(CostModel::new(0.1, 0.1, [[0.0, 2.0], [1.0, 0.0]], Some(1.5)).is_err());
    }
}
