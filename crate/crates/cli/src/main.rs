use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use decseq::best_response::{extract_o2_thresholds, extract_terminal, extract_thresholds, o1_best_response, o2_best_response};
use decseq::belief::reachable_beliefs;
use decseq::infinite_horizon::{
    epsilon_optimal_pair, reference_pair, value_iterate_o1, value_iterate_o2, EpsilonOptions,
};
use decseq::model::{load_problem_spec, ProblemSpec, Variant};
use decseq::oracle::{enumerate_policies_p1, enumerate_policies_p2, enumerate_stopping_rules, DEFAULT_CAP};
use decseq::policy::{O1Policy, O2Policy, PolicyPair, PostRule};
use decseq::seq_decomp::{solve, DesignerSolution};
use decseq::simulate::{estimate_cost, exact_cost};
use decseq::wald::{solve_wald_finite, wald_cost, IterationOptions};
use decseq::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_UNREADABLE: u8 = 4;
const EXIT_CAP: u8 = 5;
const EXIT_USAGE: u8 = 64;

const MATCH_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "decseq", version, about = "Two-observer sequential detection solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-horizon Wald tables for observer 2.
    SolveWald {
        #[command(flatten)]
        io: Io,
        /// Number of observations allowed; defaults to T2.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Best response of one observer to the other's fixed policy.
    BestResponse {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        policies: PathBuf,
        #[arg(long, value_enum)]
        role: RoleArg,
    },
    /// Global optimum of the P1 problem.
    SolveP1 {
        #[command(flatten)]
        io: Io,
    },
    /// Global optimum of the P2 problem.
    SolveP2 {
        #[command(flatten)]
        io: Io,
    },
    /// Value-iteration limits and an epsilon-optimal finite pair.
    SolveInfinite {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        iter: IterArgs,
        #[arg(long, default_value_t = 8)]
        window: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 4)]
        max_horizon: usize,
    },
    /// Monte Carlo estimate of a policy pair's cost.
    Simulate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        policies: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Runs the designer and the brute-force oracle and compares costs.
    OracleCheck {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: f64,
    },
    /// Designer solution with an M-ary message alphabet.
    Mary {
        #[command(flatten)]
        io: Io,
        /// Alphabet size.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: f64,
    },
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    spec: PathBuf,
    /// Directory for report files; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone, Copy)]
struct IterArgs {
    #[arg(long, default_value_t = 1001)]
    grid_size: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

impl IterArgs {
    fn options(&self) -> IterationOptions {
        IterationOptions {
            grid_size: self.grid_size,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RoleArg {
    O1,
    O2,
}

#[derive(Debug)]
enum Failure {
    Unreadable(String),
    Solver(Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Unreadable(_) => EXIT_UNREADABLE,
            Failure::Mismatch(_) => EXIT_MISMATCH,
            Failure::Solver(Error::CapExceeded { .. }) => EXIT_CAP,
            Failure::Solver(Error::EpsilonUnattainable { .. }) => EXIT_MISMATCH,
            Failure::Solver(_) => EXIT_VALIDATION,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Unreadable(s) | Failure::Mismatch(s) => f.write_str(s),
            Failure::Solver(e) => write!(f, "{e}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct RunReport {
    command: String,
    instance_digest: String,
    config: Value,
    outputs: Value,
    wall_time_s: f64,
}

struct Run {
    command: &'static str,
    spec: ProblemSpec,
    digest: String,
    out: Option<PathBuf>,
    started: Instant,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Unreadable(format!("{}: {e}", path.display())))
}

impl Run {
    fn open(command: &'static str, io: &Io) -> Outcome<Self> {
        let text = read(&io.spec)?;
        let spec = load_problem_spec(&text)?;
        Ok(Self {
            command,
            digest: sha256_hex(spec.to_json().as_bytes()),
            spec,
            out: io.out.clone(),
            started: Instant::now(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Outcome<()> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir).map_err(|e| Failure::Unreadable(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Failure::Unreadable(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    fn finish(&self, options: Value, outputs: Value) -> Outcome<()> {
        let spec: Value = serde_json::from_str(&self.spec.to_json()).expect("spec json");
        let report = RunReport {
            command: self.command.into(),
            instance_digest: self.digest.clone(),
            config: json!({ "spec": spec, "options": options }),
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&report).expect("report json");
        if self.out.is_some() {
            self.write("report.json", &text)?;
        } else {
            println!("{text}");
        }
        Ok(())
    }
}

fn load_pair(path: &Path) -> Outcome<PolicyPair> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Solver(Error::Schema(e)))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Threshold table with columns `policy,t,symbol,lo,hi`.
fn thresholds_csv(o1: &O1Policy, o2: &O2Policy) -> String {
    let mut s = String::from("policy,t,symbol,lo,hi\n");
    for (i, st) in o1.stages.iter().enumerate() {
        for (z, r) in st.regions.iter().enumerate() {
            let _ = writeln!(s, "o1,{},{z},{},{}", i + 1, fmt_opt(r.map(|r| r.lo)), fmt_opt(r.map(|r| r.hi)));
        }
    }
    for (i, c) in o1.terminal.cuts.iter().enumerate() {
        let _ = writeln!(s, "o1_terminal,{},{i},{c},", o1.horizon());
    }
    for (i, r) in o2.pre.iter().enumerate() {
        let _ = writeln!(s, "o2_pre,{},,{},{}", i + 1, r.alpha, r.beta);
    }
    match &o2.post {
        PostRule::Wald { w1, w2 } => {
            for (k, (a, b)) in w1.iter().zip(w2).enumerate() {
                let _ = writeln!(s, "o2_post,{k},,{a},{b}");
            }
        }
        PostRule::Stationary { w1, w2 } => {
            let _ = writeln!(s, "o2_post,,,{w1},{w2}");
        }
    }
    s
}

fn pair_json(o1: &O1Policy, o2: &O2Policy) -> String {
    serde_json::to_string_pretty(&PolicyPair {
        o1: o1.clone(),
        o2: o2.clone(),
    })
    .expect("policy json")
}

/// Re-extracts thresholds from the policy's labels over reachable atoms.
fn check_structure(spec: &ProblemSpec, sol: &DesignerSolution) -> Outcome<usize> {
    let set = reachable_beliefs(spec.prior.p0, &spec.channel1, spec.t1);
    let mut most = 0;
    for t in 1..=spec.t1 {
        let atoms = set.beliefs(t);
        let labels: Vec<_> = atoms.iter().map(|&p| sol.o1.act(t, p)).collect();
        if t < spec.t1 {
            let rule = extract_thresholds(&atoms, &labels, spec.m)?;
            let n = rule.regions.iter().flatten().count() * 2;
            most = most.max(n);
        } else {
            extract_terminal(&atoms, &labels, spec.m)?;
        }
    }
    for r in &sol.o2.pre {
        let labels: Vec<_> = [r.alpha, r.beta].iter().map(|&p| r.decide(p)).collect();
        extract_o2_thresholds(&[r.alpha, r.beta], &labels)?;
    }
    Ok(most)
}

fn designer(run: &Run, expect: Option<Variant>) -> Outcome<()> {
    let spec = &run.spec;
    if let Some(v) = expect {
        if spec.variant != v {
            return Err(Error::Variant(format!("spec has variant {:?}", spec.variant)).into());
        }
    }
    let sol = solve(spec)?;
    let exact = exact_cost(&sol.o1, &sol.o2, spec)?;
    let thresholds = check_structure(spec, &sol)?;
    run.write("policies.json", &pair_json(&sol.o1, &sol.o2))?;
    run.write("thresholds.csv", &thresholds_csv(&sol.o1, &sol.o2))?;
    let diff = (sol.cost - exact.cost).abs();
    run.finish(
        json!({}),
        json!({
            "cost": sol.cost,
            "exact_cost": exact.cost,
            "max_o1_thresholds": thresholds,
            "o1": sol.o1,
            "o2": sol.o2,
            "stats": sol.stats,
        }),
    )?;
    if diff > MATCH_TOL {
        return Err(Failure::Mismatch(format!("solver cost and exact cost differ by {diff:e}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::SolveWald { io, horizon } => {
            let run = Run::open("solve-wald", &io)?;
            let spec = &run.spec;
            let t = horizon.unwrap_or(spec.t2);
            let sol = solve_wald_finite(&spec.channel2, &spec.costs, t);
            run.write("thresholds.csv", &sol.to_csv())?;
            run.finish(
                json!({ "horizon": t }),
                json!({
                    "cost_at_prior": wald_cost(&sol, spec.prior.p0, t),
                    "w1": sol.w1,
                    "w2": sol.w2,
                }),
            )
        }
        Command::BestResponse { io, policies, role } => {
            let run = Run::open("best-response", &io)?;
            let spec = &run.spec;
            let pair = load_pair(&policies)?;
            let before = exact_cost(&pair.o1, &pair.o2, spec)?.cost;
            let (o1, o2) = match role {
                RoleArg::O1 => (o1_best_response(&pair.o2, spec)?.policy, pair.o2),
                RoleArg::O2 => {
                    let o2 = o2_best_response(&pair.o1, spec)?.policy;
                    (pair.o1, o2)
                }
            };
            let after = exact_cost(&o1, &o2, spec)?.cost;
            run.write("policies.json", &pair_json(&o1, &o2))?;
            run.write("thresholds.csv", &thresholds_csv(&o1, &o2))?;
            run.finish(
                json!({ "role": role, "policies": policies }),
                json!({ "cost_before": before, "cost": after, "o1": o1, "o2": o2 }),
            )
        }
        Command::SolveP1 { io } => designer(&Run::open("solve-p1", &io)?, Some(Variant::P1)),
        Command::SolveP2 { io } => designer(&Run::open("solve-p2", &io)?, Some(Variant::P2)),
        Command::SolveInfinite {
            io,
            iter,
            window,
            epsilon,
            max_horizon,
        } => {
            let run = Run::open("solve-infinite", &io)?;
            let spec = &run.spec;
            let opts = iter.options();
            let reference = reference_pair(spec, opts)?;
            let o2_limit = value_iterate_o2(&reference.o1, spec, opts, window)?;
            let o1_limit = match spec.variant {
                Variant::P1 => {
                    let one = spec.with_horizons(1, spec.t2)?;
                    let o2 = decseq::best_response::default_o2(&one);
                    Some(value_iterate_o1(&o2, &one, opts)?)
                }
                Variant::P2 => None,
            };
            let pair = match epsilon {
                Some(eps) => Some(epsilon_optimal_pair(
                    spec,
                    eps,
                    EpsilonOptions {
                        max_horizon,
                        iteration: opts,
                    },
                )?),
                None => None,
            };
            let mut csv = String::from("pi,o2_post,o1\n");
            for (i, p) in o2_limit.post.grid.iter().enumerate() {
                let o1v = o1_limit.as_ref().map(|l| l.grid_values[i]);
                let _ = writeln!(csv, "{p},{},{}", o2_limit.post.grid_values[i], fmt_opt(o1v));
            }
            run.write("values.csv", &csv)?;
            run.finish(
                json!({ "iteration": iter, "window": window, "epsilon": epsilon, "max_horizon": max_horizon }),
                json!({
                    "wald": { "w1": o2_limit.post.w1, "w2": o2_limit.post.w2, "iterations": o2_limit.post.iterations },
                    "o2_blank_classes": o2_limit.classes.iter().map(|c| json!({"t": c.t, "alpha": c.alpha, "beta": c.beta})).collect::<Vec<_>>(),
                    "o2_horizon": o2_limit.horizon,
                    "o2_max_increase": o2_limit.max_increase,
                    "o1": o1_limit.as_ref().map(|l| json!({
                        "rule": l.rule,
                        "iterations": l.iterations,
                        "max_increase": l.max_increase,
                        "blank_runs": l.blank_runs(),
                    })),
                    "reference": reference,
                    "epsilon_pair": pair.as_ref().map(|p| json!({
                        "horizon": p.horizon,
                        "cost": p.solution.cost,
                        "epsilon": p.epsilon,
                        "certificates": p.certificates,
                        "o1": p.solution.o1,
                        "o2": p.solution.o2,
                    })),
                }),
            )
        }
        Command::Simulate { io, policies, n, seed } => {
            let run = Run::open("simulate", &io)?;
            let spec = &run.spec;
            let text = read(&policies)?;
            let pair: PolicyPair = serde_json::from_str(&text).map_err(Error::from)?;
            pair.o1.validate()?;
            let est = estimate_cost(&pair.o1, &pair.o2, spec, n, seed)?;
            let exact = exact_cost(&pair.o1, &pair.o2, spec)?.cost;
            let policy_id = &sha256_hex(text.as_bytes())[..16];
            let csv = format!(
                "instance,policy_id,mean,stderr,n,seed\n{},{policy_id},{},{},{},{}\n",
                &run.digest[..16],
                est.mean,
                fmt_opt(est.stderr),
                est.n,
                est.seed
            );
            if run.out.is_some() {
                run.write("simulate.csv", &csv)?;
            }
            print!("{csv}");
            if run.out.is_some() {
                run.finish(
                    json!({ "policies": policies, "n": n, "seed": seed }),
                    json!({ "mean": est.mean, "stderr": est.stderr, "exact_cost": exact }),
                )?;
            }
            Ok(())
        }
        Command::OracleCheck { io, cap } => {
            let run = Run::open("oracle-check", &io)?;
            let spec = &run.spec;
            let sol = solve(spec)?;
            let oracle = match spec.variant {
                Variant::P1 => enumerate_policies_p1(spec, cap)?,
                Variant::P2 => enumerate_policies_p2(spec, cap)?,
            };
            let wald = solve_wald_finite(&spec.channel2, &spec.costs, spec.t2);
            let wald_cost_prior = wald_cost(&wald, spec.prior.p0, spec.t2);
            let (wald_oracle, rules) = enumerate_stopping_rules(&spec.channel2, &spec.costs, spec.t2, spec.prior.p0)?;
            let d_team = (sol.cost - oracle.cost).abs();
            let d_wald = (wald_cost_prior - wald_oracle).abs();
            run.finish(
                json!({ "cap": cap }),
                json!({
                    "designer_cost": sol.cost,
                    "oracle_cost": oracle.cost,
                    "difference": d_team,
                    "o1_maps": oracle.o1_policies,
                    "evaluations": oracle.evaluations,
                    "wald_cost": wald_cost_prior,
                    "wald_oracle_cost": wald_oracle,
                    "wald_difference": d_wald,
                    "stopping_rules": rules,
                }),
            )?;
            if d_team > MATCH_TOL || d_wald > MATCH_TOL {
                return Err(Failure::Mismatch(format!(
                    "designer/oracle differ by {d_team:e}, Wald/oracle by {d_wald:e}"
                )));
            }
            Ok(())
        }
        Command::Mary { io, m, cap } => {
            let mut run = Run::open("mary", &io)?;
            run.spec.m = m;
            run.spec.validate()?;
            run.digest = sha256_hex(run.spec.to_json().as_bytes());
            let spec = &run.spec;
            let sol = solve(spec)?;
            let exact = exact_cost(&sol.o1, &sol.o2, spec)?.cost;
            let thresholds = check_structure(spec, &sol)?;
            let oracle = match spec.variant {
                Variant::P1 => enumerate_policies_p1(spec, cap),
                Variant::P2 => enumerate_policies_p2(spec, cap),
            };
            let oracle_cost = match oracle {
                Ok(r) => Some(r.cost),
                Err(Error::CapExceeded { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            run.write("policies.json", &pair_json(&sol.o1, &sol.o2))?;
            run.write("thresholds.csv", &thresholds_csv(&sol.o1, &sol.o2))?;
            run.finish(
                json!({ "m": spec.m, "cap": cap }),
                json!({
                    "cost": sol.cost,
                    "exact_cost": exact,
                    "oracle_cost": oracle_cost,
                    "max_o1_thresholds": thresholds,
                    "threshold_limit": 2 * spec.m,
                    "o1": sol.o1,
                }),
            )?;
            let d = oracle_cost.map_or(0.0, |o| (o - sol.cost).abs()).max((exact - sol.cost).abs());
            if d > MATCH_TOL || thresholds > 2 * spec.m {
                return Err(Failure::Mismatch(format!("M-ary check failed (difference {d:e})")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = std::env::var("DECSEQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
