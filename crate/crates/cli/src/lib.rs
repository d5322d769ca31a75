//! Command-line front end: argument parsing, dispatch and JSON reports.

pub mod instance;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use latticekit::cap::{cap_approx, theta_brute_force, theta_decide, ConvexBody};
use latticekit::enumerate::{cap_oracle, cvp_exact_gauge, default_budget, minima_oracle, sap_oracle, svp_exact_with};
use latticekit::gauge::LpNorm;
use latticekit::lattice::Subspace;
use latticekit::minima::{promise_cvp, successive_minima_gauge};
use latticekit::param::{self, check_perfect_code, perfect_code_to_pcvp, Graph, ParamInstance};
use latticekit::rational::{parse_rational, Q};
use latticekit::rng::SeedStream;
use latticekit::sap::{sap_approx, sap_exact, SapConfig, SapInstance};
use latticekit::sieve::SieveConfig;
use latticekit::unique::{solve_via_unique, uniqueness_rate, IsolationConfig};
use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use instance::{load_instance, Instance};
use output::{gauge_value, q_str, solve_report, vec_str, Report};

/// Instances up to this dimension are cross-checked by `--oracle`.
const ORACLE_MAX_DIM: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] latticekit::Error),
}

#[derive(Parser, Debug)]
#[command(name = "latticekit", version, about = "Exact lattice algorithms with seeded sieving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cross-check the result against exhaustive enumeration (n ≤ 5).
    #[arg(long, global = true)]
    oracle: bool,
    /// Independent sieve repetitions per scaling.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Fixed number of sieve samples per run.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Constant `C` in the default sample count `C · 4ⁿ · ⌈log₂ R⌉`.
    #[arg(long, global = true)]
    sample_constant: Option<u64>,
}

#[derive(Args, Debug)]
struct Inst {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the instance norm: l1, l2, linf, lp:<p>, cone:<±1,…>.
    #[arg(long)]
    norm: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shortest nonzero vector by sieving.
    Svp(Inst),
    /// Closest vector to the instance target by enumeration.
    Cvp(Inst),
    /// Exact shortest vector outside the instance subspace.
    Sap(Inst),
    /// `(1+ε)`-approximate shortest vector outside the subspace.
    SapApprox {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Successive minima `λ₁, …, λ_count`.
    Minima {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Euclidean CVP under the promise `d(v, L) < (√3/2)·λ_t`.
    PromiseCvp {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        t: Option<usize>,
    },
    /// Shortest vector outside the ball `{x : ‖x‖_body ≤ radius}`.
    Cap {
        #[command(flatten)]
        inst: Inst,
        #[arg(long, default_value = "l2")]
        body: String,
        #[arg(long)]
        radius: String,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Does the lattice contain `v` with `‖v‖_p^p = k`?
    Theta {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: u32,
    },
    /// Shortest vector with support at most `k` in the input basis.
    Psvp {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Closest vector with support at most `k`.
    Pcvp {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Shortest vector outside the subspace with support at most `k`.
    Psap {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        k: Option<usize>,
        /// Solve each subset with the sieving exact SAP solver.
        #[arg(long)]
        sieve: bool,
    },
    /// Builds the support-restricted CVP instance of a perfect-code question.
    GenPerfectCode {
        /// Edge list: `n m`, then `m` lines `a b` (1-based).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        mconst: Option<i64>,
        /// Also answer the question through the generated instance.
        #[arg(long)]
        decide: bool,
    },
    /// Solves CVP through a randomly weighted instance with a unique solution.
    ReduceUnique {
        #[command(flatten)]
        inst: Inst,
        #[arg(long)]
        weight_k: Option<String>,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Fraction of weight draws that leave a single closest vector.
    UniqueRate {
        #[command(flatten)]
        inst: Inst,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        weight_k: Option<String>,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Exhaustive enumeration: svp, cvp, sap or minima.
    Oracle {
        #[command(flatten)]
        inst: Inst,
        /// Inferred from the instance when absent.
        #[arg(long)]
        problem: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Svp(_) => "svp",
            Command::Cvp(_) => "cvp",
            Command::Sap(_) => "sap",
            Command::SapApprox { .. } => "sap-approx",
            Command::Minima { .. } => "minima",
            Command::PromiseCvp { .. } => "promise-cvp",
            Command::Cap { .. } => "cap",
            Command::Theta { .. } => "theta",
            Command::Psvp { .. } => "psvp",
            Command::Pcvp { .. } => "pcvp",
            Command::Psap { .. } => "psap",
            Command::GenPerfectCode { .. } => "gen-perfect-code",
            Command::ReduceUnique { .. } => "reduce-unique",
            Command::UniqueRate { .. } => "unique-rate",
            Command::Oracle { .. } => "oracle",
        }
    }
}

struct Ctx {
    stream: SeedStream,
    cfg: SapConfig,
    oracle: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn rational_arg(s: &str, what: &str) -> Result<Q, CliError> {
    parse_rational(s).map_err(|e| usage(format!("--{what}: {e}")))
}

fn epsilon(flag: &Option<String>, inst: &Instance) -> Result<Q, CliError> {
    match flag {
        Some(s) => rational_arg(s, "epsilon"),
        None => inst.epsilon.clone().ok_or_else(|| usage("an epsilon is required (flag or instance)")),
    }
}

fn load(i: &Inst) -> Result<Instance, CliError> {
    load_instance(&i.instance, i.norm.as_deref())
}

fn oracle_applies(ctx: &Ctx, inst: &Instance) -> bool {
    ctx.oracle && inst.n() <= ORACLE_MAX_DIM
}

fn agreement(found: &latticekit::gauge::GaugeValue, opt: &latticekit::gauge::GaugeValue) -> Value {
    json!({ "norm": gauge_value(opt), "agrees": found == opt })
}

fn param_instance(inst: &Instance, k: Option<usize>, command: &str) -> Result<ParamInstance, CliError> {
    let k = k.or(inst.k.map(|k| k as usize)).ok_or_else(|| usage(format!("{command} needs --k or an instance k")))?;
    Ok(ParamInstance::new(inst.lattice.clone(), k, inst.norm.lp(command)?)?)
}

fn weight_config(k: &Option<String>, p: Option<u64>, norm: LpNorm) -> Result<IsolationConfig, CliError> {
    let mut cfg = IsolationConfig { p, norm, ..IsolationConfig::default() };
    if let Some(s) = k {
        cfg.k = s.parse::<BigInt>().map_err(|_| usage("--weight-k must be an integer"))?;
        if cfg.k < BigInt::one() {
            return Err(usage("--weight-k must be positive"));
        }
    }
    Ok(cfg)
}

fn run(command: &Command, ctx: &Ctx, report: &mut Report) -> Result<(), CliError> {
    let (stream, cfg) = (&ctx.stream, &ctx.cfg);
    match command {
        Command::Svp(i) => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let g = inst.gauge()?;
            let r = sap_exact(&inst.lattice, &Subspace::zero(inst.n()), &g, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                report.oracle = Some(agreement(&r.norm, &svp_exact_with(&inst.lattice, &g, cfg.budget)?.norm));
            }
            report.result = solve_report(&r);
        }
        Command::Cvp(i) => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let g = inst.gauge()?;
            let r = cvp_exact_gauge(&inst.lattice, inst.target("cvp")?, &g, cfg.budget)?;
            report.result = solve_report(&r);
        }
        Command::Sap(i) => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let g = inst.gauge()?;
            let m = inst.subspace("sap")?;
            let r = sap_exact(&inst.lattice, m, &g, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                report.oracle = Some(agreement(&r.norm, &sap_oracle(&inst.lattice, m, &g, cfg.budget)?.norm));
            }
            report.result = solve_report(&r);
        }
        Command::SapApprox { inst: i, epsilon: e } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let eps = epsilon(e, &inst)?;
            report.param("epsilon", json!(q_str(&eps)));
            let g = inst.gauge()?;
            let m = inst.subspace("sap-approx")?;
            let r = sap_approx(&SapInstance::new(inst.lattice.clone(), m.clone(), g.clone(), eps.clone())?, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                let opt = sap_oracle(&inst.lattice, m, &g, cfg.budget)?.norm;
                let within = r.norm.le_scaled(&opt, &(Q::one() + &eps));
                report.oracle = Some(json!({ "norm": gauge_value(&opt), "agrees": within }));
            }
            report.result = solve_report(&r);
        }
        Command::Minima { inst: i, count } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let g = inst.gauge()?;
            let count = count.unwrap_or(inst.lattice.rank());
            report.param("count", json!(count));
            let r = successive_minima_gauge(&inst.lattice, &g, count, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                let opt = minima_oracle(&inst.lattice, &g, cfg.budget)?;
                let agrees = r.values.iter().zip(&opt).all(|(a, (_, b))| a == b);
                report.oracle = Some(json!({
                    "values": opt.iter().take(count).map(|(_, v)| gauge_value(v)).collect::<Vec<_>>(),
                    "agrees": agrees,
                }));
            }
            report.result = json!({
                "values": r.values.iter().map(gauge_value).collect::<Vec<_>>(),
                "witnesses": r.witnesses.iter().map(|w| vec_str(w)).collect::<Vec<_>>(),
                "steps": r.reports.iter().map(solve_report).collect::<Vec<_>>(),
            });
        }
        Command::PromiseCvp { inst: i, t } => {
            let inst = load(i)?;
            if inst.norm != instance::NormSpec::Lp(LpNorm::L2) {
                return Err(usage("promise-cvp works in the Euclidean norm only"));
            }
            report.norm(&inst.norm);
            let t = t.unwrap_or(inst.lattice.rank());
            report.param("t", json!(t));
            let v = inst.target("promise-cvp")?;
            let r = promise_cvp(&inst.lattice, v, t, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                let opt = cvp_exact_gauge(&inst.lattice, v, &inst.gauge()?, cfg.budget)?.norm;
                report.oracle = Some(agreement(&r.norm, &opt));
            }
            report.result = solve_report(&r);
        }
        Command::Cap { inst: i, body, radius, epsilon: e } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let eps = epsilon(e, &inst)?;
            let body_norm = LpNorm::parse(body).map_err(|e| usage(format!("--body: {e}")))?;
            let radius = rational_arg(radius, "radius")?;
            report.param("epsilon", json!(q_str(&eps)));
            report.param("body", json!(body_norm.tag()));
            report.param("radius", json!(q_str(&radius)));
            let g = inst.gauge()?;
            let c = ConvexBody::lp_ball(inst.n(), body_norm, radius);
            let r = cap_approx(&inst.lattice, &c, &g, &eps, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                let member = |x: &[Q]| c.contains(x);
                let opt = cap_oracle(&inst.lattice, &member, &g, &r.norm.upper(), cfg.budget)?
                    .expect("the output itself lies outside the body within the bound")
                    .norm;
                let within = r.norm.le_scaled(&opt, &(Q::one() + &eps));
                report.oracle = Some(json!({ "norm": gauge_value(&opt), "agrees": within }));
            }
            report.result = solve_report(&r);
        }
        Command::Theta { inst: i, k, p } => {
            let inst = load(i)?;
            report.param("k", json!(k));
            report.param("p", json!(p));
            let a = theta_decide(&inst.lattice, *k, *p, stream, cfg)?;
            if oracle_applies(ctx, &inst) {
                let brute = theta_brute_force(&inst.lattice, *k, *p, cfg.budget)?;
                report.oracle = Some(json!({
                    "answer": if brute.is_some() { "YES" } else { "NO" },
                    "agrees": brute.is_some() == a.yes,
                }));
            }
            report.result = json!({
                "answer": if a.yes { "YES" } else { "NO" },
                "epsilon": q_str(&a.epsilon),
                "shortest_outside": solve_report(&a.report),
            });
        }
        Command::Psvp { inst: i, k } | Command::Pcvp { inst: i, k } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let name = command.name();
            let mut p = param_instance(&inst, *k, name)?;
            report.param("k", json!(p.k));
            let r = if name == "pcvp" {
                p = p.with_target(inst.target(name)?.clone())?;
                param::pcvp(&p)?
            } else {
                param::psvp(&p)?
            };
            if oracle_applies(ctx, &inst) {
                report.oracle = Some(agreement(&r.norm, &param::support_oracle(&p)?.norm));
            }
            report.result = solve_report(&r);
        }
        Command::Psap { inst: i, k, sieve } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let p = param_instance(&inst, *k, "psap")?.with_subspace(inst.subspace("psap")?.clone())?;
            report.param("k", json!(p.k));
            report.param("method", json!(if *sieve { "sieve" } else { "enumeration" }));
            let r = if *sieve { param::psap_sieve(&p, stream, cfg)? } else { param::psap(&p)? };
            if oracle_applies(ctx, &inst) {
                report.oracle = Some(agreement(&r.norm, &param::support_oracle(&p)?.norm));
            }
            report.result = solve_report(&r);
        }
        Command::GenPerfectCode { graph, k, mconst, decide } => {
            let text = std::fs::read_to_string(graph).map_err(|e| usage(format!("{}: {e}", graph.display())))?;
            let g = Graph::parse_edge_list(&text).map_err(|e| usage(format!("{}: {e}", graph.display())))?;
            report.param("k", json!(k));
            let pc = perfect_code_to_pcvp(&g, *k, *mconst)?;
            let inst = &pc.instance;
            let mut result = json!({
                "instance": {
                    "dimension": inst.lattice.dim(),
                    "basis": inst.lattice.basis().iter().map(|b| vec_str(b)).collect::<Vec<_>>(),
                    "target": vec_str(inst.target.as_ref().expect("generated with a target")),
                    "norm": "l2",
                    "k": inst.k,
                },
                "mconst": pc.mconst,
                "threshold_sq": q_str(&pc.threshold_sq),
            });
            if *decide {
                let d = param::pcvp(inst)?;
                result["answer"] = json!(if *d.norm.pth_power() <= pc.threshold_sq { "YES" } else { "NO" });
                result["closest"] = solve_report(&d);
            }
            if ctx.oracle {
                let truth = check_perfect_code(&g, *k);
                let mut o = json!({ "answer": if truth { "YES" } else { "NO" } });
                if *decide {
                    o["agrees"] = json!(result["answer"] == o["answer"]);
                }
                report.oracle = Some(o);
            }
            report.result = result;
        }
        Command::ReduceUnique { inst: i, weight_k, p } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let icfg = weight_config(weight_k, *p, inst.norm.lp("reduce-unique")?)?;
            report.param("weight_k", json!(icfg.k.to_string()));
            let s = solve_via_unique(&inst.lattice, inst.target("reduce-unique")?, stream, &icfg)?;
            if oracle_applies(ctx, &inst) {
                let opt = cvp_exact_gauge(&inst.lattice, inst.target("reduce-unique")?, &inst.gauge()?, cfg.budget)?.norm;
                report.oracle = Some(agreement(&s.distance, &opt));
            }
            report.result = json!({
                "witness": vec_str(&s.witness),
                "coefficients": s.coefficients.iter().map(BigInt::to_string).collect::<Vec<_>>(),
                "distance": gauge_value(&s.distance),
                "weights": s.transform.a,
                "p": s.transform.p,
                "weight_k": s.transform.k.to_string(),
                "prescale": s.transform.scale.to_string(),
                "unique": s.unique,
                "doublings": s.doublings,
            });
        }
        Command::UniqueRate { inst: i, trials, weight_k, p } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let icfg = weight_config(weight_k, *p, inst.norm.lp("unique-rate")?)?;
            report.param("weight_k", json!(icfg.k.to_string()));
            report.param("trials", json!(trials));
            let r = uniqueness_rate(&inst.lattice, inst.target("unique-rate")?, *trials, stream, &icfg)?;
            report.result = json!({
                "trials": r.trials,
                "unique": r.unique,
                "p": r.p,
                "rate": r.rate(),
            });
        }
        Command::Oracle { inst: i, problem } => {
            let inst = load(i)?;
            report.norm(&inst.norm);
            let g = inst.gauge()?;
            let problem = match problem.as_deref() {
                Some(p) => p.to_string(),
                None if inst.subspace.is_some() => "sap".into(),
                None if inst.target.is_some() => "cvp".into(),
                None => "svp".into(),
            };
            report.param("problem", json!(problem));
            let budget = cfg.budget;
            report.result = match problem.as_str() {
                "svp" => solve_report(&svp_exact_with(&inst.lattice, &g, budget)?),
                "cvp" => solve_report(&cvp_exact_gauge(&inst.lattice, inst.target("oracle")?, &g, budget)?),
                "sap" => solve_report(&sap_oracle(&inst.lattice, inst.subspace("oracle")?, &g, budget)?),
                "minima" => {
                    let m = minima_oracle(&inst.lattice, &g, budget)?;
                    json!({
                        "values": m.iter().map(|(_, v)| gauge_value(v)).collect::<Vec<_>>(),
                        "witnesses": m.iter().map(|(w, _)| vec_str(w)).collect::<Vec<_>>(),
                    })
                }
                other => return Err(usage(format!("unknown oracle problem {other:?}"))),
            };
        }
    }
    Ok(())
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(stderr: String) -> Self {
        Outcome { code: 1, stdout: String::new(), stderr }
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| usage(format!("--threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    Ok(f())
}

/// Runs one invocation; `args` includes the program name.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::usage(text)
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut sieve = SieveConfig { samples: cli.samples, ..SieveConfig::default() };
    if let Some(c) = cli.sample_constant {
        sieve.sample_constant = c;
    }
    let mut cfg = SapConfig { sieve, budget: default_budget(), ..SapConfig::default() };
    if let Some(r) = cli.reps {
        cfg.reps = r.max(1);
    }
    let ctx = Ctx { stream: SeedStream::new(cli.seed), cfg, oracle: cli.oracle };
    let name = cli.command.name();
    let mut report = Report::new(name, cli.seed, &ctx.cfg, ctx.oracle);
    let result = with_threads(cli.threads, || run(&cli.command, &ctx, &mut report)).and_then(|r| r);
    match result {
        Ok(()) => Outcome { code: 0, stdout: report.to_json() + "\n", stderr: String::new() },
        Err(CliError::Solver(e)) if e.is_solver_outcome() => {
            report.fail(&e);
            Outcome { code: 2, stdout: report.to_json() + "\n", stderr: format!("{name}: {e}\n") }
        }
        Err(e) => Outcome::usage(format!("{name}: {e}\n")),
    }
}
