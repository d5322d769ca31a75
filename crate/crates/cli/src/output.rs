//! JSON reports. Rationals are written as strings.

use latticekit::gauge::GaugeValue;
use latticekit::rational::{format_rational, Q};
use latticekit::report::SolveReport;
use latticekit::sap::SapConfig;
use latticekit::sieve::SieveStats;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::instance::NormSpec;

pub fn q_str(x: &Q) -> String {
    format_rational(x)
}

pub fn vec_str(v: &[Q]) -> Vec<String> {
    v.iter().map(q_str).collect()
}

/// `value` is present when the norm is rational; `pth_power` is always exact.
pub fn gauge_value(v: &GaugeValue) -> Value {
    json!({
        "value": v.rational().map(|x| q_str(&x)),
        "pth_power": q_str(v.pth_power()),
        "power": v.power(),
    })
}

fn stats(s: &SieveStats) -> Value {
    json!({
        "samples": s.samples,
        "rounds": s.rounds,
        "survivors_per_round": s.survivors_per_round,
        "representatives_per_round": s.representatives_per_round,
    })
}

pub fn solve_report(r: &SolveReport) -> Value {
    json!({
        "witness": vec_str(&r.witness),
        "coefficients": r.coefficients.iter().map(BigInt::to_string).collect::<Vec<_>>(),
        "norm": gauge_value(&r.norm),
        "seed": r.seed,
        "repetitions": r.repetitions,
        "candidates": r.candidates,
        "stats": r.stats.iter().map(stats).collect::<Vec<_>>(),
    })
}

#[derive(Serialize)]
struct Config {
    seed: u64,
    reps: usize,
    samples: Option<usize>,
    sample_constant: u64,
    sieve_target: String,
    max_pairs: usize,
    max_attempts: u64,
    budget: u64,
    oracle: bool,
    norm: Option<String>,
    params: Map<String, Value>,
}

#[derive(Serialize)]
pub struct Report {
    command: String,
    config: Config,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64, cfg: &SapConfig, oracle: bool) -> Self {
        Report {
            command: command.into(),
            config: Config {
                seed,
                reps: cfg.reps,
                samples: cfg.sieve.samples,
                sample_constant: cfg.sieve.sample_constant,
                sieve_target: q_str(&cfg.target),
                max_pairs: cfg.max_pairs,
                max_attempts: cfg.sieve.max_attempts,
                budget: cfg.budget,
                oracle,
                norm: None,
                params: Map::new(),
            },
            result: Value::Null,
            oracle: None,
            error: None,
        }
    }

    pub fn norm(&mut self, n: &NormSpec) {
        self.config.norm = Some(n.tag());
    }

    pub fn param(&mut self, key: &str, v: Value) {
        self.config.params.insert(key.into(), v);
    }

    pub fn fail(&mut self, e: &latticekit::Error) {
        let kind = match e {
            latticekit::Error::NoCandidate(_) => "no-candidate",
            latticekit::Error::PromiseViolated(_) => "promise-violated",
            latticekit::Error::Infeasible(_) => "infeasible",
            _ => "error",
        };
        self.error = Some(json!({ "kind": kind, "message": e.to_string() }));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
