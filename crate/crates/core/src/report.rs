use num_bigint::BigInt;

use crate::gauge::GaugeValue;
use crate::rational::QVec;
use crate::sieve::SieveStats;

/// Solver output: a witness with its exact norm and provenance counters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub witness: QVec,
    /// Coefficients of the witness in the input basis.
    pub coefficients: Vec<BigInt>,
    pub norm: GaugeValue,
    pub seed: u64,
    pub repetitions: usize,
    /// Candidates examined before selecting the witness.
    pub candidates: usize,
    pub stats: Vec<SieveStats>,
}

impl SolveReport {
    pub fn deterministic(witness: QVec, coefficients: Vec<BigInt>, norm: GaugeValue) -> Self {
        SolveReport { witness, coefficients, norm, seed: 0, repetitions: 1, candidates: 1, stats: Vec::new() }
    }
}
