//! Successive minima by iterated exact SAP, and CVP under the promise
//! `d(v, L) < (√3/2)·λ_t` through an embedding into one more dimension.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::enumerate::svp_exact_with;
use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeValue, LpNorm};
use crate::lattice::{Lattice, Subspace};
use crate::linalg;
use crate::rational::{pow_q, q, root_bounds, Q, QVec};
use crate::report::SolveReport;
use crate::rng::SeedStream;
use crate::sap::{sap_exact, SapConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaResult {
    pub values: Vec<GaugeValue>,
    pub witnesses: Vec<QVec>,
    pub reports: Vec<SolveReport>,
}

/// `λ₁, …, λᵢ` with linearly independent witnesses.
pub fn successive_minima(l: &Lattice, p: LpNorm, i: usize, stream: &SeedStream, cfg: &SapConfig) -> Result<MinimaResult> {
    successive_minima_gauge(l, &Gauge::lp(l.dim(), p), i, stream, cfg)
}

pub fn successive_minima_gauge(l: &Lattice, g: &Gauge, i: usize, stream: &SeedStream, cfg: &SapConfig) -> Result<MinimaResult> {
    if i == 0 || i > l.rank() {
        return Err(Error::invalid(format!("minimum index {i} outside 1..={}", l.rank())));
    }
    let n = l.dim();
    let first = match svp_exact_with(l, g, cfg.budget) {
        Err(Error::Budget { .. }) => sap_exact(l, &Subspace::zero(n), g, &stream.derive(0), cfg)?,
        other => other?,
    };
    let mut out = MinimaResult { values: vec![first.norm.clone()], witnesses: vec![first.witness.clone()], reports: vec![first] };
    for j in 1..i {
        let m = Subspace::new(n, out.witnesses.clone())?;
        let r = sap_exact(l, &m, g, &stream.derive(j as u64), cfg)?;
        out.values.push(r.norm.clone());
        out.witnesses.push(r.witness.clone());
        out.reports.push(r);
    }
    Ok(out)
}

/// Rational `h ≥ √x` with `h² ≤ x·(1 + 2⁻²⁰)`.
fn embedding_height(x: &Q) -> Q {
    let slack = x * q(1, 1 << 20);
    let mut bits = 24;
    loop {
        let (_, hi) = root_bounds(x, 2, bits);
        if pow_q(&hi, 2) - x <= slack {
            return hi;
        }
        bits += 8;
    }
}

/// Closest vector to `v` in `ℓ₂`, valid when `d(v, L) < (√3/2)·λ_t(L)`.
pub fn promise_cvp(l: &Lattice, v: &[Q], t: usize, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    let n = l.dim();
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    if !l.is_full_rank() {
        return Err(Error::invalid("the lattice must have full rank"));
    }
    let lambda = successive_minima(l, LpNorm::L2, t, &stream.derive(0), cfg)?;
    let lambda_t_sq = lambda.values[t - 1].pth_power().clone();
    let h = embedding_height(&(lambda_t_sq / Q::from_integer(BigInt::from(4))));

    let mut rows: Vec<QVec> = l
        .basis()
        .iter()
        .map(|b| {
            let mut r = b.clone();
            r.push(Q::zero());
            r
        })
        .collect();
    let mut u = v.to_vec();
    u.push(h.clone());
    rows.push(u);
    let embedded = Lattice::new(n + 1, rows)?;
    let wit = successive_minima(&embedded, LpNorm::L2, t, &stream.derive(1), cfg)?;

    let mut best: Option<(GaugeValue, QVec)> = None;
    for (x, val) in wit.witnesses.iter().zip(&wit.values) {
        let alpha = &x[n] / &h;
        if alpha.abs() > Q::one() {
            return Err(Error::Internal(format!("embedded witness has |alpha| = {} > 1", alpha.abs())));
        }
        if alpha.abs() != Q::one() {
            continue;
        }
        // x = (w + αv, αh) with w ∈ L; the closest vector is −αw.
        let w = linalg::sub(&x[..n], &linalg::scale(v, &alpha));
        let closest = linalg::scale(&w, &-alpha);
        if best.as_ref().is_none_or(|(b, _)| val < b) {
            best = Some((val.clone(), closest));
        }
    }
    let (_, closest) = best.ok_or_else(|| Error::PromiseViolated("no embedded witness uses the target".into()))?;
    let coefficients = l
        .integer_coordinates(&closest)
        .ok_or_else(|| Error::Internal("recovered vector is not in the lattice".into()))?;
    let norm = Gauge::lp(n, LpNorm::L2).eval(&linalg::sub(&closest, v));
    let stats = lambda.reports.into_iter().chain(wit.reports).flat_map(|r| r.stats).collect();
    Ok(SolveReport { witness: closest, coefficients, norm, seed: stream.seed(), repetitions: cfg.reps, candidates: wit.witnesses.len(), stats })
}
