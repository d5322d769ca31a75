//! Subspace avoiding problem: shortest lattice vector outside a subspace.
//!
//! Both solvers sieve a family of scaled copies of the (LLL-reduced)
//! lattice and examine differences of the surviving pairs' lattice shifts.
//! The approximate solver keeps differences outside `M`; the exact solver
//! replaces each difference by the shortest element of its coset modulo
//! `L ∩ M`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::enumerate::{self, Enumerator};
use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeValue, MembershipFn};
use crate::lattice::{intersect_coordinates, CosetIndex, Lattice, Subspace};
use crate::linalg::{self, dot};
use crate::par;
use crate::rational::{common_denominator, q, qi, root_lower, Q, QVec};
use crate::report::SolveReport;
use crate::rng::SeedStream;
use crate::sieve::{self, SieveConfig, SieveStats};

#[derive(Clone, Debug)]
pub struct SapInstance {
    pub lattice: Lattice,
    pub subspace: Subspace,
    pub gauge: Gauge,
    pub epsilon: Q,
}

impl SapInstance {
    pub fn new(lattice: Lattice, subspace: Subspace, gauge: Gauge, epsilon: Q) -> Result<Self> {
        if subspace.ambient() != lattice.dim() {
            return Err(Error::Dimension { expected: lattice.dim(), got: subspace.ambient() });
        }
        if gauge.dim() != lattice.dim() {
            return Err(Error::Dimension { expected: lattice.dim(), got: gauge.dim() });
        }
        Ok(SapInstance { lattice, subspace, gauge, epsilon })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SapConfig {
    pub reps: usize,
    pub sieve: SieveConfig,
    /// Sieve stopping radius in the scaled instance.
    pub target: Q,
    /// Cap on examined pairs per sieve run; beyond it pairs are subsampled.
    pub max_pairs: usize,
    pub budget: u64,
}

impl Default for SapConfig {
    fn default() -> Self {
        SapConfig {
            reps: 3,
            sieve: SieveConfig::default(),
            target: qi(8),
            max_pairs: 1_000_000,
            budget: enumerate::default_budget(),
        }
    }
}

fn outside_rows<'a>(rows: impl Iterator<Item = &'a QVec>, m: &Subspace) -> Vec<&'a QVec> {
    rows.filter(|b| !m.contains(b)).collect()
}

/// Scale factors `σ₀ < σ₁ < …` with ratio 3/2 such that some `σⱼ` maps the
/// optimum of `L \ M` into `[2, 3]`.
pub fn scaling_candidates(l: &Lattice, m: &Subspace, g: &Gauge) -> Result<Vec<Q>> {
    let reduced = l.lll();
    scalings_for(l, &reduced, m, g)
}

pub(crate) fn scalings_for(l: &Lattice, reduced: &Lattice, m: &Subspace, g: &Gauge) -> Result<Vec<Q>> {
    let upper = outside_rows(l.basis().iter().chain(reduced.basis()), m)
        .into_iter()
        .map(|b| g.upper_bound(b))
        .min()
        .ok_or_else(|| Error::NoCandidate("the lattice lies inside the subspace".into()))?;
    let lower = euclid_lambda_lower(reduced) / g.r_out();
    Ok(geometric_scalings(&upper, &lower))
}

/// `σ₀ = 2/upper`, growing by 3/2 until `σ · lower ≥ 2`.
pub(crate) fn geometric_scalings(upper: &Q, lower: &Q) -> Vec<Q> {
    let ratio = q(3, 2);
    let mut sigma = qi(2) / upper;
    let mut out = vec![sigma.clone()];
    while &sigma * lower < qi(2) {
        sigma *= &ratio;
        out.push(sigma.clone());
    }
    out
}

/// Lower bound on the Euclidean first minimum of an LLL-reduced basis.
pub(crate) fn euclid_lambda_lower(reduced: &Lattice) -> Q {
    let gso = reduced.gso();
    let n = reduced.rank() as u32;
    let gso_min = gso.norms.iter().min().cloned().unwrap_or_else(Q::zero);
    let b1 = linalg::norm2_sq(&reduced.basis()[0]);
    let lll = b1 / Q::from_integer(BigInt::one() << (n - 1) as usize);
    let sq = if gso_min > lll { gso_min } else { lll };
    root_lower(&sq, 2)
}

/// Best candidates found so far: the value and every vector attaining it.
#[derive(Clone, Debug, Default)]
struct Best {
    value: Option<GaugeValue>,
    ties: Vec<QVec>,
}

impl Best {
    fn offer(&mut self, value: GaugeValue, v: QVec) {
        match &self.value {
            Some(b) if *b < value => {}
            Some(b) if *b == value => {
                if !self.ties.contains(&v) {
                    self.ties.push(v);
                }
            }
            _ => {
                self.value = Some(value);
                self.ties = vec![v];
            }
        }
    }

    fn merge(&mut self, other: Best) {
        if let Some(v) = other.value {
            for t in other.ties {
                self.offer(v.clone(), t);
            }
        }
    }
}

struct JobOutcome {
    best: Best,
    candidates: usize,
    stats: SieveStats,
}

/// Precomputed data for the reduced basis shared by every job.
struct Setup<'a> {
    g: &'a Gauge,
    m: &'a Subspace,
    body: Option<&'a MembershipFn>,
    reduced: Lattice,
    /// `M`-membership test on reduced coordinates: `d ∈ M ⟺ d · A = 0`.
    avoid: Vec<Vec<BigInt>>,
    exact: Option<(CosetIndex, Enumerator)>,
    cfg: &'a SapConfig,
}

impl Setup<'_> {
    fn in_subspace(&self, d: &[i64]) -> bool {
        self.avoid
            .iter()
            .all(|col| col.iter().zip(d).map(|(a, &c)| a * c).sum::<BigInt>().is_zero())
    }

    fn run_job(&self, sigma: &Q, stream: &SeedStream) -> Result<Option<JobOutcome>> {
        let scaled = self.reduced.scaled(sigma);
        let radius = sieve::initial_radius(&scaled, self.g);
        let samples = self.cfg.sieve.sample_count(scaled.dim(), &radius);
        let run = match sieve::aks_fixed(&scaled, self.g, samples, &self.cfg.target, &stream.derive(0), self.cfg.sieve.max_attempts) {
            Ok(r) => r,
            Err(Error::Undersampled { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let diffs = differences(&run.shift, self.cfg.max_pairs, &stream.derive(1));
        let mut best = Best::default();
        let mut candidates = 0;
        match &self.exact {
            None => {
                for d in &diffs {
                    if self.in_subspace(d) {
                        continue;
                    }
                    let v = self.reduced.vector_i64(d);
                    if self.body.is_some_and(|b| b(&v)) {
                        continue;
                    }
                    candidates += 1;
                    let val = self.g.eval(&v);
                    best.offer(val.clone(), linalg::neg(&v));
                    best.offer(val, v);
                }
            }
            Some((cosets, cvp)) => {
                let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
                for d in &diffs {
                    let c: Vec<BigInt> = d.iter().map(|&x| BigInt::from(x)).collect();
                    let key = cosets.key_of_coordinates(&c);
                    if key.iter().all(Zero::is_zero) || !seen.insert(key) {
                        continue;
                    }
                    candidates += 1;
                    let v = self.reduced.vector(&c);
                    let (val, ws) = cvp.closest(&v, self.g)?;
                    for w in ws {
                        let r = linalg::sub(&v, &w);
                        if linalg::is_zero(&r) || self.m.contains(&r) {
                            continue;
                        }
                        best.offer(val.clone(), linalg::neg(&r));
                        best.offer(val.clone(), r);
                    }
                }
            }
        }
        Ok(Some(JobOutcome { best, candidates, stats: run.stats }))
    }
}

/// Distinct nonzero shift differences, normalized so that the first nonzero
/// entry is positive. All pairs are used up to `cap`, beyond which `cap`
/// seeded random pairs are drawn.
fn differences(shifts: &[Vec<i64>], cap: usize, stream: &SeedStream) -> Vec<Vec<i64>> {
    let uniq: Vec<Vec<i64>> = shifts.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = uniq.len();
    let mut out = BTreeSet::new();
    let mut add = |a: &[i64], b: &[i64]| {
        let mut d: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        match d.iter().find(|&&x| x != 0) {
            None => {}
            Some(&first) => {
                if first < 0 {
                    d.iter_mut().for_each(|x| *x = -*x);
                }
                out.insert(d);
            }
        }
    };
    let total = n.saturating_mul(n.saturating_sub(1)) / 2;
    if total <= cap {
        for i in 0..n {
            for j in i + 1..n {
                add(&uniq[i], &uniq[j]);
            }
        }
    } else {
        let mut rng = stream.rng();
        for _ in 0..cap {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                add(&uniq[i], &uniq[j]);
            }
        }
    }
    out.into_iter().collect()
}

fn solve(l: &Lattice, m: &Subspace, g: &Gauge, stream: &SeedStream, cfg: &SapConfig, exact: bool) -> Result<SolveReport> {
    if m.ambient() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: m.ambient() });
    }
    if m.dimension() >= l.dim() {
        return Err(Error::invalid("the subspace must be proper"));
    }
    check_common(l, g, cfg)?;
    let reduced = l.lll();
    let sigmas = scalings_for(l, &reduced, m, g)?;
    let report = search(l, reduced, g, m, None, &sigmas, exact, stream, cfg)?;
    debug_assert!(!m.contains(&report.witness));
    Ok(report)
}

pub(crate) fn check_common(l: &Lattice, g: &Gauge, cfg: &SapConfig) -> Result<()> {
    if g.dim() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: g.dim() });
    }
    if !l.is_full_rank() {
        return Err(Error::invalid("the lattice must have full rank"));
    }
    if cfg.reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    Ok(())
}

/// Sieves every `(rep, scaling)` job and returns the best difference that
/// avoids `m` (and `body`, when given). In exact mode each difference is
/// first reduced to the shortest element of its coset modulo `L ∩ M`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search(
    l: &Lattice,
    reduced: Lattice,
    g: &Gauge,
    m: &Subspace,
    body: Option<&MembershipFn>,
    sigmas: &[Q],
    exact: bool,
    stream: &SeedStream,
    cfg: &SapConfig,
) -> Result<SolveReport> {
    let avoid: Vec<Vec<BigInt>> = m
        .annihilator()
        .iter()
        .map(|a| {
            let col: QVec = reduced.basis().iter().map(|b| dot(b, a)).collect();
            let den = Q::from_integer(common_denominator(col.iter()));
            col.iter().map(|x| (x * &den).to_integer()).collect()
        })
        .collect();
    let exact = if exact {
        let (coords, sub) = intersect_coordinates(&reduced, m)?;
        Some((CosetIndex::from_coordinates(&reduced, &coords), Enumerator::new(&sub, cfg.budget)))
    } else {
        None
    };
    let setup = Setup { g, m, body, reduced, avoid, exact, cfg };

    let jobs: Vec<(usize, usize)> = (0..cfg.reps).flat_map(|r| (0..sigmas.len()).map(move |j| (r, j))).collect();
    let outcomes = par::map_slice(&jobs, |&(r, j)| setup.run_job(&sigmas[j], &stream.derive_path(&[r as u64, j as u64])));

    let mut best = Best::default();
    let mut candidates = 0;
    let mut stats = Vec::new();
    for o in outcomes {
        if let Some(o) = o? {
            best.merge(o.best);
            candidates += o.candidates;
            stats.push(o.stats);
        }
    }
    let value = best
        .value
        .ok_or_else(|| Error::NoCandidate("every examined difference lies in the avoided set".into()))?;
    let (witness, coefficients) = enumerate::lex_least(l, best.ties);
    Ok(SolveReport { witness, coefficients, norm: value, seed: stream.seed(), repetitions: cfg.reps, candidates, stats })
}

/// Approximate SAP for any gauge. The output always lies in `L \ M`.
pub fn sap_approx(inst: &SapInstance, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    if !inst.epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    solve(&inst.lattice, &inst.subspace, &inst.gauge, stream, cfg, false)
}

/// Exact SAP: each examined difference is replaced by the shortest vector of
/// its coset modulo `L ∩ M`.
pub fn sap_exact(l: &Lattice, m: &Subspace, g: &Gauge, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    solve(l, m, g, stream, cfg, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{sap_oracle, DEFAULT_BUDGET};
    use crate::gauge::LpNorm;
    use crate::rational::qvec;

    fn span(n: usize, rows: &[&[i64]]) -> Subspace {
        Subspace::new(n, rows.iter().map(|r| qvec(r)).collect()).unwrap()
    }

    fn cfg() -> SapConfig {
        SapConfig { sieve: SieveConfig { samples: Some(3000), ..SieveConfig::default() }, ..SapConfig::default() }
    }

    #[test]
    fn scaling_example() {
        let l = Lattice::identity(2);
        let s = scaling_candidates(&l, &span(2, &[&[1, 0]]), &Gauge::lp(2, LpNorm::L2)).unwrap();
        assert!(s.contains(&qi(2)));
        for w in s.windows(2) {
            assert_eq!(&w[1] / &w[0], q(3, 2));
        }
    }

    #[test]
    fn exact_examples() {
        let g2 = Gauge::lp(2, LpNorm::L2);
        let s = SeedStream::new(1);
        let r = sap_exact(&Lattice::identity(2), &span(2, &[&[1, 0]]), &g2, &s, &cfg()).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(1));
        assert!(r.witness == qvec(&[0, 1]) || r.witness == qvec(&[0, -1]));

        let l = Lattice::from_integer_rows(&[vec![1, 0], vec![0, 2]]).unwrap();
        let r = sap_exact(&l, &span(2, &[&[1, 0]]), &g2, &s, &cfg()).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(4));
        assert_eq!(r.witness[0], qi(0));

        let g1 = Gauge::lp(3, LpNorm::L1);
        let r = sap_exact(&Lattice::identity(3), &span(3, &[&[1, 1, 0]]), &g1, &s, &cfg()).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(1));
    }

    #[test]
    fn approx_examples() {
        let s = SeedStream::new(2);
        let half = q(1, 2);
        let inst = SapInstance::new(Lattice::identity(3), span(3, &[&[1, 0, 0], &[0, 1, 0]]), Gauge::lp(3, LpNorm::L2), half.clone()).unwrap();
        let r = sap_approx(&inst, &s, &cfg()).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(1));
        assert_eq!(r.witness[2].abs(), qi(1));

        let inst = SapInstance::new(Lattice::identity(2), span(2, &[&[1, 1]]), Gauge::lp(2, LpNorm::L2), half).unwrap();
        assert_eq!(*sap_approx(&inst, &s, &cfg()).unwrap().norm.pth_power(), qi(1));

        let l = Lattice::from_integer_rows(&[vec![1, 0], vec![0, 5]]).unwrap();
        let inst = SapInstance::new(l, span(2, &[&[1, 0]]), Gauge::lp(2, LpNorm::L2), q(1, 10)).unwrap();
        assert_eq!(*sap_approx(&inst, &s, &cfg()).unwrap().norm.pth_power(), qi(25));
    }

    #[test]
    fn exact_matches_oracle_on_skew_lattice() {
        let l = Lattice::from_integer_rows(&[vec![3, -1, 2], vec![1, 4, 0], vec![-2, 1, 5]]).unwrap();
        let m = span(3, &[&[1, 1, 1]]);
        for p in [LpNorm::L1, LpNorm::L2, LpNorm::Infinity] {
            let g = Gauge::lp(3, p);
            let want = sap_oracle(&l, &m, &g, DEFAULT_BUDGET).unwrap().norm;
            let got = sap_exact(&l, &m, &g, &SeedStream::new(3), &cfg()).unwrap();
            assert_eq!(got.norm, want, "{p}");
            assert!(l.contains(&got.witness) && !m.contains(&got.witness));
        }
    }

    #[test]
    fn differences_are_canonical_and_nonzero() {
        let shifts = vec![vec![0, 0], vec![1, 0], vec![1, 0], vec![0, 1]];
        let d = differences(&shifts, 100, &SeedStream::new(0));
        assert_eq!(d, vec![vec![1, -1], vec![1, 0], vec![0, 1]].into_iter().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>());
    }
}
