//! Exact enumeration of lattice points in Euclidean balls (Fincke–Pohst over
//! exact rationals), and the brute-force solvers built on it.
//!
//! Gauge radii are converted to Euclidean radii through the gauge's outer
//! witness, candidates are filtered with the gauge exactly, and minimization
//! shrinks the radius as better candidates appear. Ties are kept, so every
//! optimal vector is seen and the reported witness has the lexicographically
//! smallest coefficient vector in the input basis.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeValue, LpNorm};
use crate::lattice::{Lattice, Subspace};
use crate::linalg::{self, dot, gram_schmidt, norm2_sq, Gso};
use crate::rational::{ceil_int, floor_int, q, root_upper, Q, QVec};
use crate::report::SolveReport;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Node budget for enumeration: `LATTICEKIT_BUDGET` if set, else 10⁷.
pub fn default_budget() -> u64 {
    static BUDGET: OnceLock<u64> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var("LATTICEKIT_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET)
    })
}

/// Enumeration context for one lattice: an LLL-reduced basis and its
/// Gram–Schmidt data.
#[derive(Clone, Debug)]
pub struct Enumerator {
    dim: usize,
    basis: Vec<QVec>,
    gso: Gso,
    budget: u64,
}

struct Walk<'a, F> {
    e: &'a Enumerator,
    tau: QVec,
    perp: Q,
    bound: Q,
    coeffs: Vec<BigInt>,
    nodes: u64,
    visit: F,
}

impl<F> Walk<'_, F>
where
    F: FnMut(&[BigInt], &QVec) -> Option<Q>,
{
    fn level(&mut self, j: usize, used: &Q) -> Result<()> {
        if j == 0 {
            let v = linalg::combine(&self.coeffs, &self.e.basis, self.e.dim);
            if let Some(b) = (self.visit)(&self.coeffs, &v) {
                if b < self.bound {
                    self.bound = b;
                }
            }
            return Ok(());
        }
        let idx = j - 1;
        let mut center = self.tau[idx].clone();
        for i in j..self.coeffs.len() {
            if !self.coeffs[i].is_zero() {
                center -= Q::from_integer(self.coeffs[i].clone()) * &self.e.gso.mu[i][idx];
            }
        }
        let avail = &self.bound - &self.perp - used;
        if avail.is_negative() {
            return Ok(());
        }
        let norm = &self.e.gso.norms[idx];
        let rad = root_upper(&(&avail / norm), 2);
        let mut c = ceil_int(&(&center - &rad));
        let hi = floor_int(&(&center + &rad));
        while c <= hi {
            self.nodes += 1;
            if self.nodes > self.e.budget {
                return Err(Error::Budget { budget: self.e.budget });
            }
            let diff = Q::from_integer(c.clone()) - &center;
            let next = used + &diff * &diff * norm;
            if next <= &self.bound - &self.perp {
                self.coeffs[idx] = c.clone();
                self.level(idx, &next)?;
            }
            c += 1;
        }
        self.coeffs[idx] = BigInt::zero();
        Ok(())
    }
}

impl Enumerator {
    pub fn new(l: &Lattice, budget: u64) -> Self {
        let reduced = l.lll();
        let basis = reduced.basis().to_vec();
        let gso = gram_schmidt(&basis);
        Enumerator { dim: l.dim(), basis, gso, budget }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    fn tau(&self, t: &[Q]) -> (QVec, Q) {
        let tau: QVec = (0..self.rank())
            .map(|j| dot(t, &self.gso.bstar[j]) / &self.gso.norms[j])
            .collect();
        let proj: Q = tau.iter().zip(&self.gso.norms).map(|(a, n)| a * a * n).sum();
        (tau, norm2_sq(t) - proj)
    }

    /// Visits every lattice vector `v` with `‖v − t‖₂² ≤ bound`. The visitor
    /// may return a smaller bound. Returns the number of nodes visited.
    pub fn walk<F>(&self, t: Option<&[Q]>, bound: Q, visit: F) -> Result<u64>
    where
        F: FnMut(&[BigInt], &QVec) -> Option<Q>,
    {
        let zero = linalg::zeros(self.dim);
        let t = t.unwrap_or(&zero);
        let (tau, perp) = self.tau(t);
        let mut w = Walk { e: self, tau, perp, bound, coeffs: vec![BigInt::zero(); self.rank()], nodes: 0, visit };
        w.level(self.rank(), &Q::zero())?;
        Ok(w.nodes)
    }

    /// Nearest-plane rounding of `t`.
    pub fn babai(&self, t: &[Q]) -> QVec {
        let (tau, _) = self.tau(t);
        let k = self.rank();
        let mut c = vec![BigInt::zero(); k];
        let half = q(1, 2);
        for idx in (0..k).rev() {
            let mut center = tau[idx].clone();
            for i in idx + 1..k {
                center -= Q::from_integer(c[i].clone()) * &self.gso.mu[i][idx];
            }
            c[idx] = floor_int(&(center + &half));
        }
        linalg::combine(&c, &self.basis, self.dim)
    }

    /// All lattice vectors `v` minimizing `g(v − t)` among those accepted,
    /// given an upper bound `init` on the optimum.
    pub fn search_min(
        &self,
        t: Option<&[Q]>,
        g: &Gauge,
        init: &Q,
        accept: impl Fn(&QVec) -> bool,
    ) -> Result<Option<(GaugeValue, Vec<QVec>)>> {
        let mut best: Option<(GaugeValue, Vec<QVec>)> = None;
        let bound = g.euclid_sq_bound(&g.radius_value(init));
        self.walk(t, bound, |_, v| {
            if !accept(v) {
                return None;
            }
            let val = match t {
                Some(t) => g.eval(&linalg::sub(v, t)),
                None => g.eval(v),
            };
            match &mut best {
                Some((b, ties)) if *b == val => {
                    ties.push(v.clone());
                    None
                }
                Some((b, _)) if *b < val => None,
                _ => {
                    let shrink = g.euclid_sq_bound(&val);
                    best = Some((val, vec![v.clone()]));
                    Some(shrink)
                }
            }
        })?;
        Ok(best)
    }

    /// Closest vector to `t` under `g`, with every tie.
    pub fn closest(&self, t: &[Q], g: &Gauge) -> Result<(GaugeValue, Vec<QVec>)> {
        if self.rank() == 0 {
            let zero = linalg::zeros(self.dim);
            let v = g.eval(&linalg::sub(&zero, t));
            return Ok((v, vec![zero]));
        }
        let start = self.babai(t);
        let init = g.upper_bound(&linalg::sub(&start, t));
        let found = self.search_min(Some(t), g, &init, |_| true)?;
        Ok(found.expect("the rounded point lies inside the search radius"))
    }
}

/// Picks the tie whose input-basis coefficients are lexicographically least.
pub(crate) fn lex_least(l: &Lattice, ties: Vec<QVec>) -> (QVec, Vec<BigInt>) {
    ties.into_iter()
        .map(|v| {
            let c = l.integer_coordinates(&v).expect("enumerated vectors lie in the lattice");
            (c, v)
        })
        .min_by(|a, b| linalg::lex_cmp_int(&a.0, &b.0))
        .map(|(c, v)| (v, c))
        .expect("at least one tie")
}

fn report(l: &Lattice, value: GaugeValue, ties: Vec<QVec>) -> SolveReport {
    let count = ties.len();
    let (w, c) = lex_least(l, ties);
    let mut r = SolveReport::deterministic(w, c, value);
    r.candidates = count;
    r
}

/// Every `v ∈ L` with `g(v) ≤ r`, including `0`.
pub fn enumerate_ball(l: &Lattice, g: &Gauge, r: &Q) -> Result<Vec<QVec>> {
    enumerate_ball_with(l, g, r, default_budget())
}

pub fn enumerate_ball_with(l: &Lattice, g: &Gauge, r: &Q, budget: u64) -> Result<Vec<QVec>> {
    if !r.is_positive() {
        return Err(Error::invalid("enumeration radius must be positive"));
    }
    let e = Enumerator::new(l, budget);
    let mut out = Vec::new();
    e.walk(None, g.euclid_sq_bound(&g.radius_value(r)), |_, v| {
        if g.within(v, r) {
            out.push(v.clone());
        }
        None
    })?;
    Ok(out)
}

/// Shortest nonzero vector under `g`.
pub fn svp_exact(l: &Lattice, g: &Gauge) -> Result<SolveReport> {
    svp_exact_with(l, g, default_budget())
}

pub fn svp_exact_with(l: &Lattice, g: &Gauge, budget: u64) -> Result<SolveReport> {
    if l.rank() == 0 {
        return Err(Error::NoCandidate("the lattice has no nonzero vectors".into()));
    }
    let e = Enumerator::new(l, budget);
    let init = e.basis().iter().map(|b| g.upper_bound(b)).min().expect("nonempty basis");
    let (value, ties) = e
        .search_min(None, g, &init, |v| !linalg::is_zero(v))?
        .ok_or_else(|| Error::Internal("no nonzero vector inside the basis bound".into()))?;
    Ok(report(l, value, ties))
}

/// Closest lattice vector to `t` in an `ℓ_p` norm.
pub fn cvp_exact(l: &Lattice, t: &[Q], p: LpNorm) -> Result<SolveReport> {
    cvp_exact_gauge(l, t, &Gauge::lp(l.dim(), p), default_budget())
}

/// Closest lattice vector to `t` under `g`; the reported norm is `g(w − t)`.
pub fn cvp_exact_gauge(l: &Lattice, t: &[Q], g: &Gauge, budget: u64) -> Result<SolveReport> {
    if t.len() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: t.len() });
    }
    let (value, ties) = Enumerator::new(l, budget).closest(t, g)?;
    Ok(report(l, value, ties))
}

/// Number of lattice vectors at minimal `ℓ_p` distance from `t`.
pub fn count_closest(l: &Lattice, t: &[Q], p: LpNorm) -> Result<usize> {
    count_closest_gauge(l, t, &Gauge::lp(l.dim(), p), default_budget())
}

pub fn count_closest_gauge(l: &Lattice, t: &[Q], g: &Gauge, budget: u64) -> Result<usize> {
    Ok(Enumerator::new(l, budget).closest(t, g)?.1.len())
}

/// Shortest vector of `L \ M` by enumeration.
pub fn sap_oracle(l: &Lattice, m: &Subspace, g: &Gauge, budget: u64) -> Result<SolveReport> {
    let e = Enumerator::new(l, budget);
    let init = l
        .basis()
        .iter()
        .chain(e.basis())
        .filter(|b| !m.contains(b))
        .map(|b| g.upper_bound(b))
        .min()
        .ok_or_else(|| Error::NoCandidate("the lattice lies inside the subspace".into()))?;
    let (value, ties) = e
        .search_min(None, g, &init, |v| !m.contains(v))?
        .ok_or_else(|| Error::Internal("no vector outside the subspace inside the basis bound".into()))?;
    Ok(report(l, value, ties))
}

/// Shortest vector of `L` outside the body `C`, given an upper bound on the
/// optimum. `None` if no lattice vector within `bound` leaves `C`.
pub fn cap_oracle(
    l: &Lattice,
    member: &dyn Fn(&[Q]) -> bool,
    g: &Gauge,
    bound: &Q,
    budget: u64,
) -> Result<Option<SolveReport>> {
    let e = Enumerator::new(l, budget);
    let found = e.search_min(None, g, bound, |v| !member(v))?;
    Ok(found.filter(|(v, _)| v.le_radius(bound)).map(|(v, ties)| report(l, v, ties)))
}

/// Successive minima with witnesses: the greedy independent prefix of all
/// vectors sorted by `(norm, input coefficients)`.
pub fn minima_oracle(l: &Lattice, g: &Gauge, budget: u64) -> Result<Vec<(QVec, GaugeValue)>> {
    let e = Enumerator::new(l, budget);
    let radius = e.basis().iter().map(|b| g.upper_bound(b)).max().unwrap_or_else(Q::one);
    let mut all: Vec<(GaugeValue, Vec<BigInt>, QVec)> = Vec::new();
    e.walk(None, g.euclid_sq_bound(&g.radius_value(&radius)), |_, v| {
        if !linalg::is_zero(v) && g.within(v, &radius) {
            let c = l.integer_coordinates(v).expect("enumerated vectors lie in the lattice");
            all.push((g.eval(v), c, v.clone()));
        }
        None
    })?;
    all.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| linalg::lex_cmp_int(&a.1, &b.1)));
    let mut chosen: Vec<QVec> = Vec::new();
    let mut out = Vec::new();
    for (val, _, v) in all {
        if out.len() == l.rank() {
            break;
        }
        chosen.push(v.clone());
        if linalg::rank(&chosen, l.dim()) == chosen.len() {
            out.push((v, val));
        } else {
            chosen.pop();
        }
    }
    Ok(out)
}
