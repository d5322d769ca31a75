//! Convex-body avoiding problem and the theta-series decision built on it.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::enumerate::{enumerate_ball_with, lex_least};
use crate::error::{Error, Result};
use crate::gauge::{Gauge, LpNorm, MembershipFn};
use crate::lattice::{intersect_subspace, Lattice, Subspace};
use crate::linalg::{self, vec_mat};
use crate::rational::{pow_q, q, qi, root_upper, Q, QVec};
use crate::report::SolveReport;
use crate::rng::SeedStream;
use crate::sap::{euclid_lambda_lower, geometric_scalings, sap_approx, search, check_common, SapConfig, SapInstance};

/// An O-symmetric convex body given by exact membership, optionally
/// confined to a proper subspace (its affine hull).
#[derive(Clone)]
pub struct ConvexBody {
    dim: usize,
    member: MembershipFn,
    affine_hull: Option<Subspace>,
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexBody").field("dim", &self.dim).field("affine_hull", &self.affine_hull).finish()
    }
}

impl ConvexBody {
    pub fn new(dim: usize, member: MembershipFn) -> Self {
        ConvexBody { dim, member, affine_hull: None }
    }

    pub fn with_affine_hull(mut self, m: Subspace) -> Result<Self> {
        if m.ambient() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: m.ambient() });
        }
        self.affine_hull = Some(m);
        Ok(self)
    }

    /// `{x : Σ|xᵢ|^p ≤ bound}` (or `max|xᵢ| ≤ bound` for `p = ∞`).
    pub fn lp_ball(dim: usize, p: LpNorm, radius: Q) -> Self {
        let bound = pow_q(&radius, p.exponent());
        ConvexBody::new(dim, Arc::new(move |x: &[Q]| p.pth(x) <= bound))
    }

    /// `{x : Σ|xᵢ|^p ≤ bound}` with the bound on the `p`-th power.
    pub fn lp_power_ball(dim: usize, p: u32, bound: Q) -> Self {
        let norm = LpNorm::Finite(p);
        ConvexBody::new(dim, Arc::new(move |x: &[Q]| norm.pth(x) <= bound))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_hull(&self) -> Option<&Subspace> {
        self.affine_hull.as_ref()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        (self.member)(x)
    }

    /// `member(x) ⟺ member(−x)` on every probe, and `0` is a member.
    pub fn symmetric_on(&self, probes: &[QVec]) -> bool {
        self.contains(&linalg::zeros(self.dim)) && probes.iter().all(|p| self.contains(p) == self.contains(&linalg::neg(p)))
    }
}

/// Smallest `m ≥ 1` with `m·b ∉ C`.
fn first_exit(body: &ConvexBody, b: &[Q]) -> Result<BigInt> {
    let outside = |m: &BigInt| !body.contains(&linalg::scale(b, &Q::from_integer(m.clone())));
    let mut hi = BigInt::one();
    while !outside(&hi) {
        hi <<= 1;
        if hi.bits() > 128 {
            return Err(Error::invalid("the convex body appears to be unbounded"));
        }
    }
    let mut lo = &hi >> 1;
    // invariant: lo inside (or zero), hi outside
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if outside(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn cap_full(l: &Lattice, body: &ConvexBody, g: &Gauge, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    check_common(l, g, cfg)?;
    let reduced = l.lll();
    let mut upper: Option<Q> = None;
    for b in l.basis().iter().chain(reduced.basis()) {
        let m = first_exit(body, b)?;
        let u = g.upper_bound(&linalg::scale(b, &Q::from_integer(m)));
        if upper.as_ref().is_none_or(|x| u < *x) {
            upper = Some(u);
        }
    }
    let upper = upper.ok_or_else(|| Error::invalid("empty basis"))?;
    let lower = euclid_lambda_lower(&reduced) / g.r_out();
    let sigmas = geometric_scalings(&upper, &lower);
    search(l, reduced, g, &Subspace::zero(l.dim()), Some(&body.member), &sigmas, false, stream, cfg)
}

/// `(1+ε)`-approximate shortest vector of `L` outside `C`. The output never
/// lies in `C`.
pub fn cap_approx(l: &Lattice, body: &ConvexBody, g: &Gauge, eps: &Q, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    if !eps.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if body.dim() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: body.dim() });
    }
    if !body.contains(&linalg::zeros(l.dim())) {
        return Err(Error::invalid("the convex body must contain the origin"));
    }
    let Some(m) = body.affine_hull() else {
        return cap_full(l, body, g, stream, cfg);
    };

    let outside = match sap_approx(&SapInstance::new(l.clone(), m.clone(), g.clone(), eps.clone())?, &stream.derive(0), cfg) {
        Ok(r) => Some(r),
        Err(Error::NoCandidate(_)) => None,
        Err(e) => return Err(e),
    };
    let sub = intersect_subspace(l, m)?;
    let inside = if sub.rank() == 0 {
        None
    } else {
        let k = sub.rank();
        let basis = sub.basis().to_vec();
        let pulled = Gauge::pullback(g, basis.clone())?;
        let member = body.member.clone();
        let dim = l.dim();
        let inner = ConvexBody::new(k, Arc::new(move |c: &[Q]| member(&vec_mat(c, &basis, dim))));
        match cap_full(&Lattice::identity(k), &inner, &pulled, &stream.derive(1), cfg) {
            Ok(r) => {
                let v = sub.vector(&r.coefficients);
                let coefficients = l.integer_coordinates(&v).expect("sublattice vectors lie in the lattice");
                Some(SolveReport { witness: v, coefficients, ..r })
            }
            Err(Error::NoCandidate(_)) => None,
            Err(e) => return Err(e),
        }
    };
    let best = match (outside, inside) {
        (Some(a), Some(b)) => {
            if b.norm < a.norm || (b.norm == a.norm && linalg::lex_cmp_int(&b.coefficients, &a.coefficients).is_lt()) {
                let mut b = b;
                b.stats.extend(a.stats);
                b.candidates += a.candidates;
                b
            } else {
                let mut a = a;
                a.stats.extend(b.stats);
                a.candidates += b.candidates;
                a
            }
        }
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::NoCandidate("every examined vector lies in the body".into())),
    };
    Ok(SolveReport { seed: stream.seed(), ..best })
}

/// Largest `ε = 2^-j` with `(1+ε)^p < 1 + 1/(2k)`.
pub fn theta_epsilon(k: u64, p: u32) -> Q {
    let limit = Q::one() + q(1, 2 * k as i64);
    let mut eps = Q::one();
    while pow_q(&(Q::one() + &eps), p) >= limit {
        eps /= qi(2);
    }
    eps
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaAnswer {
    pub yes: bool,
    pub epsilon: Q,
    pub report: SolveReport,
}

/// Decides whether an integral lattice has a vector with `‖v‖_p^p = k`.
pub fn theta_decide(l: &Lattice, k: u64, p: u32, stream: &SeedStream, cfg: &SapConfig) -> Result<ThetaAnswer> {
    if k == 0 || p == 0 {
        return Err(Error::invalid("k and p must be positive"));
    }
    if !l.is_integral() {
        return Err(Error::invalid("theta decisions need an integral lattice"));
    }
    let n = l.dim();
    let body = ConvexBody::lp_power_ball(n, p, qi(k as i64) - q(1, 2));
    let epsilon = theta_epsilon(k, p);
    let report = cap_approx(l, &body, &Gauge::lp(n, LpNorm::Finite(p)), &epsilon, stream, cfg)?;
    let yes = *report.norm.pth_power() == qi(k as i64);
    Ok(ThetaAnswer { yes, epsilon, report })
}

/// Brute-force theta decision: some `v` with `‖v‖_p^p = k`, if any.
pub fn theta_brute_force(l: &Lattice, k: u64, p: u32, budget: u64) -> Result<Option<QVec>> {
    let norm = LpNorm::Finite(p);
    let target = qi(k as i64);
    let r = root_upper(&target, p);
    let pts = enumerate_ball_with(l, &Gauge::lp(l.dim(), norm), &r, budget)?;
    let hits: Vec<QVec> = pts.into_iter().filter(|v| norm.pth(v) == target).collect();
    Ok((!hits.is_empty()).then(|| lex_least(l, hits).0))
}
