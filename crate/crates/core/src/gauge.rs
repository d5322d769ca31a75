//! Gauge functions: norm-like functions whose unit ball is a bounded
//! O-symmetric convex body sandwiched between two Euclidean balls.
//!
//! Four kinds are provided:
//! * `ℓ_p` norms for integer `p` and `p = ∞`, evaluated exactly (finite `p`
//!   is reported through the rational `p`-th power),
//! * the double-cone body `conv(B₂(0,1) ∪ {y, −y})` for `y ∈ {±1}ⁿ`,
//! * arbitrary membership oracles for the unit ball,
//! * pullbacks `c ↦ f(c·A)` of another gauge through an injective linear map.
//!
//! Cone and oracle gauges are evaluated by bisection on the scaling factor
//! against an exact membership predicate; their values carry a relative
//! error of at most the gauge tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2_sq, vec_mat};
use crate::rational::{
    floor_int, format_rational, pow_q, q, qi, root_bounds, root_lower, root_upper, to_f64, Q, QVec,
    DYADIC_BITS,
};

/// An `ℓ_p` norm with integer `p ≥ 1` or `p = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpNorm {
    Finite(u32),
    Infinity,
}

impl LpNorm {
    pub const L1: LpNorm = LpNorm::Finite(1);
    pub const L2: LpNorm = LpNorm::Finite(2);

    /// Parses `l1`, `l2`, `linf` or `lp:<int>`.
    pub fn parse(s: &str) -> Result<Self> {
        let norm = match s.trim() {
            "l1" => LpNorm::Finite(1),
            "l2" => LpNorm::Finite(2),
            "linf" => LpNorm::Infinity,
            other => {
                let p = other
                    .strip_prefix("lp:")
                    .and_then(|p| p.parse::<u32>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown norm tag {other:?}")))?;
                LpNorm::Finite(p)
            }
        };
        if norm == LpNorm::Finite(0) {
            return Err(Error::invalid("p must be at least 1"));
        }
        Ok(norm)
    }

    pub fn tag(&self) -> String {
        match self {
            LpNorm::Finite(1) => "l1".into(),
            LpNorm::Finite(2) => "l2".into(),
            LpNorm::Finite(p) => format!("lp:{p}"),
            LpNorm::Infinity => "linf".into(),
        }
    }

    /// Exponent under which values are compared (1 for `ℓ∞`).
    pub fn exponent(&self) -> u32 {
        match self {
            LpNorm::Finite(p) => *p,
            LpNorm::Infinity => 1,
        }
    }

    /// `Σ|xᵢ|^p`, or `max|xᵢ|` for `p = ∞`.
    pub fn pth(&self, x: &[Q]) -> Q {
        match self {
            LpNorm::Finite(1) => x.iter().map(|v| v.abs()).sum(),
            LpNorm::Finite(2) => norm2_sq(x),
            LpNorm::Finite(p) => x.iter().map(|v| pow_q(&v.abs(), *p)).sum(),
            LpNorm::Infinity => linalg::max_abs(x),
        }
    }

    pub fn value(&self, x: &[Q]) -> GaugeValue {
        GaugeValue { power: self.exponent(), pth: self.pth(x) }
    }
}

impl fmt::Display for LpNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

pub fn lp_eval(p: LpNorm, x: &[Q]) -> GaugeValue {
    p.value(x)
}

/// A gauge value `pth^(1/power)`, kept as an exact rational power so that
/// irrational norms compare exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaugeValue {
    power: u32,
    pth: Q,
}

impl GaugeValue {
    pub fn exact(value: Q) -> Self {
        GaugeValue { power: 1, pth: value }
    }

    pub fn from_pth(power: u32, pth: Q) -> Self {
        GaugeValue { power, pth }
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn pth_power(&self) -> &Q {
        &self.pth
    }

    /// The value itself when it is rational.
    pub fn rational(&self) -> Option<Q> {
        let (lo, hi) = root_bounds(&self.pth, self.power, 64);
        (lo == hi).then_some(lo)
    }

    pub fn upper(&self) -> Q {
        root_upper(&self.pth, self.power)
    }

    pub fn lower(&self) -> Q {
        root_lower(&self.pth, self.power)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.pth).powf(1.0 / self.power as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.pth.is_zero()
    }

    /// `self ≤ r`.
    pub fn le_radius(&self, r: &Q) -> bool {
        self.pth <= pow_q(r, self.power)
    }

    /// `self ≤ factor · other`, exactly.
    pub fn le_scaled(&self, other: &GaugeValue, factor: &Q) -> bool {
        debug_assert_eq!(self.power, other.power);
        self.pth <= pow_q(factor, self.power) * &other.pth
    }
}

impl PartialOrd for GaugeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GaugeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.power, other.power, "comparing values of different gauges");
        self.pth.cmp(&other.pth)
    }
}

impl fmt::Display for GaugeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.power == 1 {
            f.write_str(&format_rational(&self.pth))
        } else {
            write!(f, "({})^(1/{})", format_rational(&self.pth), self.power)
        }
    }
}

pub type MembershipFn = Arc<dyn Fn(&[Q]) -> bool + Send + Sync>;

#[derive(Clone)]
enum Body {
    Lp(LpNorm),
    Cone(Vec<i64>),
    Oracle(MembershipFn),
    Pullback { inner: Arc<Gauge>, map: Vec<QVec> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaugeKind {
    Lp(LpNorm),
    Cone(Vec<i64>),
    Oracle,
    Pullback,
}

#[derive(Clone)]
pub struct Gauge {
    dim: usize,
    body: Body,
    r_in: Q,
    r_out: Q,
    tolerance: Q,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gauge")
            .field("dim", &self.dim)
            .field("kind", &self.kind())
            .field("r_in", &format_rational(&self.r_in))
            .field("r_out", &format_rational(&self.r_out))
            .finish()
    }
}

fn default_tolerance() -> Q {
    Q::new(BigInt::one(), BigInt::one() << 40)
}

impl Gauge {
    pub fn lp(dim: usize, norm: LpNorm) -> Gauge {
        assert!(dim >= 1);
        let n = qi(dim as i64);
        // B₂(0, r_in) ⊆ B_p(0, 1) ⊆ B₂(0, r_out), with rational witnesses.
        let (r_in, r_out) = match norm {
            LpNorm::Finite(1) => (Q::one() / root_upper(&n, 2), Q::one()),
            LpNorm::Finite(2) => (Q::one(), Q::one()),
            LpNorm::Finite(p) => {
                // n^(1/2 − 1/p) = (n^(p−2))^(1/(2p))
                (Q::one(), root_upper(&pow_q(&n, p - 2), 2 * p))
            }
            LpNorm::Infinity => (Q::one(), root_upper(&n, 2)),
        };
        Gauge { dim, body: Body::Lp(norm), r_in, r_out, tolerance: default_tolerance() }
    }

    /// Gauge of `conv(B₂(0,1) ∪ {y, −y})`: the unit ball plus the two
    /// right-circular cones with apexes `±y` tangent to the sphere.
    pub fn cone(y: &[i64]) -> Result<Gauge> {
        if y.is_empty() {
            return Err(Error::invalid("cone apex must be nonempty"));
        }
        if let Some(bad) = y.iter().find(|v| v.abs() != 1) {
            return Err(Error::invalid(format!("cone apex coordinate {bad} is not ±1")));
        }
        let n = qi(y.len() as i64);
        Ok(Gauge {
            dim: y.len(),
            body: Body::Cone(y.to_vec()),
            r_in: Q::one(),
            r_out: root_upper(&n, 2),
            tolerance: default_tolerance(),
        })
    }

    /// Gauge from a membership predicate for its unit ball. The caller
    /// guarantees `B₂(0, r_in) ⊆ body ⊆ B₂(0, r_out)`, convexity and symmetry.
    pub fn oracle(dim: usize, unit_member: MembershipFn, r_in: Q, r_out: Q) -> Result<Gauge> {
        if !(r_in.is_positive() && r_in <= r_out) {
            return Err(Error::invalid("need 0 < r_in <= r_out"));
        }
        Ok(Gauge { dim, body: Body::Oracle(unit_member), r_in, r_out, tolerance: default_tolerance() })
    }

    /// `g(c) = inner(c · map)` for a map with independent rows.
    pub fn pullback(inner: &Gauge, map: Vec<QVec>) -> Result<Gauge> {
        let k = map.len();
        if k == 0 {
            return Err(Error::invalid("pullback map must have at least one row"));
        }
        if let Some(bad) = map.iter().find(|r| r.len() != inner.dim) {
            return Err(Error::Dimension { expected: inner.dim, got: bad.len() });
        }
        let gram: Vec<QVec> = map.iter().map(|a| map.iter().map(|b| dot(a, b)).collect()).collect();
        let gram_inv = linalg::inverse(&gram).ok_or_else(|| Error::invalid("pullback map is not injective"))?;
        // Right inverse R = mapᵀ (map mapᵀ)⁻¹, so that c = (c·map)·R.
        let right: Vec<QVec> = (0..inner.dim)
            .map(|j| {
                let col: QVec = map.iter().map(|r| r[j].clone()).collect();
                vec_mat(&col, &gram_inv, k)
            })
            .collect();
        let frob = |m: &[QVec]| root_upper(&m.iter().map(|r| norm2_sq(r)).sum::<Q>(), 2);
        let r_in = &inner.r_in / frob(&map);
        let r_out = &inner.r_out * frob(&right);
        Ok(Gauge {
            dim: k,
            body: Body::Pullback { inner: Arc::new(inner.clone()), map },
            r_in,
            r_out,
            tolerance: inner.tolerance.clone(),
        })
    }

    pub fn with_tolerance(mut self, tol: Q) -> Gauge {
        assert!(tol.is_positive());
        self.tolerance = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GaugeKind {
        match &self.body {
            Body::Lp(p) => GaugeKind::Lp(*p),
            Body::Cone(y) => GaugeKind::Cone(y.clone()),
            Body::Oracle(_) => GaugeKind::Oracle,
            Body::Pullback { .. } => GaugeKind::Pullback,
        }
    }

    pub fn lp_norm(&self) -> Option<LpNorm> {
        match &self.body {
            Body::Lp(p) => Some(*p),
            _ => None,
        }
    }

    pub fn r_in(&self) -> &Q {
        &self.r_in
    }

    pub fn r_out(&self) -> &Q {
        &self.r_out
    }

    pub fn tolerance(&self) -> &Q {
        &self.tolerance
    }

    /// Whether `eval` is exact (no bisection involved).
    pub fn is_exact(&self) -> bool {
        match &self.body {
            Body::Lp(_) => true,
            Body::Pullback { inner, .. } => inner.is_exact(),
            _ => false,
        }
    }

    /// Exponent of the values returned by [`Gauge::eval`].
    pub fn exponent(&self) -> u32 {
        match &self.body {
            Body::Lp(p) => p.exponent(),
            Body::Pullback { inner, .. } => inner.exponent(),
            _ => 1,
        }
    }

    /// The value `r` expressed in this gauge's comparison exponent.
    pub fn radius_value(&self, r: &Q) -> GaugeValue {
        GaugeValue::from_pth(self.exponent(), pow_q(r, self.exponent()))
    }

    fn check_dim(&self, x: &[Q]) {
        assert_eq!(x.len(), self.dim, "gauge of dimension {} applied to a {}-vector", self.dim, x.len());
    }

    pub fn eval(&self, x: &[Q]) -> GaugeValue {
        self.check_dim(x);
        match &self.body {
            Body::Lp(p) => p.value(x),
            Body::Pullback { inner, map } => inner.eval(&vec_mat(x, map, inner.dim)),
            _ => GaugeValue::exact(self.bisect(x).1),
        }
    }

    /// Rational bracket `lo ≤ f(x) ≤ hi`.
    pub fn bracket(&self, x: &[Q]) -> (Q, Q) {
        match &self.body {
            Body::Lp(_) | Body::Pullback { .. } if self.is_exact() => {
                let v = self.eval(x);
                (v.lower(), v.upper())
            }
            Body::Pullback { inner, map } => inner.bracket(&vec_mat(x, map, inner.dim)),
            _ => self.bisect(x),
        }
    }

    pub fn upper_bound(&self, x: &[Q]) -> Q {
        self.bracket(x).1
    }

    pub fn lower_bound(&self, x: &[Q]) -> Q {
        self.bracket(x).0
    }

    /// Exact test of `f(x) ≤ r`.
    pub fn within(&self, x: &[Q], r: &Q) -> bool {
        self.check_dim(x);
        if r.is_negative() {
            return false;
        }
        if r.is_zero() {
            return linalg::is_zero(x);
        }
        match &self.body {
            Body::Lp(p) => match p {
                LpNorm::Infinity => x.iter().all(|v| v.abs() <= *r),
                LpNorm::Finite(e) => p.pth(x) <= pow_q(r, *e),
            },
            Body::Cone(y) => cone_contains(y, x, r),
            Body::Oracle(f) => f(&linalg::scale(x, &r.recip())),
            Body::Pullback { inner, map } => inner.within(&vec_mat(x, map, inner.dim), r),
        }
    }

    pub fn member(&self, x: &[Q], r: &Q) -> bool {
        self.within(x, r)
    }

    fn bisect(&self, x: &[Q]) -> (Q, Q) {
        let e2 = norm2_sq(x);
        if e2.is_zero() {
            return (Q::zero(), Q::zero());
        }
        let mut lo = root_lower(&e2, 2) / &self.r_out;
        let mut hi = root_upper(&e2, 2) / &self.r_in;
        while !self.within(x, &hi) {
            hi *= qi(2);
        }
        while &hi - &lo > &self.tolerance * &hi {
            let mid = (&lo + &hi) / qi(2);
            // Keep denominators dyadic relative to the starting bracket.
            let mid = round_dyadic(&mid, &hi, &self.tolerance);
            if self.within(x, &mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    /// `‖x‖₂² ≤ bound` for every `x` with `f(x) ≤ v`.
    pub fn euclid_sq_bound(&self, v: &GaugeValue) -> Q {
        match &self.body {
            Body::Lp(LpNorm::Finite(1)) => pow_q(v.pth_power(), 2),
            Body::Lp(LpNorm::Finite(2)) => v.pth_power().clone(),
            Body::Lp(LpNorm::Infinity) => qi(self.dim as i64) * pow_q(v.pth_power(), 2),
            _ => pow_q(&(v.upper() * &self.r_out), 2),
        }
    }

    /// Membership test for integer vectors `d` read as `d / den`, against
    /// the ball of radius `radius`.
    pub(crate) fn fixed_ball(&self, radius: &Q, den: &BigInt) -> FixedBall<'_> {
        FixedBall::new(self, radius * Q::from_integer(den.clone()))
    }

    /// Draws a point of `B_f(0, r)` as integer numerators over `2^40`.
    pub(crate) fn sample_fixed<R: Rng + ?Sized>(&self, r: &Q, rng: &mut R, max_attempts: u64) -> Result<Vec<i128>> {
        if !r.is_positive() {
            return Err(Error::invalid("sampling radius must be positive"));
        }
        let den = BigInt::one() << DYADIC_BITS;
        let ball = self.fixed_ball(r, &den);
        let scale = (1u64 << DYADIC_BITS) as f64;
        let rf = to_f64(r);
        let n = self.dim;
        if let Body::Lp(LpNorm::Infinity) = self.body {
            let bound = floor_int(&(r * Q::from_integer(den.clone())))
                .to_i128()
                .ok_or_else(|| Error::invalid("sampling radius too large"))?;
            return Ok((0..n).map(|_| rng.random_range(-bound..=bound)).collect());
        }
        for _ in 0..max_attempts {
            let point: Vec<f64> = match self.body {
                Body::Lp(LpNorm::Finite(p)) => {
                    // Uniform in the ℓ_p ball: generalized-Gaussian coordinates
                    // normalized with an extra exponential variable.
                    let pf = p as f64;
                    let gamma = Gamma::new(1.0 / pf, 1.0).expect("valid gamma shape");
                    let xs: Vec<f64> = (0..n)
                        .map(|_| {
                            let g: f64 = gamma.sample(rng);
                            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                            s * g.powf(1.0 / pf)
                        })
                        .collect();
                    let z: f64 = Exp1.sample(rng);
                    let denom = (xs.iter().map(|x| x.abs().powf(pf)).sum::<f64>() + z).powf(1.0 / pf);
                    xs.iter().map(|x| rf * x / denom).collect()
                }
                _ => {
                    let outer = rf * to_f64(&self.r_out);
                    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                    let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let u: f64 = rng.random::<f64>().powf(1.0 / n as f64);
                    g.iter().map(|x| outer * u * x / len).collect()
                }
            };
            let fixed: Vec<i128> = point.iter().map(|x| (x * scale).round() as i128).collect();
            if ball.contains(&fixed) {
                return Ok(fixed);
            }
        }
        Err(Error::SamplingBudget { attempts: max_attempts })
    }
}

fn round_dyadic(mid: &Q, scale: &Q, tol: &Q) -> Q {
    // Snap the midpoint to a dyadic grid finer than the tolerance.
    let step = scale * tol / qi(8);
    let bits = step.recip().to_integer().bits() as usize + 1;
    let den = BigInt::one() << bits;
    Q::new(floor_int(&(mid * Q::from_integer(den.clone()))), den)
}

/// `x ∈ ρ·C` for the double-cone body with apex `y`.
fn cone_contains(y: &[i64], x: &[Q], rho: &Q) -> bool {
    let n = y.len() as i64;
    let m2 = norm2_sq(x);
    let rho2 = rho * rho;
    if m2 <= rho2 {
        return true;
    }
    if n < 2 {
        return false;
    }
    let t: Q = y.iter().zip(x).map(|(&yi, xi)| xi * qi(yi)).sum::<Q>().abs();
    let nq = qi(n);
    if t < *rho || t > &nq * rho {
        return false;
    }
    let lhs = &nq * qi(n - 1) * &m2 - qi(n - 1) * &t * &t;
    let gap = &nq * rho - &t;
    lhs <= &gap * &gap
}

/// Precomputed exact membership test on integer vectors.
pub(crate) struct FixedBall<'g> {
    gauge: &'g Gauge,
    rho: Q,
    mode: FixedMode,
}

enum FixedMode {
    Sum { bound: i128 },
    Max { bound: i128 },
    Power { p: u32, threshold: f64, num_p: BigInt, den_p: BigInt },
    Cone { y: Vec<i64>, rho: f64 },
    Slow,
}

const FILTER_MARGIN: f64 = 1e-9;

impl<'g> FixedBall<'g> {
    fn new(gauge: &'g Gauge, rho: Q) -> Self {
        let clamp = |v: BigInt| v.to_i128().unwrap_or(if v.is_negative() { -1 } else { i128::MAX });
        let mode = match &gauge.body {
            _ if rho.is_negative() => FixedMode::Max { bound: -1 },
            Body::Lp(LpNorm::Finite(1)) => FixedMode::Sum { bound: clamp(floor_int(&rho)) },
            Body::Lp(LpNorm::Infinity) => FixedMode::Max { bound: clamp(floor_int(&rho)) },
            Body::Lp(LpNorm::Finite(p)) => FixedMode::Power {
                p: *p,
                threshold: to_f64(&rho).powi(*p as i32),
                num_p: num_traits::pow(rho.numer().clone(), *p as usize),
                den_p: num_traits::pow(rho.denom().clone(), *p as usize),
            },
            Body::Cone(y) => FixedMode::Cone { y: y.clone(), rho: to_f64(&rho) },
            _ => FixedMode::Slow,
        };
        FixedBall { gauge, rho, mode }
    }

    pub(crate) fn contains(&self, d: &[i128]) -> bool {
        self.contains_with(d.len(), |i| d[i])
    }

    /// Tests `a − b`.
    pub(crate) fn contains_diff(&self, a: &[i128], b: &[i128]) -> bool {
        self.contains_with(a.len(), |i| a[i] - b[i])
    }

    fn exact(&self, d: &[i128]) -> bool {
        let x: QVec = d.iter().map(|&v| Q::from_integer(BigInt::from(v))).collect();
        self.gauge.within(&x, &self.rho)
    }

    fn contains_with(&self, n: usize, at: impl Fn(usize) -> i128) -> bool {
        match &self.mode {
            FixedMode::Sum { bound } => {
                let mut s: i128 = 0;
                for i in 0..n {
                    s = s.saturating_add(at(i).abs());
                    if s > *bound {
                        return false;
                    }
                }
                true
            }
            FixedMode::Max { bound } => (0..n).all(|i| at(i).abs() <= *bound),
            FixedMode::Power { p, threshold, num_p, den_p } => {
                let mut s = 0.0f64;
                for i in 0..n {
                    s += (at(i) as f64).abs().powi(*p as i32);
                }
                if s < threshold * (1.0 - FILTER_MARGIN) {
                    return true;
                }
                if s > threshold * (1.0 + FILTER_MARGIN) {
                    return false;
                }
                let exact: BigInt = (0..n).map(|i| num_traits::pow(BigInt::from(at(i)).abs(), *p as usize)).sum();
                exact * den_p <= *num_p
            }
            FixedMode::Cone { y, rho } => {
                let nf = n as f64;
                let mut m2 = 0.0f64;
                let mut t = 0.0f64;
                for i in 0..n {
                    let v = at(i) as f64;
                    m2 += v * v;
                    t += v * y[i] as f64;
                }
                let t = t.abs();
                let rho2 = rho * rho;
                let sure = |lhs: f64, rhs: f64| lhs < rhs - FILTER_MARGIN * (lhs.abs() + rhs.abs());
                let never = |lhs: f64, rhs: f64| lhs > rhs + FILTER_MARGIN * (lhs.abs() + rhs.abs());
                if sure(m2, rho2) {
                    return true;
                }
                let in_ball_excluded = never(m2, rho2);
                let cone_lhs = nf * (nf - 1.0) * m2 - (nf - 1.0) * t * t;
                let gap = nf * rho - t;
                let cone_excluded = n < 2
                    || never(*rho, t)
                    || never(t, nf * rho)
                    || never(cone_lhs, gap * gap);
                if in_ball_excluded && cone_excluded {
                    return false;
                }
                if n >= 2 && sure(*rho, t) && sure(t, nf * rho) && sure(cone_lhs, gap * gap) {
                    return true;
                }
                let d: Vec<i128> = (0..n).map(&at).collect();
                self.exact(&d)
            }
            FixedMode::Slow => {
                let d: Vec<i128> = (0..n).map(&at).collect();
                self.exact(&d)
            }
        }
    }
}

/// Draws an (approximately) uniform point of `B_f(0, r)` with dyadic
/// coordinates of denominator `2^40`.
pub fn sample_ball<R: Rng + ?Sized>(g: &Gauge, r: &Q, rng: &mut R) -> Result<QVec> {
    sample_ball_with_budget(g, r, rng, 1_000_000)
}

pub fn sample_ball_with_budget<R: Rng + ?Sized>(g: &Gauge, r: &Q, rng: &mut R, max_attempts: u64) -> Result<QVec> {
    let den = BigInt::one() << DYADIC_BITS;
    let fixed = g.sample_fixed(r, rng, max_attempts)?;
    Ok(fixed.into_iter().map(|v| Q::new(BigInt::from(v), den.clone())).collect())
}

/// Outcome of [`check_gauge_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub trials: usize,
    pub passed: bool,
    pub counterexample: Option<String>,
}

/// Randomized check of positivity, absolute homogeneity and the triangle
/// inequality. Exact for `ℓ_p` gauges; within relative `tolerance` otherwise.
pub fn check_gauge_axioms<R: Rng + ?Sized>(g: &Gauge, trials: usize, rng: &mut R, tolerance: &Q) -> AxiomReport {
    let n = g.dim();
    let point = |rng: &mut R| -> QVec { (0..n).map(|_| q(rng.random_range(-48..=48), 16)).collect() };
    let fail = |msg: String| AxiomReport { trials, passed: false, counterexample: Some(msg) };
    let show = |v: &[Q]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");

    if !g.eval(&vec![Q::zero(); n]).is_zero() {
        return fail("f(0) != 0".into());
    }
    for _ in 0..trials {
        let x = point(rng);
        let y = point(rng);
        let lambda = q(rng.random_range(-32..=32), 8);
        let fx = g.eval(&x);
        let fy = g.eval(&y);
        if !linalg::is_zero(&x) && fx.is_zero() {
            return fail(format!("positivity fails at x = [{}]", show(&x)));
        }
        let lx = linalg::scale(&x, &lambda);
        let flx = g.eval(&lx);
        let homogeneous = if g.is_exact() {
            *flx.pth_power() == pow_q(&lambda.abs(), flx.power()) * fx.pth_power()
        } else {
            let expect = lambda.abs() * fx.pth_power();
            let got = flx.pth_power().clone();
            let scale = if expect > got { expect.clone() } else { got.clone() };
            (got - expect).abs() <= tolerance * scale
        };
        if !homogeneous {
            return fail(format!("homogeneity fails at x = [{}], lambda = {}", show(&x), format_rational(&lambda)));
        }
        let sum = linalg::add(&x, &y);
        let fs = g.eval(&sum);
        let triangle = if g.is_exact() {
            exact_triangle(&fs, &fx, &fy, &x, &y)
        } else {
            let rhs = fx.pth_power() + fy.pth_power();
            *fs.pth_power() <= &rhs * (Q::one() + tolerance)
        };
        if !triangle {
            return fail(format!("triangle inequality fails at x = [{}], y = [{}]", show(&x), show(&y)));
        }
    }
    AxiomReport { trials, passed: true, counterexample: None }
}

/// Decides `a^(1/p) ≤ b^(1/p) + c^(1/p)` exactly.
fn exact_triangle(a: &GaugeValue, b: &GaugeValue, c: &GaugeValue, x: &[Q], y: &[Q]) -> bool {
    let p = a.power();
    let (a, b, c) = (a.pth_power(), b.pth_power(), c.pth_power());
    match p {
        1 => a <= &(b + c),
        2 => {
            let d = a - b - c;
            !d.is_positive() || &d * &d <= qi(4) * b * c
        }
        _ => {
            let mut bits = 32;
            while bits <= 1024 {
                let (alo, ahi) = root_bounds(a, p, bits);
                let (blo, bhi) = root_bounds(b, p, bits);
                let (clo, chi) = root_bounds(c, p, bits);
                if ahi <= &blo + &clo {
                    return true;
                }
                if alo > &bhi + &chi {
                    return false;
                }
                bits *= 2;
            }
            // Equality in Minkowski's inequality needs positively collinear inputs.
            positively_collinear(x, y)
        }
    }
}

fn positively_collinear(x: &[Q], y: &[Q]) -> bool {
    if linalg::is_zero(x) || linalg::is_zero(y) {
        return true;
    }
    let i = x.iter().position(|v| !v.is_zero()).expect("nonzero");
    let ratio = &y[i] / &x[i];
    ratio.is_positive() && x.iter().zip(y).all(|(a, b)| a * &ratio == *b)
}

/// Integer `p`-th power test used by exact-norm decision procedures.
pub fn is_perfect_power(x: &BigInt, p: u32) -> bool {
    if x.is_negative() {
        return false;
    }
    let r = x.nth_root(p);
    num_traits::pow(r, p as usize) == *x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;
    use crate::rng::SeedStream;

    #[test]
    fn lp_examples() {
        let v = qvec(&[3, 4]);
        assert_eq!(lp_eval(LpNorm::L2, &v).rational(), Some(qi(5)));
        assert_eq!(lp_eval(LpNorm::L1, &v).rational(), Some(qi(7)));
        assert_eq!(lp_eval(LpNorm::Infinity, &qvec(&[3, -4])).rational(), Some(qi(4)));
        assert_eq!(LpNorm::parse("lp:3").unwrap(), LpNorm::Finite(3));
        assert!(LpNorm::parse("lp:0").is_err());
        assert!(LpNorm::parse("l7").is_err());
    }

    #[test]
    fn cone_fixtures() {
        let y = [1, -1, 1];
        let g = Gauge::cone(&y).unwrap();
        let tol = q(1, 1 << 20);
        let close = |v: Q, want: Q| (v - &want).abs() <= &tol * want;
        assert!(close(g.eval(&qvec(&y)).pth_power().clone(), qi(1)));
        for i in 0..3 {
            let mut e = qvec(&[0, 0, 0]);
            e[i] = qi(1);
            assert!(close(g.eval(&e).pth_power().clone(), qi(1)));
        }
        assert!(close(g.eval(&qvec(&[2, -2, 2])).pth_power().clone(), qi(2)));
        assert!(Gauge::cone(&[1, 0]).is_err());
    }

    #[test]
    fn cone_excludes_off_axis_corners() {
        let g = Gauge::cone(&[1, 1]).unwrap();
        // (1, -1) is a lattice point of norm √2 in the other quadrant pair.
        assert!(!g.within(&qvec(&[1, -1]), &qi(1)));
        assert!(g.within(&qvec(&[1, 1]), &qi(1)));
    }

    #[test]
    fn fixed_ball_matches_exact_membership() {
        let mut rng = SeedStream::new(3).rng();
        let gauges = [
            Gauge::lp(3, LpNorm::L1),
            Gauge::lp(3, LpNorm::L2),
            Gauge::lp(3, LpNorm::Finite(3)),
            Gauge::lp(3, LpNorm::Infinity),
            Gauge::cone(&[1, 1, -1]).unwrap(),
        ];
        let den = BigInt::from(16);
        for g in &gauges {
            let r = q(7, 3);
            let ball = g.fixed_ball(&r, &den);
            for _ in 0..2000 {
                let d: Vec<i128> = (0..3).map(|_| rng.random_range(-60..=60)).collect();
                let x: QVec = d.iter().map(|&v| Q::new(BigInt::from(v), den.clone())).collect();
                assert_eq!(ball.contains(&d), g.within(&x, &r), "{g:?} at {d:?}");
            }
        }
    }

    #[test]
    fn sampled_points_are_members() {
        let mut rng = SeedStream::new(11).rng();
        for g in [Gauge::lp(4, LpNorm::L1), Gauge::lp(4, LpNorm::Infinity), Gauge::cone(&[1, 1, 1, 1]).unwrap()] {
            for _ in 0..200 {
                let x = sample_ball(&g, &q(3, 2), &mut rng).unwrap();
                assert!(g.within(&x, &q(3, 2)));
                assert!(x.iter().all(|v| v.denom() <= &(BigInt::one() << DYADIC_BITS)));
            }
        }
    }

    #[test]
    fn l2_sample_symmetry() {
        let mut rng = SeedStream::new(5).rng();
        let g = Gauge::lp(2, LpNorm::L2);
        let pts: Vec<QVec> = (0..10_000).map(|_| sample_ball(&g, &qi(2), &mut rng).unwrap()).collect();
        for j in 0..2 {
            let mean = pts.iter().map(|p| to_f64(&p[j])).sum::<f64>() / pts.len() as f64;
            assert!(mean.abs() < 0.1, "coordinate {j} mean {mean}");
        }
        let pos = pts.iter().filter(|p| p[0].is_positive()).count() as f64 / pts.len() as f64;
        assert!((0.47..=0.53).contains(&pos), "positive fraction {pos}");
    }

    #[test]
    fn axioms_hold() {
        let mut rng = SeedStream::new(1).rng();
        let tol = q(1, 1 << 20);
        for g in [Gauge::lp(3, LpNorm::L1), Gauge::lp(3, LpNorm::L2), Gauge::lp(3, LpNorm::Finite(3)), Gauge::lp(3, LpNorm::Infinity)] {
            let rep = check_gauge_axioms(&g, 2000, &mut rng, &tol);
            assert!(rep.passed, "{g:?}: {:?}", rep.counterexample);
        }
        let cone = Gauge::cone(&[1, -1, 1]).unwrap();
        let rep = check_gauge_axioms(&cone, 200, &mut rng, &tol);
        assert!(rep.passed, "{:?}", rep.counterexample);
    }

    #[test]
    fn axioms_catch_a_non_gauge() {
        // Unit "ball" that is not convex: the ℓ_{1/2}-like cross.
        let cross: MembershipFn = Arc::new(|x: &[Q]| {
            let a = x[0].abs();
            let b = x[1].abs();
            (a <= qi(1) && b <= q(1, 16)) || (b <= qi(1) && a <= q(1, 16))
        });
        let g = Gauge::oracle(2, cross, q(1, 16), qi(2)).unwrap();
        let mut rng = SeedStream::new(2).rng();
        assert!(!check_gauge_axioms(&g, 500, &mut rng, &q(1, 1 << 20)).passed);
    }

    #[test]
    fn sandwich_radii() {
        let mut rng = SeedStream::new(9).rng();
        let tau = q(1, 1 << 20);
        for g in [Gauge::lp(3, LpNorm::L1), Gauge::lp(3, LpNorm::Infinity), Gauge::lp(3, LpNorm::Finite(4)), Gauge::cone(&[1, 1, -1]).unwrap()] {
            for _ in 0..200 {
                let u: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
                let len = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                // Rational direction scaled to Euclidean length ≤ 1 (inner) or ≥ 1 (outer).
                let dir: QVec = u.iter().map(|x| crate::rational::dyadic_from_f64(x / len, 30)).collect();
                let l2 = norm2_sq(&dir);
                let inner = linalg::scale(&dir, &(g.r_in() / root_upper(&l2, 2)));
                assert!(g.within(&inner, &qi(1)));
                let outer = linalg::scale(&dir, &((g.r_out() + &tau) / root_lower(&l2, 2)));
                assert!(!g.within(&outer, &qi(1)));
            }
        }
    }

    #[test]
    fn pullback_of_l2() {
        let g = Gauge::lp(2, LpNorm::L2);
        let pb = Gauge::pullback(&g, vec![qvec(&[2, 0]), qvec(&[1, 1])]).unwrap();
        assert_eq!(*pb.eval(&qvec(&[1, 0])).pth_power(), qi(4));
        assert_eq!(*pb.eval(&qvec(&[-1, 2])).pth_power(), qi(4));
        assert!(pb.r_in() <= pb.r_out());
    }
}
