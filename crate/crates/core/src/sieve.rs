//! Greedy sieving and the AKS pair-sampling pipeline.
//!
//! Points live in a fixed-point frame: integer numerators over a common
//! denominator `q · 2^40`, where `q` clears the basis denominators. Pairs are
//! tracked as the sampled point `x`, the partner `z`, and the integer
//! coefficients of `z − x` in the lattice basis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::gauge::{FixedBall, Gauge};
use crate::lattice::Lattice;
use crate::linalg;
use crate::par;
use crate::rational::{ceil_int, common_denominator, qi, Q, QVec, DYADIC_BITS};
use crate::rng::SeedStream;

/// Sampled point `x` with partner `z`; `z − x = shift · B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SievePair {
    pub x: QVec,
    pub z: QVec,
    pub shift: Vec<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SieveStats {
    pub samples: usize,
    pub rounds: usize,
    pub survivors_per_round: Vec<usize>,
    pub representatives_per_round: Vec<usize>,
}

/// Representatives of one sieve round and the representative chosen for
/// every other point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveRound {
    pub representatives: Vec<usize>,
    pub map: Vec<Option<usize>>,
}

const CHUNK: usize = 512;

/// First-fit cover: point `i` joins the first earlier representative `j`
/// with `close(i, j)`, otherwise becomes a representative itself.
fn greedy_cover<F>(n: usize, close: F) -> SieveRound
where
    F: Fn(usize, usize) -> bool + Sync + Send,
{
    let mut reps: Vec<usize> = Vec::new();
    let mut map = vec![None; n];
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let known = reps.len();
        let found = {
            let old = &reps[..known];
            par::map_range(end - start, |o| old.iter().copied().find(|&j| close(start + o, j)))
        };
        for (o, hit) in found.into_iter().enumerate() {
            let i = start + o;
            match hit.or_else(|| reps[known..].iter().copied().find(|&j| close(i, j))) {
                Some(j) => map[i] = Some(j),
                None => reps.push(i),
            }
        }
        start = end;
    }
    SieveRound { representatives: reps, map }
}

/// Converts rational points to numerators over their common denominator
/// when everything fits in 128 bits.
fn to_fixed(points: &[QVec]) -> Option<(BigInt, Vec<Vec<i128>>)> {
    let den = common_denominator(points.iter().flatten());
    den.to_i128()?;
    let fixed = points
        .iter()
        .map(|p| p.iter().map(|v| (v.numer() * (&den / v.denom())).to_i128()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    Some((den, fixed))
}

/// One greedy sieve round at radius `r`: representatives are pairwise more
/// than `r/2` apart and every other point lies within `r/2` of its
/// representative.
pub fn sieve_round(points: &[QVec], r: &Q, g: &Gauge) -> Result<SieveRound> {
    if let Some(bad) = points.iter().position(|p| p.len() != g.dim()) {
        return Err(Error::Dimension { expected: g.dim(), got: points[bad].len() });
    }
    let outside = |bad: usize| Err(Error::invalid(format!("point {bad} lies outside the sieve radius")));
    let half = r / qi(2);
    let round = match to_fixed(points) {
        Some((den, fixed)) => {
            let outer = g.fixed_ball(r, &den);
            if let Some(bad) = fixed.iter().position(|p| !outer.contains(p)) {
                return outside(bad);
            }
            let ball = g.fixed_ball(&half, &den);
            greedy_cover(fixed.len(), |i, j| ball.contains_diff(&fixed[i], &fixed[j]))
        }
        None => {
            if let Some(bad) = points.iter().position(|p| !g.within(p, r)) {
                return outside(bad);
            }
            greedy_cover(points.len(), |i, j| g.within(&linalg::sub(&points[i], &points[j]), &half))
        }
    };
    let limit = 5f64.powi(g.dim() as i32);
    if round.representatives.len() as f64 > limit {
        return Err(Error::Internal(format!(
            "{} representatives exceed the packing bound 5^{}",
            round.representatives.len(),
            g.dim()
        )));
    }
    Ok(round)
}

/// Sieve parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    /// Explicit sample count; `None` uses `sample_constant · 4ⁿ · ⌈log₂ R⌉`.
    pub samples: Option<usize>,
    pub sample_constant: u64,
    pub max_attempts: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { samples: None, sample_constant: 32, max_attempts: 1_000_000 }
    }
}

impl SieveConfig {
    pub fn sample_count(&self, n: usize, radius: &Q) -> usize {
        if let Some(s) = self.samples {
            return s.max(1);
        }
        let log_r = ceil_int(radius).bits().max(1);
        let count = self.sample_constant.saturating_mul(4u64.saturating_pow(n as u32)).saturating_mul(log_r);
        count.min(usize::MAX as u64) as usize
    }
}

/// `R = n · max f(bᵢ)` for a full-rank basis.
pub fn initial_radius(l: &Lattice, g: &Gauge) -> Q {
    let max = l.basis().iter().map(|b| g.upper_bound(b)).max().unwrap_or_else(Q::zero);
    qi(l.dim() as i64) * max
}

/// Surviving pairs in the fixed-point frame.
#[derive(Clone, Debug)]
pub(crate) struct FixedPairs {
    pub den: BigInt,
    pub x: Vec<Vec<i128>>,
    pub z: Vec<Vec<i128>>,
    pub shift: Vec<Vec<i64>>,
    pub stats: SieveStats,
}

struct Frame {
    den: BigInt,
    dyadic_scale: i128,
    basis: Vec<Vec<i128>>,
    inv: Vec<Vec<BigInt>>,
    inv_den: BigInt,
}

impl Frame {
    fn new(l: &Lattice) -> Result<Frame> {
        let q = l.common_denominator();
        let dyadic = BigInt::one() << DYADIC_BITS;
        let den = &q * &dyadic;
        let dq = Q::from_integer(den.clone());
        let overflow = || Error::Internal("lattice basis too large for the fixed-point frame".into());
        let basis = l
            .basis()
            .iter()
            .map(|row| row.iter().map(|v| (v * &dq).to_integer().to_i128()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(overflow)?;
        let inv_q = linalg::inverse(l.basis()).ok_or_else(|| Error::invalid("sieving needs a full-rank lattice"))?;
        let inv_den = common_denominator(inv_q.iter().flatten());
        let idq = Q::from_integer(inv_den.clone());
        let inv = inv_q.iter().map(|row| row.iter().map(|v| (v * &idq).to_integer()).collect()).collect();
        Ok(Frame { dyadic_scale: q.to_i128().ok_or_else(overflow)?, den, basis, inv, inv_den })
    }

    /// `x mod L`: returns `z = x − floor(x B⁻¹) B` and `−floor(x B⁻¹)`.
    fn reduce(&self, x: &[i128]) -> Result<(Vec<i128>, Vec<i64>)> {
        let n = x.len();
        let scale = &self.den * &self.inv_den;
        let mut shift = Vec::with_capacity(n);
        for j in 0..n {
            let s: BigInt = (0..n).map(|i| BigInt::from(x[i]) * &self.inv[i][j]).sum();
            let c = -s.div_floor(&scale);
            shift.push(c.to_i64().ok_or_else(|| Error::Internal("coefficient overflow".into()))?);
        }
        let mut z = x.to_vec();
        for (c, row) in shift.iter().zip(&self.basis) {
            for (zi, b) in z.iter_mut().zip(row) {
                *zi += *c as i128 * b;
            }
        }
        Ok((z, shift))
    }
}

/// Runs the sampling pipeline on a full-rank lattice: `n_samples` points of
/// `B_g(0, 2)` are reduced modulo the lattice and sieved until every
/// surviving pair satisfies `g(x − z) ≤ target`.
pub(crate) fn aks_fixed(
    l: &Lattice,
    g: &Gauge,
    n_samples: usize,
    target: &Q,
    stream: &SeedStream,
    max_attempts: u64,
) -> Result<FixedPairs> {
    if !l.is_full_rank() {
        return Err(Error::invalid("sieving needs a full-rank lattice"));
    }
    if g.dim() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: g.dim() });
    }
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let frame = Frame::new(l)?;
    let two = qi(2);
    let sampled: Vec<Result<(Vec<i128>, Vec<i128>, Vec<i64>)>> = par::map_range(n_samples, |i| {
        let mut rng = stream.derive(i as u64).rng();
        let x: Vec<i128> = g
            .sample_fixed(&two, &mut rng, max_attempts)?
            .into_iter()
            .map(|v| v * frame.dyadic_scale)
            .collect();
        let (z, shift) = frame.reduce(&x)?;
        Ok((x, z, shift))
    });
    let mut xs = Vec::with_capacity(n_samples);
    let mut zs = Vec::with_capacity(n_samples);
    let mut shifts = Vec::with_capacity(n_samples);
    for s in sampled {
        let (x, z, c) = s?;
        xs.push(x);
        zs.push(z);
        shifts.push(c);
    }

    let mut stats = SieveStats { samples: n_samples, ..SieveStats::default() };
    let target_ball = g.fixed_ball(target, &frame.den);
    let mut radius = initial_radius(l, g);
    loop {
        let done = par::map_range(xs.len(), |i| target_ball.contains_diff(&xs[i], &zs[i]));
        if done.iter().all(|&d| d) {
            break;
        }
        let ball: FixedBall<'_> = g.fixed_ball(&radius, &frame.den);
        if !par::map_range(zs.len(), |i| ball.contains(&zs[i])).iter().all(|&b| b) {
            return Err(Error::Internal("sieve radius invariant violated".into()));
        }
        let half = &radius / &two;
        let half_ball = g.fixed_ball(&half, &frame.den);
        let round = greedy_cover(zs.len(), |i, j| half_ball.contains_diff(&zs[i], &zs[j]));
        stats.rounds += 1;
        stats.survivors_per_round.push(zs.len());
        stats.representatives_per_round.push(round.representatives.len());

        let mut keep_x = Vec::with_capacity(zs.len());
        let mut keep_z = Vec::with_capacity(zs.len());
        let mut keep_c = Vec::with_capacity(zs.len());
        for (i, rep) in round.map.iter().enumerate() {
            let Some(j) = *rep else { continue };
            let z: Vec<i128> = (0..zs[i].len()).map(|t| zs[i][t] - (zs[j][t] - xs[j][t])).collect();
            let c: Vec<i64> = shifts[i].iter().zip(&shifts[j]).map(|(a, b)| a - b).collect();
            keep_x.push(std::mem::take(&mut xs[i]));
            keep_z.push(z);
            keep_c.push(c);
        }
        xs = keep_x;
        zs = keep_z;
        shifts = keep_c;
        if xs.is_empty() {
            return Err(Error::Undersampled { rounds: stats.rounds });
        }
        radius = half + &two;
        if stats.rounds > 4096 {
            return Err(Error::Internal("sieve failed to converge".into()));
        }
    }
    Ok(FixedPairs { den: frame.den, x: xs, z: zs, shift: shifts, stats })
}

/// Samples `n_samples` pairs and sieves them down to `g(x − z) ≤ target`.
pub fn aks_pairs(l: &Lattice, g: &Gauge, n_samples: usize, target: &Q, stream: &SeedStream) -> Result<(Vec<SievePair>, SieveStats)> {
    aks_pairs_with(l, g, n_samples, target, stream, &SieveConfig::default())
}

pub fn aks_pairs_with(
    l: &Lattice,
    g: &Gauge,
    n_samples: usize,
    target: &Q,
    stream: &SeedStream,
    cfg: &SieveConfig,
) -> Result<(Vec<SievePair>, SieveStats)> {
    let run = aks_fixed(l, g, n_samples, target, stream, cfg.max_attempts)?;
    let to_q = |v: &[i128]| -> QVec { v.iter().map(|&a| Q::new(BigInt::from(a), run.den.clone())).collect() };
    let pairs = (0..run.x.len())
        .map(|i| SievePair { x: to_q(&run.x[i]), z: to_q(&run.z[i]), shift: run.shift[i].clone() })
        .collect();
    Ok((pairs, run.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::LpNorm;
    use crate::rational::{q, qvec};

    #[test]
    fn round_examples() {
        let g = Gauge::lp(2, LpNorm::L2);
        let pts = vec![qvec(&[3, 0]), vec![q(7, 2), qi(0)], qvec(&[-3, 0])];
        let r = sieve_round(&pts, &qi(8), &g).unwrap();
        assert_eq!(r.representatives, vec![0, 2]);
        assert_eq!(r.map[1], Some(0));

        let single = sieve_round(&[qvec(&[1, 1])], &qi(8), &g).unwrap();
        assert_eq!(single.representatives, vec![0]);
        assert!(single.map.iter().all(Option::is_none));

        let same = sieve_round(&vec![qvec(&[1, -1]); 6], &qi(8), &g).unwrap();
        assert_eq!(same.representatives.len(), 1);
    }

    #[test]
    fn round_rejects_points_outside_radius() {
        let g = Gauge::lp(2, LpNorm::L1);
        assert!(sieve_round(&[qvec(&[5, 4])], &qi(8), &g).is_err());
    }

    #[test]
    fn pairs_are_lattice_translates_within_target() {
        let l = Lattice::from_integer_rows(&[vec![3, 1], vec![-1, 4]]).unwrap();
        for g in [Gauge::lp(2, LpNorm::L2), Gauge::lp(2, LpNorm::Infinity), Gauge::cone(&[1, -1]).unwrap()] {
            let (pairs, stats) = aks_pairs(&l, &g, 2000, &qi(8), &SeedStream::new(4)).unwrap();
            assert!(!pairs.is_empty());
            for p in &pairs {
                let d = linalg::sub(&p.z, &p.x);
                assert_eq!(d, l.vector_i64(&p.shift));
                assert!(l.contains(&d));
                assert!(g.within(&linalg::sub(&p.x, &p.z), &qi(8)));
            }
            let discarded: usize = stats.representatives_per_round.iter().sum();
            assert_eq!(pairs.len(), stats.samples - discarded);
            let quarter = initial_radius(&l, &g) / qi(4);
            let mut log = 0;
            while Q::from_integer(BigInt::one() << log) < quarter {
                log += 1;
            }
            let bound = log + 2;
            assert!(stats.rounds <= bound, "{} rounds > {bound}", stats.rounds);
        }
    }

    #[test]
    fn pipeline_is_seed_deterministic() {
        let l = Lattice::from_integer_rows(&[vec![5, 0, 1], vec![0, 7, 2], vec![1, 1, 9]]).unwrap();
        let g = Gauge::lp(3, LpNorm::L1);
        let a = aks_pairs(&l, &g, 1500, &qi(8), &SeedStream::new(10)).unwrap();
        let b = aks_pairs(&l, &g, 1500, &qi(8), &SeedStream::new(10)).unwrap();
        assert_eq!(a, b);
    }
}
