//! Randomized reduction from search-CVP to search-unique-CVP by coordinate
//! weighting `f_K(x) = ((K + a₁)x₁, …, (K + aₙ)xₙ)`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::enumerate::{count_closest_gauge, cvp_exact_gauge, default_budget, Enumerator};
use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeValue, LpNorm};
use crate::lattice::Lattice;
use crate::linalg::{self, norm2_sq};
use crate::par;
use crate::rational::{common_denominator, Q, QVec};
use crate::rng::SeedStream;

#[derive(Clone, Debug)]
pub struct IsolationConfig {
    /// Upper end of the weight range; `None` uses `8·n·N²` with `N` the
    /// number of closest vectors.
    pub p: Option<u64>,
    pub k: BigInt,
    pub norm: LpNorm,
    /// Doublings of `K` allowed when recovery returns a non-closest vector.
    pub max_doublings: u32,
}

impl Default for IsolationConfig {
    fn default() -> Self {
        IsolationConfig { p: None, k: BigInt::one() << 40, norm: LpNorm::L2, max_doublings: 64 }
    }
}

/// The weights together with the original instance. Integer data below
/// lives in the pre-scaled frame `scale·L`, `scale·v`.
#[derive(Clone, Debug)]
pub struct IsolationTransform {
    pub a: Vec<u64>,
    pub p: u64,
    pub k: BigInt,
    pub scale: BigInt,
    pub norm: LpNorm,
    pub lattice: Lattice,
    pub target: QVec,
}

impl IsolationTransform {
    fn factor(&self, i: usize) -> Q {
        Q::from_integer(&self.k + BigInt::from(self.a[i]))
    }

    fn scale_q(&self) -> Q {
        Q::from_integer(self.scale.clone())
    }

    /// `f_K` on the pre-scaled frame.
    pub fn apply(&self, x: &[Q]) -> QVec {
        x.iter().enumerate().map(|(i, xi)| xi * self.factor(i)).collect()
    }

    /// `Σ |(K + aᵢ)xᵢ − K vᵢ|^p` for `x` in the pre-scaled frame, written out
    /// for `p = 2` as `K²‖x − v‖² + 2K Σ aᵢxᵢ(xᵢ − vᵢ) + Σ aᵢ²xᵢ²`.
    pub fn weight(&self, x: &[Q]) -> Q {
        let v: QVec = self.scaled_target();
        match self.norm {
            LpNorm::Finite(2) => {
                let k = Q::from_integer(self.k.clone());
                let d = linalg::sub(x, &v);
                let mut cross = Q::zero();
                let mut quad = Q::zero();
                for (i, xi) in x.iter().enumerate() {
                    let a = Q::from_integer(BigInt::from(self.a[i]));
                    cross += &a * xi * &d[i];
                    quad += &a * &a * xi * xi;
                }
                &k * &k * norm2_sq(&d) + Q::from_integer(BigInt::from(2)) * k * cross + quad
            }
            _ => {
                let k = Q::from_integer(self.k.clone());
                let diff: QVec = (0..x.len()).map(|i| &x[i] * self.factor(i) - &k * &v[i]).collect();
                self.norm.pth(&diff)
            }
        }
    }

    fn scaled_target(&self) -> QVec {
        linalg::scale(&self.target, &self.scale_q())
    }
}

#[derive(Clone, Debug)]
pub struct Isolated {
    pub lattice: Lattice,
    pub target: QVec,
    pub transform: IsolationTransform,
}

fn prescale(l: &Lattice, v: &[Q]) -> BigInt {
    common_denominator(l.basis().iter().flatten().chain(v))
}

/// Builds the weighted instance for explicit weights.
pub fn isolate_with(l: &Lattice, v: &[Q], a: Vec<u64>, p: u64, k: BigInt, norm: LpNorm) -> Result<Isolated> {
    let n = l.dim();
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    if a.len() != n {
        return Err(Error::Dimension { expected: n, got: a.len() });
    }
    if let Some(&bad) = a.iter().find(|&&x| x > p) {
        return Err(Error::invalid(format!("weight {bad} exceeds p = {p}")));
    }
    if k < BigInt::one() {
        return Err(Error::invalid("K must be positive"));
    }
    let scale = prescale(l, v);
    let t = IsolationTransform { a, p, k, scale, norm, lattice: l.clone(), target: v.to_vec() };
    let s = t.scale_q();
    let rows: Vec<QVec> = l.basis().iter().map(|b| t.apply(&linalg::scale(b, &s))).collect();
    let lattice = Lattice::new(n, rows)?;
    let target = linalg::scale(&t.scaled_target(), &Q::from_integer(t.k.clone()));
    Ok(Isolated { lattice, target, transform: t })
}

/// `8·n·N²` where `N` counts the closest vectors to `v`.
pub fn default_p(l: &Lattice, v: &[Q], norm: LpNorm) -> Result<u64> {
    let count = count_closest_gauge(l, v, &Gauge::lp(l.dim(), norm), default_budget())? as u64;
    Ok(8 * l.dim() as u64 * count * count)
}

/// Draws `aᵢ` uniformly from `{0, …, p}` and builds the weighted instance.
pub fn isolate_cvp(l: &Lattice, v: &[Q], stream: &SeedStream, cfg: &IsolationConfig) -> Result<Isolated> {
    let p = match cfg.p {
        Some(p) => p,
        None => default_p(l, v, cfg.norm)?,
    };
    let mut rng = stream.rng();
    let a = (0..l.dim()).map(|_| rng.random_range(0..=p)).collect();
    isolate_with(l, v, a, p, cfg.k.clone(), cfg.norm)
}

/// Inverts `f_K`: `xᵢ = solᵢ/(K + aᵢ)`, mapped back to the original frame.
pub fn recover(t: &IsolationTransform, sol: &[Q]) -> Result<QVec> {
    if sol.len() != t.target.len() {
        return Err(Error::Dimension { expected: t.target.len(), got: sol.len() });
    }
    let s = t.scale_q();
    let x: QVec = sol.iter().enumerate().map(|(i, y)| y / t.factor(i) / &s).collect();
    if !t.lattice.contains(&x) {
        return Err(Error::NotInLattice);
    }
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct UniqueSolve {
    pub witness: QVec,
    pub coefficients: Vec<BigInt>,
    /// Distance from the original target.
    pub distance: GaugeValue,
    pub transform: IsolationTransform,
    /// Whether the weighted instance had a single closest vector.
    pub unique: bool,
    pub doublings: u32,
}

/// Solves CVP through the weighted instance, doubling `K` until the
/// recovered vector is a closest vector of the original instance.
pub fn solve_via_unique(l: &Lattice, v: &[Q], stream: &SeedStream, cfg: &IsolationConfig) -> Result<UniqueSolve> {
    let budget = default_budget();
    let g = Gauge::lp(l.dim(), cfg.norm);
    let optimum = cvp_exact_gauge(l, v, &g, budget)?.norm;
    let mut k = cfg.k.clone();
    for doublings in 0..=cfg.max_doublings {
        let iso = isolate_cvp(l, v, stream, &IsolationConfig { k: k.clone(), ..cfg.clone() })?;
        let mg = Gauge::lp(l.dim(), cfg.norm);
        let (_, ties) = Enumerator::new(&iso.lattice, budget).closest(&iso.target, &mg)?;
        let sol = ties
            .iter()
            .min_by(|x, y| linalg::lex_cmp_int(&iso.lattice.integer_coordinates(x).unwrap(), &iso.lattice.integer_coordinates(y).unwrap()))
            .expect("closest set is nonempty");
        let x = recover(&iso.transform, sol)?;
        let distance = g.eval(&linalg::sub(&x, v));
        if distance == optimum {
            let coefficients = l.integer_coordinates(&x).expect("recovered vectors lie in the lattice");
            return Ok(UniqueSolve { witness: x, coefficients, distance, unique: ties.len() == 1, transform: iso.transform, doublings });
        }
        k <<= 1;
    }
    Err(Error::Internal(format!("recovery still incorrect after {} doublings of K", cfg.max_doublings)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniqueRate {
    pub trials: usize,
    pub unique: usize,
    pub p: u64,
}

impl UniqueRate {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.unique as f64 / self.trials as f64
    }
}

/// Fraction of weight draws for which the weighted instance has exactly one
/// closest vector. Trial `i` uses `stream.derive(i)`.
pub fn uniqueness_rate(l: &Lattice, v: &[Q], trials: usize, stream: &SeedStream, cfg: &IsolationConfig) -> Result<UniqueRate> {
    let p = match cfg.p {
        Some(p) => p,
        None => default_p(l, v, cfg.norm)?,
    };
    let cfg = IsolationConfig { p: Some(p), ..cfg.clone() };
    let outcomes = par::map_range(trials, |i| {
        let iso = isolate_cvp(l, v, &stream.derive(i as u64), &cfg)?;
        let g = Gauge::lp(l.dim(), cfg.norm);
        Ok(count_closest_gauge(&iso.lattice, &iso.target, &g, default_budget())? == 1)
    });
    let unique = outcomes.into_iter().collect::<Result<Vec<bool>>>()?.into_iter().filter(|&u| u).count();
    Ok(UniqueRate { trials, unique, p })
}

/// Exact fraction of all `(p+1)ⁿ` weight vectors that isolate, by
/// enumeration. Only practical for tiny `p` and `n`.
pub fn exact_isolation_fraction(l: &Lattice, v: &[Q], p: u64, k: &BigInt, norm: LpNorm) -> Result<Q> {
    let n = l.dim();
    let total = (p + 1).checked_pow(n as u32).ok_or_else(|| Error::invalid("too many weight vectors"))?;
    let mut hits = 0u64;
    for idx in 0..total {
        let mut rest = idx;
        let a: Vec<u64> = (0..n)
            .map(|_| {
                let d = rest % (p + 1);
                rest /= p + 1;
                d
            })
            .collect();
        let iso = isolate_with(l, v, a, p, k.clone(), norm)?;
        if count_closest_gauge(&iso.lattice, &iso.target, &Gauge::lp(n, norm), default_budget())? == 1 {
            hits += 1;
        }
    }
    Ok(Q::new(BigInt::from(hits), BigInt::from(total)))
}
