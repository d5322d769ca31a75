//! Support-restricted solvers over `{v ∈ L : |supp(v)| ≤ k}` and the
//! perfect-code instance generator.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::enumerate::{cvp_exact_gauge, default_budget, lex_least, sap_oracle, svp_exact_with, Enumerator};
use crate::error::{Error, Result};
use crate::gauge::{Gauge, GaugeValue, LpNorm};
use crate::lattice::{Lattice, Subspace};
use crate::linalg::{self, dot};
use crate::par;
use crate::rational::{qi, Q, QVec};
use crate::report::SolveReport;
use crate::rng::SeedStream;
use crate::sap::{sap_exact, SapConfig};

#[derive(Clone, Debug)]
pub struct ParamInstance {
    /// Support is measured against this basis.
    pub lattice: Lattice,
    pub k: usize,
    pub target: Option<QVec>,
    pub subspace: Option<Subspace>,
    pub norm: LpNorm,
}

impl ParamInstance {
    pub fn new(lattice: Lattice, k: usize, norm: LpNorm) -> Result<Self> {
        if k == 0 || k > lattice.rank() {
            return Err(Error::invalid(format!("k must lie in 1..={}", lattice.rank())));
        }
        Ok(ParamInstance { lattice, k, target: None, subspace: None, norm })
    }

    pub fn with_target(mut self, t: QVec) -> Result<Self> {
        if t.len() != self.lattice.dim() {
            return Err(Error::Dimension { expected: self.lattice.dim(), got: t.len() });
        }
        self.target = Some(t);
        Ok(self)
    }

    pub fn with_subspace(mut self, m: Subspace) -> Result<Self> {
        if m.ambient() != self.lattice.dim() {
            return Err(Error::Dimension { expected: self.lattice.dim(), got: m.ambient() });
        }
        self.subspace = Some(m);
        Ok(self)
    }

    /// Every `k`-subset of basis indices, in lexicographic order.
    pub fn subsets(&self) -> Vec<Vec<usize>> {
        (0..self.lattice.rank()).combinations(self.k).collect()
    }

    fn gauge(&self) -> Gauge {
        Gauge::lp(self.lattice.dim(), self.norm)
    }
}

/// Number of nonzero coefficients.
pub fn support(coeffs: &[BigInt]) -> usize {
    coeffs.iter().filter(|c| !c.is_zero()).count()
}

fn spread(n: usize, subset: &[usize], local: &[BigInt]) -> Vec<BigInt> {
    let mut full = vec![BigInt::zero(); n];
    for (&i, c) in subset.iter().zip(local) {
        full[i] = c.clone();
    }
    full
}

/// Ordered reduction over per-subset results: least norm, then least
/// subset index, then least coefficient vector.
fn pick(l: &Lattice, found: Vec<Option<(GaugeValue, Vec<BigInt>, usize)>>) -> Option<SolveReport> {
    let mut best: Option<(GaugeValue, Vec<BigInt>)> = None;
    let mut candidates = 0;
    for (norm, coeffs, count) in found.into_iter().flatten() {
        candidates += count;
        // Subsets arrive in lex order, so a strict comparison keeps the
        // earliest subset on ties.
        if best.as_ref().is_none_or(|(b, _)| norm < *b) {
            best = Some((norm, coeffs));
        }
    }
    best.map(|(norm, coeffs)| {
        let mut r = SolveReport::deterministic(l.vector(&coeffs), coeffs, norm);
        r.candidates = candidates;
        r
    })
}

/// Shortest nonzero vector with support at most `k`.
pub fn psvp(inst: &ParamInstance) -> Result<SolveReport> {
    if inst.target.is_some() || inst.subspace.is_some() {
        return Err(Error::invalid("psvp takes neither a target nor a subspace"));
    }
    let l = &inst.lattice;
    let g = inst.gauge();
    let budget = default_budget();
    let subsets = inst.subsets();
    let found = par::map_slice(&subsets, |s| {
        let r = svp_exact_with(&l.select(s), &g, budget)?;
        Ok(Some((r.norm, spread(l.rank(), s, &r.coefficients), r.candidates)))
    });
    let found = found.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pick(l, found).expect("every subset has a nonzero vector"))
}

/// Closest vector to the target with support at most `k`.
pub fn pcvp(inst: &ParamInstance) -> Result<SolveReport> {
    let t = inst.target.as_ref().ok_or_else(|| Error::invalid("pcvp needs a target"))?;
    let l = &inst.lattice;
    let g = inst.gauge();
    let budget = default_budget();
    let subsets = inst.subsets();
    let found = par::map_slice(&subsets, |s| {
        let r = cvp_exact_gauge(&l.select(s), t, &g, budget)?;
        Ok(Some((r.norm, spread(l.rank(), s, &r.coefficients), r.candidates)))
    });
    let found = found.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pick(l, found).expect("at least one subset"))
}

/// `M ∩ span(L_S)` written in the coefficient coordinates of `L_S`.
pub fn coefficient_subspace(l_s: &Lattice, m: &Subspace) -> Result<Subspace> {
    let k = l_s.rank();
    let rows: Vec<QVec> = m.annihilator().iter().map(|a| l_s.basis().iter().map(|b| dot(b, a)).collect()).collect();
    Subspace::new(k, linalg::nullspace(&rows, k))
}

fn psap_with<F>(inst: &ParamInstance, solve: F) -> Result<SolveReport>
where
    F: Fn(usize, &Lattice, &Subspace) -> Result<SolveReport> + Sync,
{
    let m = inst.subspace.as_ref().ok_or_else(|| Error::invalid("psap needs a subspace"))?;
    if inst.target.is_some() {
        return Err(Error::invalid("psap takes no target"));
    }
    if m.dimension() >= inst.lattice.dim() {
        return Err(Error::invalid("the subspace must be proper"));
    }
    let l = &inst.lattice;
    let subsets = inst.subsets();
    let found = par::map_range(subsets.len(), |i| {
        let s = &subsets[i];
        let l_s = l.select(s);
        let m_s = coefficient_subspace(&l_s, m)?;
        if m_s.dimension() == s.len() {
            return Ok(None);
        }
        let r = solve(i, &l_s, &m_s)?;
        Ok(Some((r.norm, spread(l.rank(), s, &r.coefficients), r.candidates)))
    });
    let found = found.into_iter().collect::<Result<Vec<_>>>()?;
    pick(l, found).ok_or_else(|| Error::Infeasible("every support-k sublattice lies in the subspace".into()))
}

/// Shortest vector outside `M` with support at most `k`, by enumeration on
/// each coefficient lattice.
pub fn psap(inst: &ParamInstance) -> Result<SolveReport> {
    let budget = default_budget();
    psap_with(inst, |_, l_s, m_s| {
        let g = Gauge::pullback(&inst.gauge(), l_s.basis().to_vec())?;
        sap_oracle(&Lattice::identity(l_s.rank()), m_s, &g, budget)
    })
}

/// As [`psap`], solving each coefficient instance with the sieving exact
/// SAP solver on its own substream.
pub fn psap_sieve(inst: &ParamInstance, stream: &SeedStream, cfg: &SapConfig) -> Result<SolveReport> {
    let mut r = psap_with(inst, |i, l_s, m_s| {
        let g = Gauge::pullback(&inst.gauge(), l_s.basis().to_vec())?;
        sap_exact(&Lattice::identity(l_s.rank()), m_s, &g, &stream.derive(i as u64), cfg)
    })?;
    r.seed = stream.seed();
    r.repetitions = cfg.reps;
    Ok(r)
}

/// Optimum over all support-`k` vectors found by one enumeration of the
/// whole lattice, without splitting into subsets.
pub fn support_oracle(inst: &ParamInstance) -> Result<SolveReport> {
    let l = &inst.lattice;
    let g = inst.gauge();
    let e = Enumerator::new(l, default_budget());
    let small = |v: &QVec| support(&l.integer_coordinates(v).expect("enumerated vectors lie in the lattice")) <= inst.k;
    let found = match (&inst.target, &inst.subspace) {
        (Some(t), _) => e.search_min(Some(t), &g, &g.upper_bound(&linalg::neg(t)), |v| small(v))?,
        (None, Some(m)) => {
            let Some(init) = l.basis().iter().filter(|b| !m.contains(b)).map(|b| g.upper_bound(b)).min() else {
                return Err(Error::Infeasible("every support-k sublattice lies in the subspace".into()));
            };
            e.search_min(None, &g, &init, |v| !m.contains(v) && small(v))?
        }
        (None, None) => {
            let init = l.basis().iter().map(|b| g.upper_bound(b)).min().expect("nonempty basis");
            e.search_min(None, &g, &init, |v| !linalg::is_zero(v) && small(v))?
        }
    };
    let (norm, ties) = found.ok_or_else(|| Error::Internal("no support-k vector inside the initial bound".into()))?;
    let count = ties.len();
    let (w, c) = lex_least(l, ties);
    let mut r = SolveReport::deterministic(w, c, norm);
    r.candidates = count;
    Ok(r)
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Edges are 1-based vertex pairs.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::invalid(format!("edge ({a}, {b}) has a vertex outside 1..={n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            set.insert((a.min(b) - 1, a.max(b) - 1));
        }
        Ok(Graph { n, edges: set })
    }

    /// Parses `"n m"` followed by `m` lines `"a b"` (1-based).
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let pair = |(no, line): (usize, &str)| -> Result<(usize, usize)> {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::invalid(format!("line {}: bad integer {t:?}", no + 1))))
                .collect::<Result<_>>()?;
            match nums[..] {
                [a, b] => Ok((a, b)),
                _ => Err(Error::invalid(format!("line {}: expected two integers", no + 1))),
            }
        };
        let (n, m) = pair(lines.next().ok_or_else(|| Error::invalid("empty edge list"))?)?;
        let edges: Vec<(usize, usize)> = lines.map(pair).collect::<Result<_>>()?;
        if edges.len() != m {
            return Err(Error::invalid(format!("header declares {m} edges, found {}", edges.len())));
        }
        Graph::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (a, b) in &self.edges {
            writeln!(s, "{} {}", a + 1, b + 1).expect("writing to a string");
        }
        s
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (1..=n).tuple_combinations().collect();
        Graph::new(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Graph::new(n, &edges).expect("valid")
    }

    /// One center joined to `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (2..=leaves + 1).map(|i| (1, i)).collect();
        Graph::new(leaves + 1, &edges).expect("valid")
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// `N[v]`: `v` and its neighbours (0-based).
    pub fn closed_neighborhood(&self, v: usize) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect();
        out.insert(v);
        out
    }
}

/// True iff some `k` closed neighbourhoods partition the vertex set.
pub fn check_perfect_code(g: &Graph, k: usize) -> bool {
    let hoods: Vec<BTreeSet<usize>> = (0..g.n).map(|v| g.closed_neighborhood(v)).collect();
    (0..g.n).combinations(k).any(|s| {
        let mut seen = vec![false; g.n];
        for &v in &s {
            for &u in &hoods[v] {
                if std::mem::replace(&mut seen[u], true) {
                    return false;
                }
            }
        }
        seen.iter().all(|&x| x)
    })
}

/// `2·n·(n+1)`.
pub fn default_mconst(n: usize) -> i64 {
    2 * n as i64 * (n as i64 + 1)
}

#[derive(Clone, Debug)]
pub struct PerfectCodeInstance {
    pub instance: ParamInstance,
    /// Bound on the squared Euclidean distance: `(n − k)·M²`.
    pub threshold_sq: Q,
    pub mconst: i64,
}

impl PerfectCodeInstance {
    /// Decides the graph question via the support-restricted CVP.
    pub fn decide(&self) -> Result<bool> {
        Ok(*pcvp(&self.instance)?.norm.pth_power() <= self.threshold_sq)
    }
}

/// Basis `uᵢ = (N[i] indicator, M·eᵢ)`, target `(1ⁿ, Mⁿ)`.
pub fn perfect_code_to_pcvp(g: &Graph, k: usize, mconst: Option<i64>) -> Result<PerfectCodeInstance> {
    let n = g.n;
    if n == 0 {
        return Err(Error::invalid("the graph has no vertices"));
    }
    let mconst = mconst.unwrap_or_else(|| default_mconst(n));
    if mconst < 1 {
        return Err(Error::invalid("the constant M must be positive"));
    }
    let rows: Vec<QVec> = (0..n)
        .map(|i| {
            let hood = g.closed_neighborhood(i);
            let mut u: QVec = (0..n).map(|j| qi(hood.contains(&j) as i64)).collect();
            u.extend((0..n).map(|j| qi(if i == j { mconst } else { 0 })));
            u
        })
        .collect();
    let target: QVec = (0..2 * n).map(|j| qi(if j < n { 1 } else { mconst })).collect();
    let instance = ParamInstance::new(Lattice::new(2 * n, rows)?, k, LpNorm::L2)?.with_target(target)?;
    let threshold_sq = qi((n - k) as i64) * qi(mconst) * qi(mconst);
    Ok(PerfectCodeInstance { instance, threshold_sq, mconst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};
    use num_traits::Signed;

    fn inst(rows: &[Vec<i64>], k: usize, p: LpNorm) -> ParamInstance {
        ParamInstance::new(Lattice::from_integer_rows(rows).unwrap(), k, p).unwrap()
    }

    #[test]
    fn psvp_examples() {
        let skew = inst(&[vec![3, 0], vec![1, 1]], 1, LpNorm::L2);
        let r = psvp(&skew).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(2));
        assert_eq!(r.witness.iter().map(|x| x.abs()).collect::<QVec>(), qvec(&[1, 1]));
        let z4 = ParamInstance::new(Lattice::identity(4), 3, LpNorm::L1).unwrap();
        assert_eq!(*psvp(&z4).unwrap().norm.pth_power(), qi(1));
        let any = inst(&[vec![5, 1, 0], vec![0, 4, 4], vec![1, 1, 7]], 1, LpNorm::Infinity);
        assert_eq!(*psvp(&any).unwrap().norm.pth_power(), qi(4));
    }

    #[test]
    fn pcvp_examples() {
        let z2 = |k| ParamInstance::new(Lattice::identity(2), k, LpNorm::L2).unwrap().with_target(qvec(&[3, 3])).unwrap();
        assert!(pcvp(&z2(2)).unwrap().norm.is_zero());
        let r = pcvp(&z2(1)).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(9));
        assert_eq!(r.witness, qvec(&[3, 0]));
        let zero = inst(&[vec![2, 1], vec![1, 3]], 1, LpNorm::L1).with_target(qvec(&[0, 0])).unwrap();
        assert!(pcvp(&zero).unwrap().witness.iter().all(Zero::is_zero));
    }

    #[test]
    fn psap_examples() {
        let e = |n, rows: &[&[i64]]| Subspace::new(n, rows.iter().map(|r| qvec(r)).collect()).unwrap();
        let z3 = ParamInstance::new(Lattice::identity(3), 1, LpNorm::L2).unwrap().with_subspace(e(3, &[&[1, 0, 0], &[0, 1, 0]])).unwrap();
        let r = psap(&z3).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(1));
        assert_eq!(r.witness.iter().map(|x| x.abs()).collect::<QVec>(), qvec(&[0, 0, 1]));

        let z2 = ParamInstance::new(Lattice::identity(2), 1, LpNorm::L2).unwrap().with_subspace(e(2, &[&[1, 1]])).unwrap();
        assert_eq!(*psap(&z2).unwrap().norm.pth_power(), qi(1));

        let diag = inst(&[vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]], 1, LpNorm::L2).with_subspace(e(3, &[&[1, 0, 0]])).unwrap();
        let r = psap(&diag).unwrap();
        assert_eq!(*r.norm.pth_power(), qi(4));
        let cfg = SapConfig { sieve: crate::sieve::SieveConfig { samples: Some(2000), ..Default::default() }, ..Default::default() };
        assert_eq!(psap_sieve(&diag, &SeedStream::new(1), &cfg).unwrap().norm, r.norm);

        let inside = inst(&[vec![1, 0], vec![0, 1]], 1, LpNorm::L2).with_subspace(e(2, &[&[1, 0]])).unwrap();
        assert_eq!(*psap(&inside).unwrap().norm.pth_power(), qi(1));
        let line = ParamInstance::new(Lattice::from_integer_rows(&[vec![1, 1, 0]]).unwrap(), 1, LpNorm::L2)
            .unwrap()
            .with_subspace(e(3, &[&[1, 1, 0]]))
            .unwrap();
        assert!(matches!(psap(&line), Err(Error::Infeasible(_))));
    }

    #[test]
    fn subsets_agree_with_whole_lattice_search() {
        let l = inst(&[vec![4, 1, 0], vec![1, -3, 2], vec![0, 2, 5]], 2, LpNorm::L1);
        assert_eq!(psvp(&l).unwrap().norm, support_oracle(&l).unwrap().norm);
        let t = l.clone().with_target(vec![q(7, 2), qi(-1), q(9, 4)]).unwrap();
        assert_eq!(pcvp(&t).unwrap().norm, support_oracle(&t).unwrap().norm);
        let m = Subspace::new(3, vec![qvec(&[4, 1, 0])]).unwrap();
        let s = l.with_subspace(m).unwrap();
        assert_eq!(psap(&s).unwrap().norm, support_oracle(&s).unwrap().norm);
    }

    #[test]
    fn perfect_code_fixtures() {
        for (g, k, yes) in [(Graph::complete(3), 1, true), (Graph::cycle(4), 1, false), (Graph::star(3), 1, true)] {
            assert_eq!(check_perfect_code(&g, k), yes);
            assert_eq!(perfect_code_to_pcvp(&g, k, None).unwrap().decide().unwrap(), yes);
        }
        // Two disjoint edges: each edge's endpoint covers it.
        let g = Graph::new(4, &[(1, 2), (3, 4)]).unwrap();
        assert!(check_perfect_code(&g, 2));
        assert!(!check_perfect_code(&g, 1));
        assert!(perfect_code_to_pcvp(&g, 2, Some(1)).unwrap().decide().unwrap());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::parse_edge_list("4 3\n1 2\n2 3\n\n4 1\n").unwrap();
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        assert_eq!(g.closed_neighborhood(0), [0, 1, 3].into_iter().collect());
        assert!(Graph::parse_edge_list("2 1\n1 1\n").is_err());
        assert!(Graph::parse_edge_list("2 2\n1 2\n").is_err());
        assert!(Graph::parse_edge_list("2 1\n1 3\n").is_err());
    }
}
