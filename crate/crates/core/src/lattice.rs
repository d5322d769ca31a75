//! Lattices, subspaces and the exact integer/rational machinery around them:
//! Hermite normal form, LLL, reduction modulo the fundamental parallelepiped,
//! sublattice intersection and coset keys.
//!
//! Basis vectors are rows throughout. A lattice may have rank below its
//! ambient dimension (sublattices such as `L ∩ M` are represented that way).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, combine, dot, gram_schmidt, inverse, rank, rref, Gso};
use crate::rational::{common_denominator, floor_int, q, Q, QVec};

#[derive(Clone)]
pub struct Lattice {
    dim: usize,
    basis: Vec<QVec>,
    pivots: Vec<usize>,
    pivot_inverse: Vec<QVec>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("dim", &self.dim)
            .field("basis", &self.basis.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.basis == other.basis
    }
}

impl Lattice {
    /// Builds a lattice from linearly independent rows of length `dim`.
    pub fn new(dim: usize, basis: Vec<QVec>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be at least 1"));
        }
        if let Some(bad) = basis.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: bad.len() });
        }
        let (_, pivots) = rref(&basis, dim);
        if pivots.len() != basis.len() {
            return Err(Error::invalid("basis rows are linearly dependent"));
        }
        let square: Vec<QVec> = basis
            .iter()
            .map(|r| pivots.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let pivot_inverse = if basis.is_empty() {
            Vec::new()
        } else {
            inverse(&square).ok_or_else(|| Error::Internal("pivot block singular".into()))?
        };
        Ok(Lattice { dim, basis, pivots, pivot_inverse })
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::new(dim, rows.iter().map(|r| crate::rational::qvec(r)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        Self::new(n, rows).expect("identity is a basis")
    }

    /// The rank-zero lattice `{0}` in `dim` dimensions.
    pub fn trivial(dim: usize) -> Self {
        Self::new(dim, Vec::new()).expect("empty basis")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn is_integral(&self) -> bool {
        self.basis.iter().flatten().all(|x| x.is_integer())
    }

    /// Rational coordinates of `v` in this basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[Q]) -> Option<QVec> {
        if v.len() != self.dim {
            return None;
        }
        let k = self.rank();
        let mut a = vec![Q::zero(); k];
        for (i, &pc) in self.pivots.iter().enumerate() {
            if v[pc].is_zero() {
                continue;
            }
            for (aj, inv) in a.iter_mut().zip(&self.pivot_inverse[i]) {
                *aj += &v[pc] * inv;
            }
        }
        let back = linalg::vec_mat(&a, &self.basis, self.dim);
        (back.as_slice() == v).then_some(a)
    }

    pub fn integer_coordinates(&self, v: &[Q]) -> Option<Vec<BigInt>> {
        let a = self.coordinates(v)?;
        a.iter().all(|x| x.is_integer()).then(|| a.iter().map(|x| x.to_integer()).collect())
    }

    /// Exact membership test: `v` is an integer combination of the basis.
    pub fn contains(&self, v: &[Q]) -> bool {
        self.integer_coordinates(v).is_some()
    }

    pub fn in_span(&self, v: &[Q]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn vector(&self, coeffs: &[BigInt]) -> QVec {
        combine(coeffs, &self.basis, self.dim)
    }

    pub fn vector_i64(&self, coeffs: &[i64]) -> QVec {
        linalg::combine_i64(coeffs, &self.basis, self.dim)
    }

    pub fn scaled(&self, s: &Q) -> Lattice {
        let rows = self.basis.iter().map(|r| linalg::scale(r, s)).collect();
        Lattice::new(self.dim, rows).expect("nonzero scaling preserves independence")
    }

    pub fn common_denominator(&self) -> BigInt {
        common_denominator(self.basis.iter().flatten())
    }

    pub fn gso(&self) -> Gso {
        gram_schmidt(&self.basis)
    }

    /// Sublattice spanned by the rows with the given indices.
    pub fn select(&self, rows: &[usize]) -> Lattice {
        Lattice::new(self.dim, rows.iter().map(|&i| self.basis[i].clone()).collect())
            .expect("subset of a basis is independent")
    }

    pub fn lll(&self) -> Lattice {
        lll_reduce(self, &q(3, 4))
    }
}

/// Linear subspace of `ℚⁿ` given by a spanning set.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    dim: usize,
    span: Vec<QVec>,
    annihilator: Vec<QVec>,
}

impl Subspace {
    pub fn new(dim: usize, rows: Vec<QVec>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: bad.len() });
        }
        let independent = rank(&rows, dim) == rows.len();
        let span = if independent { rows } else { rref(&rows, dim).0 };
        let annihilator = linalg::nullspace(&span, dim);
        Ok(Subspace { dim, span, annihilator })
    }

    pub fn zero(dim: usize) -> Self {
        Subspace::new(dim, Vec::new()).expect("empty span")
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.span.len()
    }

    pub fn span(&self) -> &[QVec] {
        &self.span
    }

    /// Rows `a` with `a·m = 0` for every `m` in the subspace.
    pub fn annihilator(&self) -> &[QVec] {
        &self.annihilator
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.annihilator.iter().all(|a| dot(a, v).is_zero())
    }

    pub fn extended(&self, v: &[Q]) -> Result<Subspace> {
        let mut rows = self.span.clone();
        rows.push(v.to_vec());
        Subspace::new(self.dim, rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        let mut ann = self.annihilator.clone();
        ann.extend(other.annihilator.iter().cloned());
        let rows = linalg::nullspace(&ann, self.dim);
        Subspace::new(self.dim, rows)
    }
}

/// Row-style Hermite normal form of an integer matrix (zero rows dropped).
pub fn hnf(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    hnf_with_transform(mat).0
}

/// Returns `(H, U)` with `U` unimodular and `U·A = [H; 0]`.
pub fn hnf_with_transform(mat: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let m = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    fn axpy(dst: &mut [BigInt], f: &BigInt, src: &[BigInt]) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d -= f * s;
        }
    }

    let mut row = 0;
    for col in 0..cols {
        if row >= m {
            break;
        }
        loop {
            let best = (row..m)
                .filter(|&i| !a[i][col].is_zero())
                .min_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()));
            let Some(p) = best else { break };
            a.swap(row, p);
            u.swap(row, p);
            let mut done = true;
            for i in row + 1..m {
                if a[i][col].is_zero() {
                    continue;
                }
                let f = &a[i][col] / &a[row][col];
                let (pa, pu) = (a[row].clone(), u[row].clone());
                axpy(&mut a[i], &f, &pa);
                axpy(&mut u[i], &f, &pu);
                if !a[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[row][col].is_zero() {
            continue;
        }
        if a[row][col].is_negative() {
            a[row].iter_mut().for_each(|x| *x = -&*x);
            u[row].iter_mut().for_each(|x| *x = -&*x);
        }
        let (pa, pu) = (a[row].clone(), u[row].clone());
        for r in 0..row {
            let f = a[r][col].div_floor(&pa[col]);
            if !f.is_zero() {
                axpy(&mut a[r], &f, &pa);
                axpy(&mut u[r], &f, &pu);
            }
        }
        row += 1;
    }
    a.truncate(row);
    (a, u)
}

/// Left integer kernel: a basis of `{c ∈ ℤᵐ : c·A = 0}`.
pub fn integer_left_kernel(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let (h, u) = hnf_with_transform(mat);
    u.into_iter().skip(h.len()).collect()
}

/// Exact LLL reduction with Lovász parameter `delta ∈ (1/4, 1)`.
pub fn lll_reduce(l: &Lattice, delta: &Q) -> Lattice {
    assert!(*delta > q(1, 4) && *delta < Q::one(), "delta must lie in (1/4, 1)");
    let mut b = l.basis.to_vec();
    let m = b.len();
    if m <= 1 {
        return l.clone();
    }
    let mut g = gram_schmidt(&b);
    let half = q(1, 2);

    let size_reduce = |b: &mut Vec<QVec>, mu: &mut Vec<QVec>, k: usize, j: usize| {
        if mu[k][j].abs() <= half {
            return;
        }
        let r = floor_int(&(&mu[k][j] + &half));
        let rq = Q::from_integer(r);
        let bj = b[j].clone();
        for (x, y) in b[k].iter_mut().zip(&bj) {
            *x -= &rq * y;
        }
        for i in 0..j {
            let t = &rq * &mu[j][i];
            mu[k][i] -= t;
        }
        mu[k][j] -= &rq;
    };

    let mut k = 1;
    while k < m {
        size_reduce(&mut b, &mut g.mu, k, k - 1);
        let mu = &g.mu[k][k - 1];
        let rhs = (delta - mu * mu) * &g.norms[k - 1];
        if g.norms[k] < rhs {
            b.swap(k, k - 1);
            g = gram_schmidt(&b);
            k = (k - 1).max(1);
        } else {
            for j in (0..k - 1).rev() {
                size_reduce(&mut b, &mut g.mu, k, j);
            }
            k += 1;
        }
    }
    Lattice::new(l.dim, b).expect("LLL preserves independence")
}

/// Result of reducing a point into the fundamental parallelepiped.
#[derive(Clone, Debug, PartialEq)]
pub struct ModReduction {
    /// `y = Σ βⱼ bⱼ` with every `βⱼ ∈ [0, 1)`.
    pub y: QVec,
    /// `w = x − y`, a lattice vector.
    pub w: QVec,
    /// Integer coordinates of `w`.
    pub shift: Vec<BigInt>,
}

pub fn reduce_mod_lattice(x: &[Q], l: &Lattice) -> Result<ModReduction> {
    let a = l
        .coordinates(x)
        .ok_or_else(|| Error::invalid("point is outside the span of the lattice"))?;
    let shift: Vec<BigInt> = a.iter().map(floor_int).collect();
    let w = l.vector(&shift);
    let y = linalg::sub(x, &w);
    Ok(ModReduction { y, w, shift })
}

/// Basis of `L ∩ M`. Each output row is in `L` and in `M`, and every vector of
/// `L ∩ M` is an integer combination of the rows.
pub fn intersect_subspace(l: &Lattice, m: &Subspace) -> Result<Lattice> {
    if m.ambient() != l.dim() {
        return Err(Error::Dimension { expected: l.dim(), got: m.ambient() });
    }
    Ok(intersect_coordinates(l, m)?.1)
}

/// Like [`intersect_subspace`], also returning the rows' coordinates in `L`.
pub(crate) fn intersect_coordinates(l: &Lattice, m: &Subspace) -> Result<(Vec<Vec<BigInt>>, Lattice)> {
    let ann = m.annihilator();
    let k = l.rank();
    let kernel: Vec<Vec<BigInt>> = if ann.is_empty() {
        (0..k)
            .map(|i| (0..k).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect()
    } else if m.dimension() == 0 {
        Vec::new()
    } else {
        let mut cols: Vec<QVec> = ann
            .iter()
            .map(|a| l.basis().iter().map(|b| dot(b, a)).collect())
            .collect();
        for c in cols.iter_mut() {
            let d = Q::from_integer(common_denominator(c.iter()));
            c.iter_mut().for_each(|x| *x *= &d);
        }
        let a_int: Vec<Vec<BigInt>> = (0..k)
            .map(|i| cols.iter().map(|c| c[i].to_integer()).collect())
            .collect();
        hnf(&integer_left_kernel(&a_int))
    };
    let rows = kernel.iter().map(|c| l.vector(c)).collect();
    Ok((kernel, Lattice::new(l.dim(), rows)?))
}

/// Canonical keys for the cosets of a sublattice `Lsub ⊆ L`.
#[derive(Clone, Debug)]
pub struct CosetIndex {
    lattice: Lattice,
    hnf: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl CosetIndex {
    pub fn new(l: &Lattice, sub: &Lattice) -> Result<Self> {
        let coords = sub
            .basis()
            .iter()
            .map(|v| l.integer_coordinates(v).ok_or(Error::NotInLattice))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coordinates(l, &coords))
    }

    pub(crate) fn from_coordinates(l: &Lattice, coords: &[Vec<BigInt>]) -> Self {
        let h = hnf(coords);
        let pivots = h
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("HNF rows are nonzero"))
            .collect();
        CosetIndex { lattice: l.clone(), hnf: h, pivots }
    }

    /// Key of the coset containing the lattice vector with coordinates `c`.
    pub fn key_of_coordinates(&self, c: &[BigInt]) -> Vec<BigInt> {
        let mut a = c.to_vec();
        for (row, &p) in self.hnf.iter().zip(&self.pivots) {
            let f = a[p].div_floor(&row[p]);
            if !f.is_zero() {
                for (x, r) in a.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        a
    }

    pub fn key(&self, v: &[Q]) -> Result<Vec<BigInt>> {
        let c = self.lattice.integer_coordinates(v).ok_or(Error::NotInLattice)?;
        Ok(self.key_of_coordinates(&c))
    }

    /// True when the coordinates describe a vector of the sublattice.
    pub fn is_sublattice_member(&self, c: &[BigInt]) -> bool {
        self.key_of_coordinates(c).iter().all(Zero::is_zero)
    }
}

pub fn coset_key(v: &[Q], l: &Lattice, sub: &Lattice) -> Result<Vec<BigInt>> {
    CosetIndex::new(l, sub)?.key(v)
}

pub fn lattice_membership(l: &Lattice, v: &[Q]) -> bool {
    l.contains(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, qmat, qvec};

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn z2() -> Lattice {
        Lattice::identity(2)
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(hnf(&ints(&[&[2, 0], &[0, 3]])), ints(&[&[2, 0], &[0, 3]]));
        assert_eq!(hnf(&ints(&[&[0, 1], &[1, 0]])), ints(&[&[1, 0], &[0, 1]]));
        assert_eq!(hnf(&ints(&[&[1, 2], &[3, 4]])), ints(&[&[1, 0], &[0, 2]]));
        assert!(hnf(&ints(&[&[0, 0], &[0, 0]])).is_empty());
    }

    #[test]
    fn hnf_same_lattice_by_box_enumeration() {
        // Integer combinations of both bases agree on the box [-6, 6]².
        let gen = |rows: &[Vec<BigInt>]| {
            let mut pts = std::collections::BTreeSet::new();
            for a in -40i64..=40 {
                for b in -40i64..=40 {
                    let v: Vec<BigInt> = (0..2)
                        .map(|j| &rows[0][j] * a + &rows.get(1).map_or(BigInt::zero(), |r| r[j].clone()) * b)
                        .collect();
                    if v.iter().all(|x| x.abs() <= BigInt::from(6)) {
                        pts.insert(v);
                    }
                }
            }
            pts
        };
        let a = ints(&[&[1, 2], &[3, 4]]);
        assert_eq!(gen(&a), gen(&hnf(&a)));
    }

    #[test]
    fn transform_is_consistent() {
        let a = ints(&[&[4, 6], &[6, 9], &[2, 3]]);
        let (h, u) = hnf_with_transform(&a);
        assert_eq!(h, ints(&[&[2, 3]]));
        for (i, urow) in u.iter().enumerate() {
            let prod: Vec<BigInt> = (0..2)
                .map(|j| urow.iter().zip(&a).map(|(c, r)| c * &r[j]).sum())
                .collect();
            if i < h.len() {
                assert_eq!(prod, h[i]);
            } else {
                assert!(prod.iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn lll_examples() {
        let id = z2();
        assert_eq!(id.lll(), id);
        let skew = Lattice::new(2, qmat(&[&[1, 0], &[1000, 1]])).unwrap();
        let red = skew.lll();
        let shortest = red.basis().iter().map(|r| linalg::norm2_sq(r)).min().unwrap();
        assert_eq!(shortest, qi(1));
        for r in red.basis() {
            assert!(skew.contains(r));
        }
        for r in skew.basis() {
            assert!(red.contains(r));
        }
    }

    #[test]
    fn mod_reduction_examples() {
        let r = reduce_mod_lattice(&[q(5, 2), q(-5, 4)], &z2()).unwrap();
        assert_eq!(r.y, vec![q(1, 2), q(3, 4)]);
        assert_eq!(r.w, qvec(&[2, -2]));
        let r = reduce_mod_lattice(&[q(3, 10), q(2, 5)], &z2()).unwrap();
        assert_eq!(r.y, vec![q(3, 10), q(2, 5)]);
        assert_eq!(r.w, qvec(&[0, 0]));
        let l = Lattice::new(2, qmat(&[&[2, 0], &[0, 2]])).unwrap();
        let r = reduce_mod_lattice(&qvec(&[3, 1]), &l).unwrap();
        assert_eq!((r.y, r.w), (qvec(&[1, 1]), qvec(&[2, 0])));
    }

    #[test]
    fn intersection_examples() {
        let span = |v: &[i64]| Subspace::new(2, vec![qvec(v)]).unwrap();
        assert_eq!(intersect_subspace(&z2(), &span(&[1, 0])).unwrap().basis(), &[qvec(&[1, 0])]);
        assert_eq!(intersect_subspace(&z2(), &span(&[1, 1])).unwrap().basis(), &[qvec(&[1, 1])]);
        assert_eq!(intersect_subspace(&z2(), &span(&[2, 1])).unwrap().basis(), &[qvec(&[2, 1])]);
        assert_eq!(intersect_subspace(&z2(), &Subspace::zero(2)).unwrap().rank(), 0);
    }

    #[test]
    fn primitive_point_on_line_by_enumeration() {
        // Integer points a·(2,1)/g on span{(2,1)} with coefficients in [-10, 10].
        let mut on_line = Vec::new();
        for x in -10i64..=10 {
            for y in -10i64..=10 {
                if x == 2 * y && (x, y) != (0, 0) {
                    on_line.push((x, y));
                }
            }
        }
        let shortest = on_line.iter().min_by_key(|(x, y)| x * x + y * y).unwrap();
        assert_eq!(shortest.0.abs(), 2);
        assert_eq!(shortest.1.abs(), 1);
    }

    #[test]
    fn membership_examples() {
        assert!(z2().contains(&qvec(&[3, -7])));
        assert!(!z2().contains(&[q(1, 2), qi(0)]));
        let l = Lattice::new(2, qmat(&[&[2, 0], &[1, 1]])).unwrap();
        assert!(l.contains(&qvec(&[3, 1])));
        assert_eq!(l.integer_coordinates(&qvec(&[3, 1])).unwrap(), vec![BigInt::one(), BigInt::one()]);
    }

    #[test]
    fn coset_examples() {
        let sub = Lattice::new(2, vec![qvec(&[1, 0])]).unwrap();
        let k = |v: &[i64]| coset_key(&qvec(v), &z2(), &sub).unwrap();
        assert_eq!(k(&[2, 3]), k(&[5, 3]));
        assert_ne!(k(&[0, 3]), k(&[0, 4]));
        let sub = Lattice::new(2, vec![qvec(&[2, 1])]).unwrap();
        assert_eq!(
            coset_key(&qvec(&[2, 1]), &z2(), &sub).unwrap(),
            coset_key(&qvec(&[0, 0]), &z2(), &sub).unwrap()
        );
        assert_eq!(coset_key(&[q(1, 2), qi(0)], &z2(), &sub), Err(Error::NotInLattice));
    }

    #[test]
    fn subspace_membership() {
        let m = Subspace::new(3, vec![qvec(&[1, 1, 0])]).unwrap();
        assert!(m.contains(&qvec(&[-2, -2, 0])));
        assert!(!m.contains(&qvec(&[1, 0, 0])));
        assert_eq!(m.dimension(), 1);
        assert!(Subspace::zero(3).contains(&qvec(&[0, 0, 0])));
    }
}
