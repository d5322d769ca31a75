//! Dense exact linear algebra over rationals. Vectors are rows.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{common_denominator, Q, QVec};

pub fn zeros(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Q], s: &Q) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Q]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn norm2_sq(a: &[Q]) -> Q {
    dot(a, a)
}

/// `coeffs · rows` for integer coefficients.
pub fn combine(coeffs: &[BigInt], rows: &[QVec], dim: usize) -> QVec {
    let mut out = zeros(dim);
    for (c, row) in coeffs.iter().zip(rows) {
        if c.is_zero() {
            continue;
        }
        let c = Q::from_integer(c.clone());
        for (o, r) in out.iter_mut().zip(row) {
            *o += &c * r;
        }
    }
    out
}

pub fn combine_i64(coeffs: &[i64], rows: &[QVec], dim: usize) -> QVec {
    let mut out = zeros(dim);
    for (&c, row) in coeffs.iter().zip(rows) {
        if c == 0 {
            continue;
        }
        let c = Q::from_integer(BigInt::from(c));
        for (o, r) in out.iter_mut().zip(row) {
            *o += &c * r;
        }
    }
    out
}

/// `v · M` for a row vector `v` and a matrix with `v.len()` rows.
pub fn vec_mat(v: &[Q], m: &[QVec], cols: usize) -> QVec {
    let mut out = zeros(cols);
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o += vi * r;
        }
    }
    out
}

pub fn transpose(m: &[QVec], cols: usize) -> Vec<QVec> {
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[QVec], b: &[QVec], cols: usize) -> Vec<QVec> {
    a.iter().map(|row| vec_mat(row, b, cols)).collect()
}

/// Reduced row echelon form; returns the matrix and its pivot columns.
pub fn rref(m: &[QVec], cols: usize) -> (Vec<QVec>, Vec<usize>) {
    let mut a: Vec<QVec> = m.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[row].clone();
        for (i, r) in a.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        pivots.push(col);
        row += 1;
    }
    a.truncate(row);
    (a, pivots)
}

pub fn rank(m: &[QVec], cols: usize) -> usize {
    rref(m, cols).1.len()
}

/// Basis of `{x : M x = 0}` (right null space), as rows.
pub fn nullspace(m: &[QVec], cols: usize) -> Vec<QVec> {
    let (r, pivots) = rref(m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = zeros(cols);
            v[f] = Q::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square nonsingular matrix.
pub fn inverse(m: &[QVec]) -> Option<Vec<QVec>> {
    let n = m.len();
    let aug: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Gram–Schmidt data for independent rows: `bstar`, `mu[i][j]` (j < i), `‖b*_i‖²`.
#[derive(Clone, Debug)]
pub struct Gso {
    pub bstar: Vec<QVec>,
    pub mu: Vec<QVec>,
    pub norms: QVec,
}

pub fn gram_schmidt(rows: &[QVec]) -> Gso {
    let k = rows.len();
    let mut bstar: Vec<QVec> = Vec::with_capacity(k);
    let mut mu = vec![vec![Q::zero(); k]; k];
    let mut norms = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = rows[i].clone();
        for j in 0..i {
            let m = dot(&rows[i], &bstar[j]) / &norms[j];
            for (x, y) in v.iter_mut().zip(&bstar[j]) {
                *x -= &m * y;
            }
            mu[i][j] = m;
        }
        mu[i][i] = Q::one();
        norms.push(norm2_sq(&v));
        bstar.push(v);
    }
    Gso { bstar, mu, norms }
}

/// Multiplies each row by the lcm of its denominators.
pub fn integer_rows(m: &[QVec]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let d = Q::from_integer(common_denominator(row.iter()));
            row.iter().map(|x| (x * &d).to_integer()).collect()
        })
        .collect()
}

pub fn lex_cmp_int(a: &[BigInt], b: &[BigInt]) -> std::cmp::Ordering {
    a.iter().cmp(b.iter())
}

pub fn max_abs(a: &[Q]) -> Q {
    a.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}
