//! Exact rational helpers shared by every module.
//!
//! All correctness-bearing arithmetic in the crate goes through [`Q`]
//! (arbitrary-precision rationals). Irrational quantities such as `p`-th roots
//! are only ever handled through rational lower/upper brackets.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type QVec = Vec<Q>;

/// Number of fractional bits used for sampled (dyadic) coordinates.
pub const DYADIC_BITS: u32 = 40;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn qvec(vals: &[i64]) -> QVec {
    vals.iter().map(|&v| qi(v)).collect()
}

pub fn qmat(rows: &[&[i64]]) -> Vec<QVec> {
    rows.iter().map(|r| qvec(r)).collect()
}

/// Parses `"a"`, `"-a/b"` or `"a/b"` into a canonical rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::invalid(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(n))
        }
    }
}

/// Canonical `"num/den"` (or plain integer) rendering.
pub fn format_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor_int(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil_int(x: &Q) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

pub fn pow_q(x: &Q, p: u32) -> Q {
    num_traits::pow(x.clone(), p as usize)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Nearest dyadic rational with `bits` fractional bits.
pub fn dyadic_from_f64(v: f64, bits: u32) -> Q {
    let scaled = (v * (1u64 << bits) as f64).round();
    let num = BigInt::from(scaled as i128);
    Q::new(num, BigInt::one() << bits)
}

/// Rational bracket `lo <= x^(1/p) <= hi` with `hi - lo = 2^-bits`.
pub fn root_bounds(x: &Q, p: u32, bits: u32) -> (Q, Q) {
    assert!(p >= 1);
    assert!(!x.is_negative(), "root of a negative rational");
    if p == 1 {
        return (x.clone(), x.clone());
    }
    let shift = BigInt::one() << (bits as usize * p as usize);
    let scaled = floor_int(&(x * Q::from_integer(shift)));
    let r = scaled.nth_root(p);
    let den = BigInt::one() << bits;
    let lo = Q::new(r.clone(), den.clone());
    if pow_q(&lo, p) == *x {
        return (lo.clone(), lo);
    }
    (lo, Q::new(r + 1, den))
}

pub fn root_upper(x: &Q, p: u32) -> Q {
    root_bounds(x, p, 48).1
}

pub fn root_lower(x: &Q, p: u32) -> Q {
    root_bounds(x, p, 48).0
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(vals: impl IntoIterator<Item = &'a Q>) -> BigInt {
    vals.into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

pub fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Internal(format!("integer {x} exceeds 64 bits")))
}

pub fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::Internal(format!("integer {x} exceeds 128 bits")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/4").unwrap(), q(3, 2));
        assert_eq!(parse_rational(" -7 ").unwrap(), qi(-7));
        assert_eq!(format_rational(&q(-3, 6)), "-1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_int(&q(-5, 4)), BigInt::from(-2));
        assert_eq!(ceil_int(&q(-5, 4)), BigInt::from(-1));
        assert_eq!(floor_int(&q(5, 4)), BigInt::from(1));
        assert_eq!(ceil_int(&qi(3)), BigInt::from(3));
    }

    #[test]
    fn root_brackets() {
        let (lo, hi) = root_bounds(&qi(2), 2, 30);
        assert!(pow_q(&lo, 2) <= qi(2) && pow_q(&hi, 2) >= qi(2));
        assert_eq!(root_bounds(&qi(9), 2, 10), (qi(3), qi(3)));
        let (lo, hi) = root_bounds(&q(1, 3), 3, 20);
        assert!(pow_q(&lo, 3) <= q(1, 3) && pow_q(&hi, 3) >= q(1, 3));
    }
}
