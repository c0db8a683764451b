//! Dual numeric backend: exact rationals for induction and verification,
//! floats for long Monte-Carlo orbits.

use std::fmt::{Debug, Display};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Scalar operations needed by the induction and zippered-rectangle maps.
pub trait Scalar: Clone + PartialOrd + PartialEq + Debug + Display + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_u64(v: u64) -> Self;
    fn from_biguint(v: &BigUint) -> Self;
    fn to_f64(&self) -> f64;
    fn is_positive(&self) -> bool;
    /// Natural log, computed without overflowing on big rationals.
    fn ln(&self) -> f64;
    /// Whether comparisons are exact (rational backend) or float.
    fn exact() -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn from_biguint(v: &BigUint) -> Self {
        biguint_to_f64(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from_biguint(Sign::Plus, v.clone()))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn ln(&self) -> f64 {
        // ln(n/d) stays finite even when n, d overflow f64
        let n = self.numer();
        let d = self.denom();
        if !Signed::is_positive(self) {
            return f64::NAN;
        }
        ln_bigint(&n.abs()) - ln_bigint(d)
    }
    fn exact() -> bool {
        true
    }
}

/// Mantissa-exponent split: value ~= mant * 2^exp with mant in [1, 2).
fn split_biguint(v: &BigUint) -> (f64, i64) {
    let bits = v.bits();
    if bits == 0 {
        return (0.0, 0);
    }
    if bits <= 53 {
        return (v.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 53;
    let top = v >> shift;
    (top.to_f64().unwrap_or(0.0), shift as i64)
}

/// f64 conversion that survives integers beyond the f64 range.
pub fn biguint_to_f64(v: &BigUint) -> f64 {
    let (m, e) = split_biguint(v);
    if e == 0 {
        m
    } else if e > 1100 {
        f64::INFINITY
    } else {
        m * 2f64.powi(e as i32)
    }
}

/// f64 conversion of a ratio of big integers via aligned mantissas.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let sign = if Signed::is_negative(r) { -1.0 } else { 1.0 };
    let (mn, en) = split_biguint(r.numer().magnitude());
    let (md, ed) = split_biguint(r.denom().magnitude());
    if md == 0.0 {
        return f64::NAN;
    }
    if mn == 0.0 {
        return 0.0;
    }
    let e = en - ed;
    if e > 1100 {
        return sign * f64::INFINITY;
    }
    if e < -1100 {
        return 0.0;
    }
    sign * (mn / md) * 2f64.powi(e as i32)
}

/// Natural log of a positive big integer.
pub fn ln_bigint(v: &BigInt) -> f64 {
    let (m, e) = split_biguint(v.magnitude());
    m.ln() + (e as f64) * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn big_conversions() {
        let v = BigUint::from(3u32).pow(400);
        let f = biguint_to_f64(&v);
        assert_relative_eq!(f.ln(), 400.0 * 3f64.ln(), max_relative = 1e-12);

        let r = BigRational::new(BigInt::from(3).pow(400), BigInt::from(2).pow(633));
        let f = rational_to_f64(&r);
        assert_relative_eq!(
            f.ln(),
            400.0 * 3f64.ln() - 633.0 * 2f64.ln(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            Scalar::ln(&r),
            400.0 * 3f64.ln() - 633.0 * 2f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rational_ops() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(Scalar::to_f64(&half.add(&third)), 5.0 / 6.0);
        assert!(Scalar::is_positive(&half.sub(&third)));
        assert!(<BigRational as Scalar>::exact());
        assert!(!<f64 as Scalar>::exact());
    }
}
