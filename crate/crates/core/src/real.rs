//! Arbitrary-precision reals with an explicit working precision.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use astro_float_num::{BigFloat, Consts, Radix, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 192;

/// A binary floating-point number carrying its precision.
///
/// Binary operations round to the larger of the two operand precisions, so a
/// computation never drops below the precision it was seeded with.
#[derive(Clone)]
pub struct Real {
    value: BigFloat,
    prec: usize,
}

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

fn from_biguint(v: &BigUint, prec: usize) -> BigFloat {
    if v.is_zero() {
        return BigFloat::from_u64(0, prec);
    }
    let words: alloc::vec::Vec<Word> = v.to_u64_digits().into_iter().map(|w| w as Word).collect();
    let e = (words.len() * 64) as i32;
    let exact = BigFloat::from_words(&words, Sign::Pos, e);
    let mut r = exact;
    r.set_precision(prec, RM).expect("precision");
    r
}

impl Real {
    pub fn zero(prec: usize) -> Self {
        Real { value: BigFloat::from_u64(0, prec), prec }
    }

    pub fn one(prec: usize) -> Self {
        Real::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: usize) -> Self {
        Real { value: BigFloat::from_i64(v, prec), prec }
    }

    pub fn from_u128(v: u128, prec: usize) -> Self {
        Real { value: BigFloat::from_u128(v, prec), prec }
    }

    pub fn from_f64(v: f64, prec: usize) -> Self {
        Real { value: BigFloat::from_f64(v, prec), prec }
    }

    pub fn from_biguint(v: &BigUint, prec: usize) -> Self {
        Real { value: from_biguint(v, prec), prec }
    }

    pub fn from_bigint(v: &BigInt, prec: usize) -> Self {
        let r = Real::from_biguint(v.magnitude(), prec);
        if v.is_negative() {
            -r
        } else {
            r
        }
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_ratio(q: &BigRational, prec: usize) -> Self {
        let n = Real::from_bigint(q.numer(), prec + 64);
        let d = Real::from_bigint(q.denom(), prec + 64);
        let v = n.value.div(&d.value, prec, RM);
        Real { value: v, prec }
    }

    /// Parses a decimal literal such as `2.397678` or `-1e-3`.
    pub fn parse(s: &str, prec: usize) -> Option<Self> {
        let mut cc = consts();
        let v = BigFloat::parse(s, Radix::Dec, prec, RM, &mut cc);
        if v.is_nan() {
            None
        } else {
            Some(Real { value: v, prec })
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        let mut v = self.value.clone();
        v.set_precision(prec, RM).expect("precision");
        Real { value: v, prec }
    }

    pub fn raw(&self) -> &BigFloat {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.value.is_zero() && self.value.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    pub fn abs(&self) -> Self {
        Real { value: self.value.abs(), prec: self.prec }
    }

    fn p2(&self, o: &Real) -> usize {
        self.prec.max(o.prec)
    }

    pub fn add_ref(&self, o: &Real) -> Real {
        let p = self.p2(o);
        Real { value: self.value.add(&o.value, p, RM), prec: p }
    }

    pub fn sub_ref(&self, o: &Real) -> Real {
        let p = self.p2(o);
        Real { value: self.value.sub(&o.value, p, RM), prec: p }
    }

    pub fn mul_ref(&self, o: &Real) -> Real {
        let p = self.p2(o);
        Real { value: self.value.mul(&o.value, p, RM), prec: p }
    }

    pub fn div_ref(&self, o: &Real) -> Real {
        let p = self.p2(o);
        Real { value: self.value.div(&o.value, p, RM), prec: p }
    }

    pub fn mul_i64(&self, k: i64) -> Real {
        self.mul_ref(&Real::from_i64(k, self.prec))
    }

    pub fn div_i64(&self, k: i64) -> Real {
        self.div_ref(&Real::from_i64(k, self.prec))
    }

    pub fn powi(&self, n: usize) -> Real {
        Real { value: self.value.powi(n, self.prec, RM), prec: self.prec }
    }

    pub fn sqrt(&self) -> Real {
        Real { value: self.value.sqrt(self.prec, RM), prec: self.prec }
    }

    pub fn exp(&self) -> Real {
        let mut cc = consts();
        Real { value: self.value.exp(self.prec, RM, &mut cc), prec: self.prec }
    }

    pub fn ln(&self) -> Real {
        let mut cc = consts();
        Real { value: self.value.ln(self.prec, RM, &mut cc), prec: self.prec }
    }

    /// `self^t` for a positive base.
    pub fn pow(&self, t: &Real) -> Real {
        if t.is_zero() {
            return Real::one(self.p2(t));
        }
        if self.is_zero() {
            return Real::zero(self.p2(t));
        }
        self.ln().mul_ref(t).exp()
    }

    pub fn pi(prec: usize) -> Real {
        let mut cc = consts();
        Real { value: cc.pi(prec, RM), prec }
    }

    pub fn e(prec: usize) -> Real {
        let mut cc = consts();
        Real { value: cc.e(prec, RM), prec }
    }

    /// Nearest `f64` (truncated to two mantissa words, then rounded once).
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        if self.value.is_zero() || words.is_empty() {
            return 0.0;
        }
        let top = words[words.len() - 1] as u64;
        let next = if words.len() > 1 { words[words.len() - 2] as u64 } else { 0 };
        // 0.top|next * 2^e; fold the second word in as a sticky tail.
        let hi = (top as f64) + (next as f64) * libm::ldexp(1.0, -64);
        let mag = libm::ldexp(hi, e as i32 - 64);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> alloc::string::String {
        use alloc::format;
        let v = self.to_f64();
        if digits <= 15 || !v.is_finite() || v == 0.0 {
            return format!("{:.*e}", digits.saturating_sub(1), v);
        }
        let mut cc = consts();
        let rounded_prec = ((digits as f64) * 3.33) as usize + 8;
        let mut tmp = self.value.clone();
        tmp.set_precision(rounded_prec.max(64), RM).expect("precision");
        tmp.format(Radix::Dec, RM, &mut cc).unwrap_or_else(|_| format!("{v:e}"))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:e}, {} bits)", self.to_f64(), self.prec)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.*}", p, self.to_f64()),
            None => write!(f, "{}", self.to_f64()),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, o: &Real) -> bool {
        self.value.cmp(&o.value) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, o: &Real) -> Option<Ordering> {
        self.value.cmp(&o.value).map(|c| c.cmp(&0))
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, o: &Real) -> Real {
                self.$f(o)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, o: Real) -> Real {
                self.$f(&o)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, o: &Real) -> Real {
                self.$f(o)
            }
        }
    };
}

bin_op!(Add, add, add_ref);
bin_op!(Sub, sub, sub_ref);
bin_op!(Mul, mul, mul_ref);
bin_op!(Div, div, div_ref);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { value: BigFloat::neg(&self.value), prec: self.prec }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { value: BigFloat::neg(&self.value), prec: self.prec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn to_f64_round_trips() {
        for &v in &[0.75, 3.0, -12345.678, 1e-300, 1.0, 2.5e200, -7.0 / 3.0] {
            assert_eq!(Real::from_f64(v, 192).to_f64(), v);
        }
        assert_eq!(Real::zero(192).to_f64(), 0.0);
    }

    #[test]
    fn constants() {
        let e = Real::e(192).to_f64();
        assert!((e - core::f64::consts::E).abs() < 1e-15);
        let pi = Real::pi(192).to_f64();
        assert!((pi - core::f64::consts::PI).abs() < 1e-15);
        let one = Real::one(192).exp().ln();
        assert!((one.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn exact_rational_conversion() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let r = Real::from_ratio(&q, 192);
        let back = r.mul_i64(3) - Real::one(192);
        assert!(back.abs().to_f64() < 1e-55);
        let big = BigRational::from_integer(BigInt::from(10).pow(80u32));
        let r = Real::from_ratio(&big, 192);
        assert!((r.to_f64() / 1e80 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn precision_is_max_of_operands() {
        let a = Real::one(128);
        let b = Real::one(256);
        assert_eq!((&a + &b).precision(), 256);
    }

    #[test]
    fn parse_and_order() {
        let a = Real::parse("2.397678", 192).unwrap();
        assert!((a.to_f64() - 2.397678).abs() < 1e-15);
        assert!(Real::from_i64(1, 64) < Real::from_i64(2, 64));
        assert!(Real::parse("garbage", 64).is_none());
    }
}
