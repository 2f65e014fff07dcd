//! Truncated power series over exact rationals or arbitrary-precision reals.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::real::Real;

/// Scalar field used as series coefficients.
pub trait Field: Clone + PartialEq + fmt::Debug {
    /// Construction context: `()` for rationals, the precision for reals.
    type Ctx: Copy + fmt::Debug + PartialEq;

    const EXACT: bool;

    fn ctx(&self) -> Self::Ctx;
    fn from_i64(v: i64, ctx: Self::Ctx) -> Self;
    fn from_ratio(q: &BigRational, ctx: Self::Ctx) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(0, ctx)
    }
    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }
    fn mul_i64(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k, self.ctx()))
    }
    fn div_i64(&self, k: i64) -> Self {
        self.div(&Self::from_i64(k, self.ctx()))
    }

    /// Scalar exponential. Exact only at zero.
    fn exp(&self) -> Result<Self>;
    /// Natural logarithm. Exact only at one.
    fn ln(&self) -> Result<Self>;
    /// `self^t` for `self > 0`; over rationals `t` must be an integer.
    fn pow(&self, t: &Self) -> Result<Self>;
    /// Integer power.
    fn powi(&self, n: u32) -> Self {
        let mut r = Self::one(self.ctx());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }
}

impl Field for BigRational {
    type Ctx = ();
    const EXACT: bool = true;

    fn ctx(&self) {}
    fn from_i64(v: i64, _: ()) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(q: &BigRational, _: ()) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn exp(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Ok(<BigRational as One>::one())
        } else {
            Err(Error::NotExact("exp"))
        }
    }
    fn ln(&self) -> Result<Self> {
        if self.is_one() {
            Ok(<BigRational as Zero>::zero())
        } else {
            Err(Error::NotExact("ln"))
        }
    }
    fn pow(&self, t: &Self) -> Result<Self> {
        if !t.is_integer() {
            return Err(Error::NotExact("non-integer power"));
        }
        let e = t.to_integer();
        let k = e.abs().to_u32().ok_or(Error::NotExact("huge power"))?;
        let p = Field::powi(self, k);
        if e.is_negative() {
            if Zero::is_zero(&p) {
                return Err(Error::DivisionByZero);
            }
            Ok(p.recip())
        } else {
            Ok(p)
        }
    }
    fn powi(&self, n: u32) -> Self {
        num_traits::Pow::pow(self, n)
    }
}

impl Field for Real {
    type Ctx = usize;
    const EXACT: bool = false;

    fn ctx(&self) -> usize {
        self.precision()
    }
    fn from_i64(v: i64, p: usize) -> Self {
        Real::from_i64(v, p)
    }
    fn from_ratio(q: &BigRational, p: usize) -> Self {
        Real::from_ratio(q, p)
    }
    fn add(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn div(&self, o: &Self) -> Self {
        self.div_ref(o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        Real::to_f64(self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        Real::mul_i64(self, k)
    }
    fn div_i64(&self, k: i64) -> Self {
        Real::div_i64(self, k)
    }
    fn exp(&self) -> Result<Self> {
        Ok(Real::exp(self))
    }
    fn ln(&self) -> Result<Self> {
        if self.is_negative() || Real::is_zero(self) {
            return Err(Error::InvalidArgument("logarithm of a non-positive real".into()));
        }
        Ok(Real::ln(self))
    }
    fn pow(&self, t: &Self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::InvalidArgument("real power of a negative base".into()));
        }
        Ok(Real::pow(self, t))
    }
    fn powi(&self, n: u32) -> Self {
        Real::powi(self, n as usize)
    }
}

/// Nearest double of a big rational, robust to huge numerators/denominators.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if Zero::is_zero(q) {
        return 0.0;
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = 60 - (nb - db);
    let scaled = if shift >= 0 {
        (q.numer() << shift as usize) / q.denom()
    } else {
        q.numer() / (q.denom() << (-shift) as usize)
    };
    let m = scaled.to_f64().unwrap_or(f64::NAN);
    libm::ldexp(m, -(shift as i32))
}

/// A power series truncated after `x^order`; `coeffs.len() == order + 1`.
#[derive(Clone, PartialEq)]
pub struct TruncSeries<S: Field> {
    coeffs: Vec<S>,
    ctx: S::Ctx,
}

impl<S: Field> fmt::Debug for TruncSeries<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncSeries").field("order", &self.order()).field("coeffs", &self.coeffs).finish()
    }
}

impl<S: Field> TruncSeries<S> {
    pub fn zero(order: usize, ctx: S::Ctx) -> Self {
        TruncSeries { coeffs: vec![S::zero(ctx); order + 1], ctx }
    }

    pub fn constant(c: S, order: usize) -> Self {
        let ctx = c.ctx();
        let mut s = Self::zero(order, ctx);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize, ctx: S::Ctx) -> Self {
        Self::constant(S::one(ctx), order)
    }

    /// `x` truncated at `order`.
    pub fn x(order: usize, ctx: S::Ctx) -> Self {
        let mut s = Self::zero(order, ctx);
        if order >= 1 {
            s.coeffs[1] = S::one(ctx);
        }
        s
    }

    /// Builds a series from coefficients; missing ones are zero, extra ones dropped.
    pub fn from_coeffs(mut coeffs: Vec<S>, order: usize, ctx: S::Ctx) -> Self {
        coeffs.resize(order + 1, S::zero(ctx));
        TruncSeries { coeffs, ctx }
    }

    pub fn from_i64s(vals: &[i64], order: usize, ctx: S::Ctx) -> Self {
        Self::from_coeffs(vals.iter().map(|&v| S::from_i64(v, ctx)).collect(), order, ctx)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ctx(&self) -> S::Ctx {
        self.ctx
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(|| S::zero(self.ctx))
    }

    pub fn set_coeff(&mut self, k: usize, v: S) {
        if k < self.coeffs.len() {
            self.coeffs[k] = v;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        TruncSeries { coeffs: self.coeffs[..=order].to_vec(), ctx: self.ctx }
    }

    /// Zero-pads (or truncates) to exactly `order`.
    pub fn resized(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order, self.ctx)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let coeffs = (0..=n).map(|k| self.coeffs[k].add(&o.coeffs[k])).collect();
        TruncSeries { coeffs, ctx: self.ctx }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let coeffs = (0..=n).map(|k| self.coeffs[k].sub(&o.coeffs[k])).collect();
        TruncSeries { coeffs, ctx: self.ctx }
    }

    pub fn neg(&self) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), ctx: self.ctx }
    }

    pub fn scale(&self, c: &S) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|v| v.mul(c)).collect(), ctx: self.ctx }
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let mut out = vec![S::zero(self.ctx); n + 1];
        for (i, a) in self.coeffs[..=n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs[..=n - i].iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TruncSeries { coeffs: out, ctx: self.ctx }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut r = Self::one(self.order(), self.ctx);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Formal exponential via `(exp a)' = a' exp a`.
    pub fn exp(&self) -> Result<Self> {
        let n = self.order();
        let a0 = &self.coeffs[0];
        let head = if a0.is_zero() {
            S::one(self.ctx)
        } else if S::EXACT {
            return Err(Error::NonzeroConstant("exp"));
        } else {
            a0.exp()?
        };
        let mut e = vec![S::zero(self.ctx); n + 1];
        e[0] = head;
        for m in 1..=n {
            let mut acc = S::zero(self.ctx);
            for k in 1..=m {
                let a = &self.coeffs[k];
                if a.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul_i64(k as i64).mul(&e[m - k]));
            }
            e[m] = acc.div_i64(m as i64);
        }
        Ok(TruncSeries { coeffs: e, ctx: self.ctx })
    }

    /// Formal `log(1 + a)`.
    pub fn log1p(&self) -> Result<Self> {
        let n = self.order();
        let a0 = &self.coeffs[0];
        if !a0.is_zero() {
            if S::EXACT {
                return Err(Error::NonzeroConstant("log1p"));
            }
            let one = S::one(self.ctx);
            let base = one.add(a0);
            let rest = self.sub(&Self::constant(a0.clone(), n)).scale(&one.div(&base));
            let mut out = rest.log1p()?;
            out.coeffs[0] = base.ln()?;
            return Ok(out);
        }
        // b = log(1+a): (1+a) b' = a'
        let mut b = vec![S::zero(self.ctx); n + 1];
        for m in 1..=n {
            let mut acc = self.coeffs[m].mul_i64(m as i64);
            for k in 1..m {
                if self.coeffs[m - k].is_zero() {
                    continue;
                }
                acc = acc.sub(&b[k].mul_i64(k as i64).mul(&self.coeffs[m - k]));
            }
            b[m] = acc.div_i64(m as i64);
        }
        Ok(TruncSeries { coeffs: b, ctx: self.ctx })
    }

    /// Formal logarithm of a series with constant term one (exact) or positive (real).
    pub fn log(&self) -> Result<Self> {
        let one = S::one(self.ctx);
        let mut shifted = self.clone();
        shifted.coeffs[0] = self.coeffs[0].sub(&one);
        shifted.log1p()
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.order();
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv0 = S::one(self.ctx).div(a0);
        let mut r = vec![S::zero(self.ctx); n + 1];
        r[0] = inv0.clone();
        for m in 1..=n {
            let mut acc = S::zero(self.ctx);
            for k in 1..=m {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[k].mul(&r[m - k]));
            }
            r[m] = acc.neg().mul(&inv0);
        }
        Ok(TruncSeries { coeffs: r, ctx: self.ctx })
    }

    /// `a(x^j)` truncated at `order`.
    pub fn substitute_power(&self, j: usize, order: usize) -> Self {
        assert!(j >= 1, "substitute_power needs j >= 1");
        let mut out = vec![S::zero(self.ctx); order + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = k * j;
            if e > order {
                break;
            }
            out[e] = c.clone();
        }
        TruncSeries { coeffs: out, ctx: self.ctx }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero(x.ctx());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Formal derivative; the order drops by one (floored at zero).
    pub fn derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero(0, self.ctx);
        }
        let coeffs = (1..=n).map(|k| self.coeffs[k].mul_i64(k as i64)).collect();
        TruncSeries { coeffs, ctx: self.ctx }
    }

    /// Coefficients as doubles.
    pub fn to_f64s(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }
}

impl TruncSeries<BigRational> {
    /// Rounds every coefficient to a real series.
    pub fn to_real(&self, prec: usize) -> TruncSeries<Real> {
        TruncSeries { coeffs: self.coeffs.iter().map(|c| Real::from_ratio(c, prec)).collect(), ctx: prec }
    }
}

/// A scalar tagged with its field.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(BigRational),
    Real(Real),
}

impl Scalar {
    pub fn rational(n: i64, d: i64) -> Self {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(q) => ratio_to_f64(q),
            Scalar::Real(r) => r.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Real(_) => None,
        }
    }

    /// Converts to a real at `prec` bits (rationals are rounded once).
    pub fn to_real(&self, prec: usize) -> Real {
        match self {
            Scalar::Rational(q) => Real::from_ratio(q, prec),
            Scalar::Real(r) => r.with_precision(prec.max(r.precision())),
        }
    }

    /// True when the value is a non-negative integer rational.
    pub fn is_nonneg_integer(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_integer() && !q.is_negative())
    }
}

/// A truncated series tagged with its field; binary operations check the tags.
#[derive(Clone, Debug, PartialEq)]
pub enum Series {
    Rational(TruncSeries<BigRational>),
    Real(TruncSeries<Real>),
}

macro_rules! series_binop {
    ($name:ident) => {
        pub fn $name(&self, o: &Series) -> Result<Series> {
            match (self, o) {
                (Series::Rational(a), Series::Rational(b)) => Ok(Series::Rational(a.$name(b))),
                (Series::Real(a), Series::Real(b)) => Ok(Series::Real(a.$name(b))),
                _ => Err(Error::FieldMismatch),
            }
        }
    };
}

impl Series {
    series_binop!(add);
    series_binop!(sub);
    series_binop!(mul);

    pub fn order(&self) -> usize {
        match self {
            Series::Rational(a) => a.order(),
            Series::Real(a) => a.order(),
        }
    }

    pub fn exp(&self) -> Result<Series> {
        match self {
            Series::Rational(a) => a.exp().map(Series::Rational),
            Series::Real(a) => a.exp().map(Series::Real),
        }
    }

    pub fn log1p(&self) -> Result<Series> {
        match self {
            Series::Rational(a) => a.log1p().map(Series::Rational),
            Series::Real(a) => a.log1p().map(Series::Real),
        }
    }

    pub fn substitute_power(&self, j: usize, order: usize) -> Series {
        match self {
            Series::Rational(a) => Series::Rational(a.substitute_power(j, order)),
            Series::Real(a) => Series::Real(a.substitute_power(j, order)),
        }
    }

    pub fn derivative(&self) -> Series {
        match self {
            Series::Rational(a) => Series::Rational(a.derivative()),
            Series::Real(a) => Series::Real(a.derivative()),
        }
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        match (self, x) {
            (Series::Rational(a), Scalar::Rational(v)) => Ok(Scalar::Rational(a.eval(v))),
            (Series::Real(a), Scalar::Real(v)) => Ok(Scalar::Real(a.eval(v))),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        match self {
            Series::Rational(a) => Scalar::Rational(a.coeff(k)),
            Series::Real(a) => Scalar::Real(a.coeff(k)),
        }
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        match self {
            Series::Rational(a) => a.to_f64s(),
            Series::Real(a) => a.to_f64s(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn qs(v: &[i64], order: usize) -> TruncSeries<Q> {
        TruncSeries::from_i64s(v, order, ())
    }

    #[test]
    fn add_examples() {
        assert_eq!(qs(&[1, 1], 3).add(&qs(&[1, -1], 3)), qs(&[2], 3));
        let a = qs(&[3, 1, 4, 1], 3);
        assert_eq!(a.add(&TruncSeries::zero(3, ())), a);
        assert_eq!(qs(&[0, 1, 1], 2).add(&qs(&[0, 0, 1], 2)), qs(&[0, 1, 2], 2));
        assert_eq!(qs(&[1, 1, 1], 2).add(&qs(&[1], 5)).order(), 2);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(qs(&[1, 1], 2).mul(&qs(&[1, -1], 2)), qs(&[1, 0, -1], 2));
        let a = qs(&[2, 7, 1, 8], 3);
        assert_eq!(a.mul(&TruncSeries::one(3, ())), a);
        assert!(qs(&[0, 1], 1).mul(&qs(&[0, 1], 1)).is_zero());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(TruncSeries::<Q>::zero(5, ()).exp().unwrap(), TruncSeries::one(5, ()));
        let e = TruncSeries::<Q>::x(8, ()).exp().unwrap();
        let mut f = BigInt::from(1);
        for k in 0..=8i64 {
            if k > 0 {
                f *= k;
            }
            assert_eq!(e.coeff(k as usize), Q::new(1.into(), f.clone()));
        }
        let back = qs(&[0, 1], 10).log1p().unwrap().exp().unwrap();
        assert_eq!(back, qs(&[1, 1], 10));
        assert_eq!(qs(&[1, 1], 3).exp(), Err(Error::NonzeroConstant("exp")));
    }

    #[test]
    fn log1p_examples() {
        assert!(TruncSeries::<Q>::zero(4, ()).log1p().unwrap().is_zero());
        let x = TruncSeries::<Q>::x(9, ());
        let em1 = x.exp().unwrap().sub(&TruncSeries::one(9, ()));
        assert_eq!(em1.log1p().unwrap(), x);
        let l = x.log1p().unwrap();
        for k in 1..=9i64 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(l.coeff(k as usize), q(sign, k));
        }
    }

    #[test]
    fn substitute_power_examples() {
        assert_eq!(qs(&[0, 1, 1], 4).substitute_power(2, 4), qs(&[0, 0, 1, 0, 1], 4));
        let a = qs(&[5, 4, 3], 2);
        assert_eq!(a.substitute_power(1, 2), a);
        assert_eq!(qs(&[1, 1], 1).substitute_power(3, 2), qs(&[1], 2));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(qs(&[1, 1, 1], 2).eval(&<Q as Zero>::zero()), <Q as One>::one());
        assert_eq!(qs(&[0, 1], 1).eval(&q(1, 2)), q(1, 2));
        // Independent check against the scalar exponential.
        let prec = 192;
        let s = TruncSeries::<Real>::x(40, prec).exp().unwrap();
        let v = s.eval(&Real::one(prec));
        let e = Real::e(prec);
        assert!((v - e).abs().to_f64() < 1e-30);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(qs(&[0, 0, 1], 2).derivative(), qs(&[0, 2], 1));
        assert!(qs(&[7], 3).derivative().is_zero());
        let e = TruncSeries::<Q>::x(8, ()).exp().unwrap();
        assert_eq!(e.derivative(), e.truncate(7));
    }

    #[test]
    fn inverse_and_log() {
        let a = qs(&[1, 1], 6);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, qs(&[1, -1, 1, -1, 1, -1, 1], 6));
        assert_eq!(a.log().unwrap(), qs(&[0, 1], 6).log1p().unwrap());
    }

    #[test]
    fn real_exp_with_constant() {
        let prec = 192;
        let a = TruncSeries::<Real>::from_i64s(&[1, 1], 6, prec);
        let e = a.exp().unwrap();
        let expected = TruncSeries::<Real>::x(6, prec).exp().unwrap().scale(&Real::e(prec));
        for k in 0..=6 {
            assert!((e.coeff(k) - expected.coeff(k)).abs().to_f64() < 1e-50);
        }
        let l = e.log1p().unwrap();
        let direct = TruncSeries::<Real>::from_coeffs(vec![Real::one(prec)], 6, prec).add(&e).log().unwrap();
        assert_eq!(l.order(), direct.order());
    }

    #[test]
    fn field_mismatch() {
        let a = Series::Rational(qs(&[1], 2));
        let b = Series::Real(TruncSeries::<Real>::one(2, 64));
        assert_eq!(a.add(&b), Err(Error::FieldMismatch));
        assert_eq!(a.mul(&b), Err(Error::FieldMismatch));
        assert!(a.add(&a).is_ok());
    }

    #[test]
    fn ratio_to_f64_extremes() {
        let big = Q::new(BigInt::from(10).pow(400u32), BigInt::from(3) * BigInt::from(10).pow(399u32));
        assert!((ratio_to_f64(&big) - 10.0 / 3.0).abs() < 1e-14);
        assert_eq!(ratio_to_f64(&q(-1, 4)), -0.25);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_series(order: usize) -> impl Strategy<Value = TruncSeries<Q>> {
            proptest::collection::vec((-20i64..20, 1i64..6), order + 1)
                .prop_map(move |v| TruncSeries::from_coeffs(v.into_iter().map(|(n, d)| q(n, d)).collect(), order, ()))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn exp_log1p_inverse(mut a in arb_series(7)) {
                a.set_coeff(0, <Q as Zero>::zero());
                let e = a.exp().unwrap();
                let back = e.sub(&TruncSeries::one(7, ())).log1p().unwrap();
                prop_assert_eq!(back, a.clone());
                prop_assert_eq!(a.log1p().unwrap().exp().unwrap().sub(&TruncSeries::one(7, ())), a);
            }

            #[test]
            fn mul_commutative_associative(a in arb_series(6), b in arb_series(6), c in arb_series(6)) {
                prop_assert_eq!(a.mul(&b), b.mul(&a));
                prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            }

            #[test]
            fn substitute_power_composes(a in arb_series(12), j in 1usize..4, k in 1usize..4) {
                let two = a.substitute_power(j, 12).substitute_power(k, 12);
                prop_assert_eq!(two, a.substitute_power(j * k, 12));
            }

            #[test]
            fn real_mul_matches_exact(a in arb_series(6), b in arb_series(6)) {
                let exact = a.mul(&b).to_real(192);
                let approx = a.to_real(192).mul(&b.to_real(192));
                for k in 0..=6 {
                    let d = (exact.coeff(k) - approx.coeff(k)).abs().to_f64();
                    let scale = exact.coeff(k).abs().to_f64().max(1.0);
                    prop_assert!(d <= scale * libm::ldexp(1.0, -192 + 16));
                }
            }
        }
    }
}
