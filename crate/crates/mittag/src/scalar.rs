//! Exact scalars with a p-adic absolute value.
//!
//! A [`PScalar`] is a rational number in lowest terms tagged with the prime
//! of its ambient field. Norms are never materialized as real numbers: the
//! absolute value |x| = p^e is manipulated through its exact rational
//! exponent e, see [`NormExp`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin for u64 moduli.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let pow_mod = |base: u64, mut exp: u64, m: u64| -> u64 {
        let mut acc: u128 = 1;
        let mut b: u128 = (base % m) as u128;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % m as u128;
            }
            b = b * b % m as u128;
            exp >>= 1;
        }
        acc as u64
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The ambient non-archimedean field: Q with the p-adic absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PContext {
    p: u64,
}

impl PContext {
    /// Requires p prime.
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        Ok(PContext { p })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn scalar_from_ratio(&self, value: BigRational) -> PScalar {
        PScalar { ctx: *self, value }
    }

    pub fn scalar_i64(&self, n: i64) -> PScalar {
        self.scalar_from_ratio(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn scalar_ratio_i64(&self, num: i64, den: i64) -> PScalar {
        assert!(den != 0, "zero denominator");
        self.scalar_from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero(&self) -> PScalar {
        self.scalar_i64(0)
    }

    pub fn one(&self) -> PScalar {
        self.scalar_i64(1)
    }
}

/// Exponent of a p-adic absolute value: |x| = p^e, with `Bottom` standing
/// for the norm of zero. `Bottom` is the identity of `max` and absorbs
/// under exponent addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormExp {
    Bottom,
    Exp(BigRational),
}

impl NormExp {
    pub fn exp_i64(n: i64) -> Self {
        NormExp::Exp(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn exp_ratio(num: i64, den: i64) -> Self {
        NormExp::Exp(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, NormExp::Bottom)
    }

    pub fn max(self, other: NormExp) -> NormExp {
        match (self, other) {
            (NormExp::Bottom, b) => b,
            (a, NormExp::Bottom) => a,
            (NormExp::Exp(a), NormExp::Exp(b)) => NormExp::Exp(a.max(b)),
        }
    }

    /// Exponent of a product of norms.
    pub fn plus(&self, other: &NormExp) -> NormExp {
        match (self, other) {
            (NormExp::Exp(a), NormExp::Exp(b)) => NormExp::Exp(a + b),
            _ => NormExp::Bottom,
        }
    }

    /// Adds a plain exponent offset; Bottom stays Bottom.
    pub fn shift(&self, offset: &BigRational) -> NormExp {
        match self {
            NormExp::Bottom => NormExp::Bottom,
            NormExp::Exp(a) => NormExp::Exp(a + offset),
        }
    }

    pub fn as_exp(&self) -> Option<&BigRational> {
        match self {
            NormExp::Bottom => None,
            NormExp::Exp(e) => Some(e),
        }
    }
}

impl PartialOrd for NormExp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormExp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (NormExp::Bottom, NormExp::Bottom) => Equal,
            (NormExp::Bottom, _) => Less,
            (_, NormExp::Bottom) => Greater,
            (NormExp::Exp(a), NormExp::Exp(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for NormExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExp::Bottom => write!(f, "-infinity"),
            NormExp::Exp(e) => write!(f, "{e}"),
        }
    }
}

/// p-adic valuation of a scalar. Finite valuations of rationals are integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

/// An exact rational viewed inside Q_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PScalar {
    ctx: PContext,
    value: BigRational,
}

fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

impl PScalar {
    pub fn context(&self) -> PContext {
        self.ctx
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    /// p-adic valuation; +infinity for zero.
    pub fn valuation(&self) -> Valuation {
        if self.value.is_zero() {
            return Valuation::Infinite;
        }
        let p = self.ctx.p;
        let v = int_valuation(self.value.numer(), p) - int_valuation(self.value.denom(), p);
        Valuation::Finite(v)
    }

    /// Exponent e with |x| = p^e, i.e. the negated valuation.
    pub fn norm_exp(&self) -> NormExp {
        match self.valuation() {
            Valuation::Infinite => NormExp::Bottom,
            Valuation::Finite(v) => NormExp::exp_i64(-v),
        }
    }

    fn assert_ctx(&self, other: &PScalar) {
        assert_eq!(
            self.ctx, other.ctx,
            "scalars from different p-adic contexts"
        );
    }

    pub fn div(&self, other: &PScalar) -> Result<PScalar> {
        self.assert_ctx(other);
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PScalar {
            ctx: self.ctx,
            value: &self.value / &other.value,
        })
    }

    pub fn inv(&self) -> Result<PScalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PScalar {
            ctx: self.ctx,
            value: self.value.recip(),
        })
    }

    pub fn pow_i64(&self, e: i64) -> Result<PScalar> {
        if e < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PScalar {
            ctx: self.ctx,
            value: rational_pow(&self.value, e),
        })
    }

    pub fn parse(ctx: PContext, s: &str) -> Result<PScalar> {
        let bad = || Error::Invalid(format!("malformed rational {s:?}"));
        let s = s.trim();
        let mut parts = s.splitn(2, '/');
        let num: BigInt = parts
            .next()
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let den: BigInt = match parts.next() {
            Some(d) => d.trim().parse().map_err(|_| bad())?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in {s:?}")));
        }
        Ok(ctx.scalar_from_ratio(BigRational::new(num, den)))
    }
}

impl fmt::Display for PScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ratio_to_string(&self.value))
    }
}

/// x^e with e any integer; requires x nonzero when e < 0.
pub fn rational_pow(x: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let base = if e < 0 {
        assert!(!x.is_zero(), "negative power of zero");
        x.recip()
    } else {
        x.clone()
    };
    let mut acc = BigRational::one();
    let mut sq = base;
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc *= &sq;
        }
        k >>= 1;
        if k > 0 {
            let next = &sq * &sq;
            sq = next;
        }
    }
    acc
}

/// Renders a BigRational as "a" or "a/b".
pub fn ratio_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses "a" or "a/b" into an exact rational.
pub fn ratio_from_str(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("malformed rational {s:?}"));
    let s = s.trim();
    let mut parts = s.splitn(2, '/');
    let num: BigInt = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(Error::Invalid(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &PScalar {
            type Output = PScalar;
            fn $method(self, rhs: &PScalar) -> PScalar {
                self.assert_ctx(rhs);
                PScalar {
                    ctx: self.ctx,
                    value: &self.value $op &rhs.value,
                }
            }
        }
        impl $trait for PScalar {
            type Output = PScalar;
            fn $method(self, rhs: PScalar) -> PScalar {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &PScalar {
    type Output = PScalar;
    fn neg(self) -> PScalar {
        PScalar {
            ctx: self.ctx,
            value: -&self.value,
        }
    }
}

impl Neg for PScalar {
    type Output = PScalar;
    fn neg(self) -> PScalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PContext {
        PContext::new(p).unwrap()
    }

    #[test]
    fn rejects_composite_primes() {
        assert!(PContext::new(1).is_err());
        assert!(PContext::new(4).is_err());
        assert!(PContext::new(561).is_err()); // Carmichael
        assert!(PContext::new(2).is_ok());
        assert!(PContext::new(1_000_003).is_ok());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(ctx(2).scalar_i64(2).valuation(), Valuation::Finite(1));
        assert_eq!(ctx(2).scalar_i64(0).valuation(), Valuation::Infinite);
        assert_eq!(
            ctx(3).scalar_ratio_i64(18, 5).valuation(),
            Valuation::Finite(2)
        );
        assert_eq!(
            ctx(5).scalar_ratio_i64(10, 3).valuation(),
            Valuation::Finite(1)
        );
    }

    #[test]
    fn norm_exp_examples() {
        assert_eq!(ctx(2).scalar_i64(2).norm_exp(), NormExp::exp_i64(-1));
        assert_eq!(
            ctx(2).scalar_ratio_i64(1, 4).norm_exp(),
            NormExp::exp_i64(2)
        );
        assert_eq!(
            ctx(5).scalar_ratio_i64(10, 3).norm_exp(),
            NormExp::exp_i64(-1)
        );
        assert!(ctx(5).zero().norm_exp().is_bottom());
    }

    #[test]
    fn field_ops_are_exact() {
        let c = ctx(2);
        let x = c.scalar_ratio_i64(1, 3);
        let y = c.scalar_ratio_i64(2, 3);
        assert_eq!(&x + &y, c.one());
        assert_eq!(x.div(&c.zero()), Err(Error::DivisionByZero));
        // 2 + 2 gains valuation: |4| = 2^-2.
        let two = c.scalar_i64(2);
        assert_eq!((&two + &two).norm_exp(), NormExp::exp_i64(-2));
    }

    #[test]
    fn bottom_is_max_identity_and_addition_absorber() {
        let e = NormExp::exp_ratio(3, 2);
        assert_eq!(NormExp::Bottom.max(e.clone()), e);
        assert!(NormExp::Bottom.plus(&e).is_bottom());
        assert!(NormExp::Bottom < e);
    }

    #[test]
    fn parse_and_display_round_trip() {
        let c = ctx(7);
        let x = PScalar::parse(c, "-14/6").unwrap();
        assert_eq!(x.to_string(), "-7/3");
        assert!(PScalar::parse(c, "1/0").is_err());
        assert!(PScalar::parse(c, "x").is_err());
    }
}
