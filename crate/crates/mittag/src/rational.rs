//! Exact rational functions and differentials on the projective line.
//!
//! A [`RationalFn`] is kept in canonical partial-fraction form: a polynomial
//! part (which owns any pole at infinity) plus one principal part per finite
//! pole, written in the local coordinate t - a. Local and annulus expansions
//! are exact on any finite window; Gauss norms at arbitrary rational points
//! are computed exactly through the multiplicativity |N/D| = |N|/|D| on
//! numerator and denominator polynomials, so no truncation ever enters a
//! norm.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::Center;
use crate::laurent::{LaurentChunk, TailBound, Window};
use crate::scalar::{NormExp, PContext, PScalar};

/// Dense polynomial over the rationals; coeffs[i] is the t^i coefficient,
/// trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn binom(n: u64, k: u64) -> BigRational {
    BigRational::from_integer(binomial(BigInt::from(n), BigInt::from(k)))
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial {
            coeffs: vec![BigRational::one()],
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Polynomial { coeffs: vec![c] }.trimmed()
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        Polynomial { coeffs }.trimmed()
    }

    pub fn monomial(deg: usize, c: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        coeffs[deg] = c;
        Polynomial { coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Polynomial { coeffs }.trimmed()
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }.trimmed()
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c * rat_i64(i as i64 + 1))
            .collect();
        Polynomial { coeffs }.trimmed()
    }

    /// Coefficients of P(z + a) in z, i.e. the Taylor expansion around a.
    pub fn taylor_shift(&self, a: &BigRational) -> Self {
        let mut acc = Self::zero();
        let linear = Polynomial::from_coeffs(vec![a.clone(), BigRational::one()]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&linear).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Gauss-norm exponent at the point z = 0 with |z| = p^q, i.e.
    /// max_i (norm_exp(c_i) + q i).
    pub fn gauss_exp(&self, ctx: PContext, q: &BigRational) -> NormExp {
        let mut acc = NormExp::Bottom;
        for (i, c) in self.coeffs.iter().enumerate() {
            let line = ctx
                .scalar_from_ratio(c.clone())
                .norm_exp()
                .shift(&(q * rat_i64(i as i64)));
            acc = acc.max(line);
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i > 0 {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

/// A rational function in partial fractions: entire polynomial plus one
/// principal part per finite pole. The entire part owns the pole at
/// infinity. Principal parts are finite chunks supported on exponents
/// <= -1 in the local coordinate t - a.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    ctx: PContext,
    entire: Polynomial,
    parts: BTreeMap<BigRational, LaurentChunk>,
}

impl RationalFn {
    pub fn zero(ctx: PContext) -> Self {
        RationalFn {
            ctx,
            entire: Polynomial::zero(),
            parts: BTreeMap::new(),
        }
    }

    pub fn from_entire(ctx: PContext, entire: Polynomial) -> Self {
        RationalFn {
            ctx,
            entire,
            parts: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: PContext, c: BigRational) -> Self {
        Self::from_entire(ctx, Polynomial::constant(c))
    }

    /// Adds a principal part at a finite center. The chunk must be finite
    /// and supported on negative exponents.
    pub fn with_part(mut self, center: BigRational, part: LaurentChunk) -> Result<Self> {
        if part.tail().is_some() {
            return Err(Error::Invalid(
                "principal part carries a tail certificate".into(),
            ));
        }
        if part.max_exp().is_some_and(|m| m >= 0) {
            return Err(Error::Invalid(format!(
                "principal part at {center} has a nonnegative exponent"
            )));
        }
        if part.is_zero() {
            return Ok(self);
        }
        let cur = self
            .parts
            .remove(&center)
            .unwrap_or_else(|| LaurentChunk::zero(self.ctx));
        let sum = cur.add(&part).expect("finite chunks");
        if !sum.is_zero() {
            self.parts.insert(center, sum);
        }
        Ok(self)
    }

    /// c / (t - center)^order.
    pub fn pole_monomial(ctx: PContext, center: BigRational, order: u64, c: PScalar) -> Self {
        let part = LaurentChunk::monomial(ctx, -(order as i64), c);
        Self::zero(ctx)
            .with_part(center, part)
            .expect("valid principal part")
    }

    pub fn context(&self) -> PContext {
        self.ctx
    }

    pub fn entire(&self) -> &Polynomial {
        &self.entire
    }

    pub fn parts(&self) -> &BTreeMap<BigRational, LaurentChunk> {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.entire.is_zero() && self.parts.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "mixed p-adic contexts");
        let mut out = RationalFn {
            ctx: self.ctx,
            entire: self.entire.add(&other.entire),
            parts: self.parts.clone(),
        };
        for (c, part) in &other.parts {
            out = out
                .with_part(c.clone(), part.clone())
                .expect("canonical parts");
        }
        out
    }

    pub fn neg(&self) -> Self {
        RationalFn {
            ctx: self.ctx,
            entire: self.entire.neg(),
            parts: self
                .parts
                .iter()
                .map(|(c, p)| (c.clone(), p.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &PScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx);
        }
        RationalFn {
            ctx: self.ctx,
            entire: self.entire.scale(c.value()),
            parts: self
                .parts
                .iter()
                .map(|(a, p)| (a.clone(), p.scale(c)))
                .collect(),
        }
    }

    /// Pole order at a finite point (0 when regular there).
    pub fn pole_order(&self, center: &BigRational) -> u64 {
        self.parts
            .get(center)
            .and_then(|p| p.min_exp())
            .map(|m| (-m) as u64)
            .unwrap_or(0)
    }

    /// Order of pole at infinity as a function: the degree of the entire
    /// part (0 when the entire part is constant or zero).
    pub fn pole_order_at_inf(&self) -> u64 {
        self.entire.degree().unwrap_or(0) as u64
    }

    /// Writes f as N/D with D = prod (t - a)^{ord_a}.
    pub fn as_fraction(&self) -> (Polynomial, Polynomial) {
        let mut den = Polynomial::one();
        for (a, part) in &self.parts {
            let k = (-part.min_exp().unwrap()) as u64;
            let lin = Polynomial::from_coeffs(vec![-a.clone(), BigRational::one()]);
            den = den.mul(&lin.pow(k));
        }
        let mut num = self.entire.mul(&den);
        for (a, part) in &self.parts {
            let k = (-part.min_exp().unwrap()) as u64;
            // part * (t-a)^k is a polynomial in z = t - a; move it to t and
            // multiply by the complementary factors.
            let mut in_z = Polynomial::zero();
            for (e, c) in part.coeffs() {
                let deg = (e + k as i64) as usize;
                in_z = in_z.add(&Polynomial::monomial(deg, c.value().clone()));
            }
            let in_t = in_z.taylor_shift(&-a.clone());
            let mut cofactor = Polynomial::one();
            for (b, q) in &self.parts {
                if b == a {
                    continue;
                }
                let kb = (-q.min_exp().unwrap()) as u64;
                let lin = Polynomial::from_coeffs(vec![-b.clone(), BigRational::one()]);
                cofactor = cofactor.mul(&lin.pow(kb));
            }
            num = num.add(&in_t.mul(&cofactor));
        }
        (num, den)
    }

    /// Exact Gauss-norm exponent at the point ζ(a, p^q) or, for INF, at the
    /// Gauss point of radius p^q in the coordinate 1/t. Uses |N/D| = |N|/|D|.
    pub fn gauss_norm_exp_at(&self, center: &Center, q: &BigRational) -> NormExp {
        if self.is_zero() {
            return NormExp::Bottom;
        }
        let (num, den) = self.as_fraction();
        let (n_exp, d_exp) = match center {
            Center::Finite(a) => (
                num.taylor_shift(a).gauss_exp(self.ctx, q),
                den.taylor_shift(a).gauss_exp(self.ctx, q),
            ),
            Center::Inf => (
                poly_gauss_at_inf(&num, self.ctx, q),
                poly_gauss_at_inf(&den, self.ctx, q),
            ),
        };
        match (n_exp, d_exp) {
            (NormExp::Bottom, _) => NormExp::Bottom,
            (_, NormExp::Bottom) => unreachable!("denominator is a nonzero polynomial"),
            (NormExp::Exp(n), NormExp::Exp(d)) => NormExp::Exp(n - d),
        }
    }

    /// Exact Laurent coefficients at a declared point, on a finite window.
    /// At INF the coordinate is s = 1/t.
    pub fn local_expansion(&self, center: &Center, window: Window) -> LaurentChunk {
        let ctx = self.ctx;
        let mut acc = LaurentChunk::zero(ctx);
        match center {
            Center::Finite(a) => {
                if let Some(own) = self.parts.get(a) {
                    acc = acc.add(&own.clip_above(window.hi)).unwrap();
                }
                let shifted = self.entire.taylor_shift(a);
                for (i, c) in shifted.coeffs().iter().enumerate() {
                    let e = i as i64;
                    if window.contains(e) && !c.is_zero() {
                        acc = acc
                            .add(&LaurentChunk::monomial(
                                ctx,
                                e,
                                ctx.scalar_from_ratio(c.clone()),
                            ))
                            .unwrap();
                    }
                }
                for (b, part) in &self.parts {
                    if b == a {
                        continue;
                    }
                    let d = b - a;
                    acc = acc.add(&taylor_of_part(ctx, part, &d, window)).unwrap();
                }
            }
            Center::Inf => {
                for (i, c) in self.entire.coeffs().iter().enumerate() {
                    let e = -(i as i64);
                    if window.contains(e) && !c.is_zero() {
                        acc = acc
                            .add(&LaurentChunk::monomial(
                                ctx,
                                e,
                                ctx.scalar_from_ratio(c.clone()),
                            ))
                            .unwrap();
                    }
                }
                for (b, part) in &self.parts {
                    acc = acc.add(&inf_taylor_of_part(ctx, part, b, window)).unwrap();
                }
            }
        }
        let keep: Vec<(i64, PScalar)> = acc
            .coeffs()
            .iter()
            .filter(|(e, _)| window.contains(**e))
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        LaurentChunk::from_coeffs(ctx, keep)
    }

    /// Exact window coefficients on the annulus A(center; p^q1, p^q2), with
    /// a tail certificate when poles hide inside the inner disc. Poles with
    /// radius strictly inside (q1, q2) are rejected.
    pub fn annulus_expansion(
        &self,
        center: &Center,
        q1: &BigRational,
        q2: &BigRational,
        window: Window,
    ) -> Result<LaurentChunk> {
        let ctx = self.ctx;
        let mut explicit = LaurentChunk::zero(ctx);
        let mut tail_bound = NormExp::Bottom;
        let mut tail_needed = false;
        match center {
            Center::Finite(a) => {
                if let Some(own) = self.parts.get(a) {
                    explicit = explicit.add(own).unwrap();
                }
                let shifted = self.entire.taylor_shift(a);
                for (i, c) in shifted.coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        explicit = explicit
                            .add(&LaurentChunk::monomial(
                                ctx,
                                i as i64,
                                ctx.scalar_from_ratio(c.clone()),
                            ))
                            .unwrap();
                    }
                }
                for (b, part) in &self.parts {
                    if b == a {
                        continue;
                    }
                    let d = b - a;
                    let d_exp = ctx.scalar_from_ratio(d.clone()).norm_exp();
                    let d_exp = d_exp.as_exp().expect("distinct centers").clone();
                    if d_exp <= *q1 {
                        // Inside the inner disc: the expansion marches down
                        // and every term obeys the part's Gauss line at q1.
                        tail_needed = true;
                        tail_bound = tail_bound.max(part.gauss_norm_exp(q1).unwrap());
                        explicit = explicit
                            .add(&downward_of_part(ctx, part, &d, window))
                            .unwrap();
                    } else if d_exp >= *q2 {
                        explicit = explicit
                            .add(&taylor_of_part(ctx, part, &d, window))
                            .unwrap();
                    } else {
                        return Err(Error::PoleOnAnnulus(format!(
                            "pole at {b} sits at radius exponent {d_exp} inside ({q1}, {q2})"
                        )));
                    }
                }
            }
            Center::Inf => {
                for (i, c) in self.entire.coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        explicit = explicit
                            .add(&LaurentChunk::monomial(
                                ctx,
                                -(i as i64),
                                ctx.scalar_from_ratio(c.clone()),
                            ))
                            .unwrap();
                    }
                }
                for (b, part) in &self.parts {
                    // In s = 1/t the pole b sits at radius -norm_exp(b);
                    // b = 0 maps to s = INF and expands as exact monomials.
                    let b_norm = ctx.scalar_from_ratio(b.clone()).norm_exp();
                    let s_exp = match b_norm.as_exp() {
                        None => {
                            explicit = explicit
                                .add(&inf_taylor_of_part(ctx, part, b, window))
                                .unwrap();
                            continue;
                        }
                        Some(e) => -e.clone(),
                    };
                    if s_exp >= *q2 {
                        explicit = explicit
                            .add(&inf_taylor_of_part(ctx, part, b, window))
                            .unwrap();
                    } else if s_exp <= *q1 {
                        tail_needed = true;
                        tail_bound = tail_bound.max(inf_downward_bound(ctx, part, b));
                        explicit = explicit
                            .add(&inf_downward_of_part(ctx, part, b, window))
                            .unwrap();
                    } else {
                        return Err(Error::PoleOnAnnulus(format!(
                            "pole at {b} sits at radius exponent {s_exp} of the 1/t coordinate inside ({q1}, {q2})"
                        )));
                    }
                }
            }
        }
        let explicit = explicit.clip_above(window.hi);
        let drops_low = explicit.min_exp().is_some_and(|m| m < window.lo);
        if !tail_needed && !drops_low {
            return Ok(explicit);
        }
        if window.lo > 0 {
            return Err(Error::WindowNotCertifiable(format!(
                "window floor {} cannot anchor a tail certificate",
                window.lo
            )));
        }
        let mut coeffs = explicit.coeffs().clone();
        let dropped: Vec<i64> = coeffs.range(..window.lo).map(|(e, _)| *e).collect();
        for e in dropped {
            let c = coeffs.remove(&e).unwrap();
            let line = c.norm_exp().shift(&(q1 * rat_i64(e)));
            tail_bound = tail_bound.max(line);
        }
        LaurentChunk::from_coeffs(ctx, coeffs).with_tail(TailBound::new(
            window.lo,
            q1.clone(),
            tail_bound,
        )?)
    }
}

/// Gauss-norm exponent of a polynomial at the INF Gauss point of radius
/// p^q in s = 1/t: coefficients of t^i weigh in at norm_exp(c_i) - q i.
fn poly_gauss_at_inf(p: &Polynomial, ctx: PContext, q: &BigRational) -> NormExp {
    let mut acc = NormExp::Bottom;
    for (i, c) in p.coeffs().iter().enumerate() {
        let line = ctx
            .scalar_from_ratio(c.clone())
            .norm_exp()
            .shift(&-(q * rat_i64(i as i64)));
        acc = acc.max(line);
    }
    acc
}

/// Taylor expansion around z = 0 of a principal part sitting at distance d:
/// (z - d)^{-k} = (-d)^{-k} sum_m C(k+m-1, m) (z/d)^m.
fn taylor_of_part(
    ctx: PContext,
    part: &LaurentChunk,
    d: &BigRational,
    window: Window,
) -> LaurentChunk {
    let mut acc = LaurentChunk::zero(ctx);
    for (e, c) in part.coeffs() {
        let k = (-e) as u64;
        for m in window.lo.max(0)..=window.hi {
            let mu = m as u64;
            let coef = binom(k + mu - 1, mu)
                * crate::scalar::rational_pow(&-d.clone(), -(k as i64))
                * crate::scalar::rational_pow(d, -m);
            let value = c.value() * &coef;
            if !value.is_zero() {
                acc = acc
                    .add(&LaurentChunk::monomial(
                        ctx,
                        m,
                        ctx.scalar_from_ratio(value),
                    ))
                    .unwrap();
            }
        }
    }
    acc
}

/// Downward expansion of a principal part at distance d inside the inner
/// disc: (z - d)^{-k} = z^{-k} sum_m C(k+m-1, m) d^m z^{-m}.
fn downward_of_part(
    ctx: PContext,
    part: &LaurentChunk,
    d: &BigRational,
    window: Window,
) -> LaurentChunk {
    let mut acc = LaurentChunk::zero(ctx);
    for (e, c) in part.coeffs() {
        let k = (-e) as u64;
        // exponent -k - m within window.
        let m_lo = ((-window.hi) - k as i64).max(0);
        let m_hi = (-window.lo) - k as i64;
        for m in m_lo..=m_hi {
            let mu = m as u64;
            let coef = binom(k + mu - 1, mu) * crate::scalar::rational_pow(d, m);
            let value = c.value() * &coef;
            if !value.is_zero() {
                acc = acc
                    .add(&LaurentChunk::monomial(
                        ctx,
                        -(k as i64) - m,
                        ctx.scalar_from_ratio(value),
                    ))
                    .unwrap();
            }
        }
    }
    acc
}

/// Expansion of (t - b)^{-k} = s^k (1 - b s)^{-k} in s = 1/t, upward:
/// sum_m C(k+m-1, m) b^m s^{k+m}.
fn inf_taylor_of_part(
    ctx: PContext,
    part: &LaurentChunk,
    b: &BigRational,
    window: Window,
) -> LaurentChunk {
    let mut acc = LaurentChunk::zero(ctx);
    for (e, c) in part.coeffs() {
        let k = (-e) as u64;
        let m_lo = (window.lo - k as i64).max(0);
        let m_hi = window.hi - k as i64;
        for m in m_lo..=m_hi {
            let mu = m as u64;
            let coef = binom(k + mu - 1, mu) * crate::scalar::rational_pow(b, m);
            let value = c.value() * &coef;
            if !value.is_zero() {
                acc = acc
                    .add(&LaurentChunk::monomial(
                        ctx,
                        k as i64 + m,
                        ctx.scalar_from_ratio(value),
                    ))
                    .unwrap();
            }
        }
    }
    acc
}

/// Downward expansion in s of a pole hidden inside the inner disc at INF:
/// (t - b)^{-k} = (-b)^{-k} sum_m C(k+m-1, m) b^{-m} s^{-m}.
fn inf_downward_of_part(
    ctx: PContext,
    part: &LaurentChunk,
    b: &BigRational,
    window: Window,
) -> LaurentChunk {
    let mut acc = LaurentChunk::zero(ctx);
    for (e, c) in part.coeffs() {
        let k = -e;
        let m_lo = (-window.hi).max(0);
        let m_hi = -window.lo;
        for m in m_lo..=m_hi {
            let mu = m as u64;
            let coef = binom(k as u64 + mu - 1, mu)
                * crate::scalar::rational_pow(&-b.clone(), -k)
                * crate::scalar::rational_pow(b, -m);
            let value = c.value() * &coef;
            if !value.is_zero() {
                acc = acc
                    .add(&LaurentChunk::monomial(
                        ctx,
                        -m,
                        ctx.scalar_from_ratio(value),
                    ))
                    .unwrap();
            }
        }
    }
    acc
}

/// On the annulus |t - b| = |b| for a pole hidden inside the inner disc at
/// INF, so the part's Gauss line at norm(b) dominates every term of the
/// downward expansion; it also dominates at any anchor q1 <= -norm(b).
fn inf_downward_bound(ctx: PContext, part: &LaurentChunk, b: &BigRational) -> NormExp {
    let b_exp = ctx
        .scalar_from_ratio(b.clone())
        .norm_exp()
        .as_exp()
        .expect("nonzero center")
        .clone();
    part.gauss_norm_exp(&b_exp)
        .expect("principal parts are tail-free")
}

/// A differential f dt in canonical partial fractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalDiff {
    pub func: RationalFn,
}

impl RationalDiff {
    pub fn new(func: RationalFn) -> Self {
        RationalDiff { func }
    }

    pub fn zero(ctx: PContext) -> Self {
        RationalDiff {
            func: RationalFn::zero(ctx),
        }
    }

    pub fn context(&self) -> PContext {
        self.func.context()
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalDiff {
            func: self.func.add(&other.func),
        }
    }

    pub fn neg(&self) -> Self {
        RationalDiff {
            func: self.func.neg(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        RationalDiff {
            func: self.func.sub(&other.func),
        }
    }

    pub fn scale(&self, c: &PScalar) -> Self {
        RationalDiff {
            func: self.func.scale(c),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_zero()
    }

    /// Local series g with f dt = g(t_i) dt_i at the point: identity at
    /// finite centers, Jacobian dt = -s^{-2} ds at INF.
    pub fn local_expansion(&self, center: &Center, window: Window) -> LaurentChunk {
        match center {
            Center::Finite(_) => self.func.local_expansion(center, window),
            Center::Inf => {
                let inner = Window::new(window.lo + 2, window.hi + 2);
                let f = self.func.local_expansion(center, inner);
                f.shift_exp(-2).expect("finite chunk").neg()
            }
        }
    }

    /// Annulus version of [`Self::local_expansion`].
    pub fn annulus_expansion(
        &self,
        center: &Center,
        q1: &BigRational,
        q2: &BigRational,
        window: Window,
    ) -> Result<LaurentChunk> {
        match center {
            Center::Finite(_) => self.func.annulus_expansion(center, q1, q2, window),
            Center::Inf => {
                // A tail certificate needs a non-positive floor; if the
                // Jacobian shift pushes the floor above 0, widen down and
                // restrict back afterwards.
                let lo = (window.lo + 2).min(0);
                let f =
                    self.func
                        .annulus_expansion(center, q1, q2, Window::new(lo, window.hi + 2))?;
                let shifted = f.shift_exp(-2)?.neg();
                if lo == window.lo + 2 {
                    Ok(shifted)
                } else {
                    shifted.restrict(window, q1)
                }
            }
        }
    }

    /// Gauss norm of the local representative at an end's radius: |g| where
    /// f dt = g dt_i; the INF Jacobian contributes exponent -2q.
    pub fn gauss_norm_exp_at(&self, center: &Center, q: &BigRational) -> NormExp {
        let base = self.func.gauss_norm_exp_at(center, q);
        match center {
            Center::Finite(_) => base,
            Center::Inf => base.shift(&(rat_i64(-2) * q)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PContext {
        PContext::new(2).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn chunk(c: PContext, entries: &[(i64, i64)]) -> LaurentChunk {
        LaurentChunk::from_coeffs(c, entries.iter().map(|(e, v)| (*e, c.scalar_i64(*v))))
    }

    /// 1/(t - a)
    fn simple_pole(c: PContext, a: i64) -> RationalFn {
        RationalFn::pole_monomial(c, q(a, 1), 1, c.one())
    }

    #[test]
    fn polynomial_shift_and_eval() {
        let p = Polynomial::from_coeffs(vec![q(1, 1), q(0, 1), q(1, 1)]); // 1 + t^2
        let s = p.taylor_shift(&q(1, 1)); // (z+1)^2 + 1 = 2 + 2z + z^2
        assert_eq!(s.coeffs(), &[q(2, 1), q(2, 1), q(1, 1)]);
        assert_eq!(p.eval(&q(3, 1)), q(10, 1));
        assert_eq!(p.derivative().coeffs(), &[q(0, 1), q(2, 1)]);
    }

    #[test]
    fn local_expansion_examples() {
        let c = ctx();
        let f = simple_pole(c, 0);
        assert_eq!(
            f.local_expansion(&Center::finite_i64(0), Window::new(-2, 1)),
            chunk(c, &[(-1, 1)])
        );

        // dt/t at INF: -t2^{-1}.
        let w = RationalDiff::new(simple_pole(c, 0));
        assert_eq!(
            w.local_expansion(&Center::Inf, Window::new(-2, 1)),
            chunk(c, &[(-1, -1)])
        );

        // 1/(t-1) at 0: geometric series -1 - t - t^2.
        let g = simple_pole(c, 1);
        assert_eq!(
            g.local_expansion(&Center::finite_i64(0), Window::new(-1, 2)),
            chunk(c, &[(0, -1), (1, -1), (2, -1)])
        );
    }

    #[test]
    fn expansion_at_inf_of_entire_part() {
        let c = ctx();
        // t^2 + 3 at INF: s^{-2} + 3.
        let f =
            RationalFn::from_entire(c, Polynomial::from_coeffs(vec![q(3, 1), q(0, 1), q(1, 1)]));
        assert_eq!(
            f.local_expansion(&Center::Inf, Window::new(-3, 1)),
            chunk(c, &[(-2, 1), (0, 3)])
        );
        // As a differential: -s^{-2}(s^{-2} + 3) = -s^{-4} - 3s^{-2}.
        let w = RationalDiff::new(f);
        assert_eq!(
            w.local_expansion(&Center::Inf, Window::new(-5, 0)),
            chunk(c, &[(-4, -1), (-2, -3)])
        );
    }

    #[test]
    fn annulus_expansion_partitions_poles() {
        let c = ctx();
        // f = 1/(t - 4) + 1/(t - 1/2) around 0 on (q1, q2) = (-1, 0):
        // |4| = 2^{-2} <= -1 (inner), |1/2| = 2 >= 0 (outer).
        let f = simple_pole(c, 4).add(&RationalFn::pole_monomial(c, q(1, 2), 1, c.one()));
        let r = f
            .annulus_expansion(
                &Center::finite_i64(0),
                &q(-1, 1),
                &q(0, 1),
                Window::new(-3, 1),
            )
            .unwrap();
        // Inner pole: z^{-1}(1 - 4/z)^{-1} = z^{-1} + 4 z^{-2} + 16 z^{-3}...
        assert_eq!(r.coefficient(-1), c.one());
        assert_eq!(r.coefficient(-2), c.scalar_i64(4));
        assert_eq!(r.coefficient(-3), c.scalar_i64(16));
        // Outer pole: (z - 1/2)^{-1} = -2(1 + 2z + 4z^2 + ...)
        assert_eq!(r.coefficient(0), c.scalar_i64(-2));
        assert_eq!(r.coefficient(1), c.scalar_i64(-4));
        let t = r.tail().unwrap();
        assert_eq!(t.below, -3);
        assert_eq!(t.q0, q(-1, 1));
        // Part gauss at q1 = -1: norm(1) + (-1)(-1) = 1.
        assert_eq!(t.bound_exp, NormExp::exp_i64(1));

        // A pole at radius between the two circles is rejected.
        let bad = simple_pole(c, 1);
        assert!(matches!(
            bad.annulus_expansion(
                &Center::finite_i64(0),
                &q(-1, 1),
                &q(1, 1),
                Window::new(-2, 1)
            ),
            Err(Error::PoleOnAnnulus(_))
        ));
    }

    #[test]
    fn gauss_norm_matches_expansion() {
        let c = ctx();
        // On radii where the expansion is certified, the fraction norm and
        // the chunk norm agree.
        let f = simple_pole(c, 1); // 1/(t-1)
        let qq = q(-1, 1);
        let exp = f
            .local_expansion(&Center::finite_i64(0), Window::new(0, 12))
            .gauss_norm_exp(&qq)
            .unwrap();
        let exact = f.gauss_norm_exp_at(&Center::finite_i64(0), &qq);
        assert_eq!(exact, exp);

        // Multiplicativity through the fraction: |t/(t-1)| = |t| |1/(t-1)|.
        let num = RationalFn::from_entire(c, Polynomial::from_coeffs(vec![q(0, 1), q(1, 1)]));
        let prod_exp = match (
            num.gauss_norm_exp_at(&Center::finite_i64(0), &qq),
            f.gauss_norm_exp_at(&Center::finite_i64(0), &qq),
        ) {
            (NormExp::Exp(a), NormExp::Exp(b)) => a + b,
            _ => panic!("nonzero"),
        };
        // t/(t-1) = -t * (-1/(t-1)): build directly as entire + part:
        // t/(t-1) = 1 + 1/(t-1).
        let g = RationalFn::constant(c, q(1, 1)).add(&f);
        assert_eq!(
            g.gauss_norm_exp_at(&Center::finite_i64(0), &qq),
            NormExp::Exp(prod_exp)
        );
    }

    #[test]
    fn fraction_reconstruction() {
        let c = ctx();
        // f = 2 + t + 1/t + 3/(t-1)^2: N/D with D = t(t-1)^2.
        let f = RationalFn::from_entire(c, Polynomial::from_coeffs(vec![q(2, 1), q(1, 1)]))
            .with_part(q(0, 1), chunk(c, &[(-1, 1)]))
            .unwrap()
            .with_part(q(1, 1), chunk(c, &[(-2, 3)]))
            .unwrap();
        let (n, d) = f.as_fraction();
        // Check by evaluation at a few points away from poles.
        for x in [q(2, 1), q(3, 1), q(5, 1), q(-1, 1)] {
            let direct = q(2, 1) + &x + x.recip() + q(3, 1) / ((&x - q(1, 1)) * (&x - q(1, 1)));
            assert_eq!(n.eval(&x) / d.eval(&x), direct);
        }
    }

    #[test]
    fn diff_gauss_applies_jacobian() {
        let c = ctx();
        let one_form = RationalDiff::new(RationalFn::constant(c, q(1, 1)));
        // |dt| at the INF Gauss point of radius p^q is p^{-2q}.
        assert_eq!(
            one_form.gauss_norm_exp_at(&Center::Inf, &q(-1, 1)),
            NormExp::exp_i64(2)
        );
        assert_eq!(
            one_form.gauss_norm_exp_at(&Center::finite_i64(0), &q(-1, 1)),
            NormExp::exp_i64(0)
        );
    }
}
