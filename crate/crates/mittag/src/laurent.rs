//! Laurent-polynomial algebra with certified tails.
//!
//! A [`LaurentChunk`] stores finitely many exact coefficients plus an
//! optional [`TailBound`] certifying everything below a threshold exponent.
//! Tails are certificates, not data: arithmetic stays exact on the stored
//! part and propagates a sound bound for the rest. Dominant-term analysis
//! (valuation polygons) decides unit-ness on an open annulus with finitely
//! many exact comparisons, and composition or inversion of one-signed units
//! produces exact window coefficients.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{NormExp, PContext, PScalar};

/// Certifies the omitted part of a series: every coefficient at exponent
/// j < below satisfies norm_exp(f_j) + q0*j <= bound_exp. Since below <= 0,
/// the induced Gauss-norm bound is non-increasing as the radius exponent
/// grows past q0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailBound {
    pub below: i64,
    pub q0: BigRational,
    pub bound_exp: NormExp,
}

impl TailBound {
    pub fn new(below: i64, q0: BigRational, bound_exp: NormExp) -> Result<Self> {
        if below > 0 {
            return Err(Error::Invalid(format!(
                "tail threshold {below} is positive; certificates cover only exponents below 0"
            )));
        }
        Ok(TailBound {
            below,
            q0,
            bound_exp,
        })
    }

    /// Bound on the line norm_exp(f_j) + q*j of every omitted term, valid
    /// for q >= q0. The maximum over j < below sits at j = below - 1.
    pub fn line_at(&self, q: &BigRational) -> Result<NormExp> {
        if q < &self.q0 {
            return Err(Error::RadiusBelowTailCertificate {
                radius: q.to_string(),
                base: self.q0.to_string(),
            });
        }
        let slope = BigRational::from_integer(BigInt::from(self.below - 1));
        Ok(self.bound_exp.shift(&((q - &self.q0) * slope)))
    }

    /// Re-anchors the certificate at a larger radius exponent. Per-term
    /// bounds transport forward, never backward.
    pub fn rebase(&self, q0_new: BigRational) -> Result<TailBound> {
        let bound_exp = self.line_at(&q0_new)?;
        Ok(TailBound {
            below: self.below,
            q0: q0_new,
            bound_exp,
        })
    }
}

/// A truncation range, inclusive on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "window [{lo}, {hi}] is empty");
        Window { lo, hi }
    }

    pub fn contains(&self, j: i64) -> bool {
        self.lo <= j && j <= self.hi
    }
}

/// Finitely many exact Laurent coefficients plus an optional certified tail.
///
/// Invariants: stored coefficients are nonzero; a tail, when present, has a
/// non-Bottom bound and starts at or below the minimum stored exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentChunk {
    ctx: PContext,
    coeffs: BTreeMap<i64, PScalar>,
    tail: Option<TailBound>,
}

impl LaurentChunk {
    pub fn zero(ctx: PContext) -> Self {
        LaurentChunk {
            ctx,
            coeffs: BTreeMap::new(),
            tail: None,
        }
    }

    pub fn monomial(ctx: PContext, exp: i64, coef: PScalar) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coef.is_zero() {
            coeffs.insert(exp, coef);
        }
        LaurentChunk {
            ctx,
            coeffs,
            tail: None,
        }
    }

    pub fn one(ctx: PContext) -> Self {
        Self::monomial(ctx, 0, ctx.one())
    }

    pub fn from_coeffs<I>(ctx: PContext, entries: I) -> Self
    where
        I: IntoIterator<Item = (i64, PScalar)>,
    {
        let mut coeffs = BTreeMap::new();
        for (exp, coef) in entries {
            if !coef.is_zero() {
                let prev = coeffs.insert(exp, coef);
                assert!(prev.is_none(), "duplicate exponent {exp}");
            }
        }
        LaurentChunk {
            ctx,
            coeffs,
            tail: None,
        }
    }

    /// Attaches a tail certificate. A Bottom bound certifies the omitted
    /// part to be zero, which is the same as having no tail at all.
    pub fn with_tail(mut self, tail: TailBound) -> Result<Self> {
        if tail.bound_exp.is_bottom() {
            self.tail = None;
            return Ok(self);
        }
        if let Some(min) = self.min_exp() {
            if tail.below > min {
                return Err(Error::Invalid(format!(
                    "tail threshold {} sits above the minimum stored exponent {min}",
                    tail.below
                )));
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn context(&self) -> PContext {
        self.ctx
    }

    pub fn tail(&self) -> Option<&TailBound> {
        self.tail.as_ref()
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, PScalar> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.tail.is_none()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coefficient(&self, exp: i64) -> PScalar {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(|| self.ctx.zero())
    }

    /// True when the coefficient at `exp` is determined exactly, i.e. not
    /// hidden under the tail certificate.
    pub fn is_exact_at(&self, exp: i64) -> bool {
        match &self.tail {
            None => true,
            Some(t) => exp >= t.below,
        }
    }

    fn assert_ctx(&self, other: &Self) {
        assert_eq!(self.ctx, other.ctx, "chunks from different p-adic contexts");
    }

    fn line_exp(coef: &PScalar, exp: i64, q: &BigRational) -> NormExp {
        coef.norm_exp()
            .shift(&(q * BigRational::from_integer(BigInt::from(exp))))
    }

    fn explicit_gauss(&self, q: &BigRational) -> NormExp {
        let mut acc = NormExp::Bottom;
        for (exp, coef) in &self.coeffs {
            acc = acc.max(Self::line_exp(coef, *exp, q));
        }
        acc
    }

    /// Exponent of the Gauss norm at radius p^q: the maximum of
    /// norm_exp(f_j) + q*j over stored terms, combined with the tail bound.
    pub fn gauss_norm_exp(&self, q: &BigRational) -> Result<NormExp> {
        let mut acc = self.explicit_gauss(q);
        if let Some(t) = &self.tail {
            acc = acc.max(t.line_at(q)?);
        }
        Ok(acc)
    }

    pub fn neg(&self) -> Self {
        LaurentChunk {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn scale(&self, c: &PScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx);
        }
        let tail = self.tail.as_ref().map(|t| TailBound {
            below: t.below,
            q0: t.q0.clone(),
            bound_exp: t.bound_exp.plus(&c.norm_exp()),
        });
        LaurentChunk {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
            tail,
        }
    }

    /// Multiplies by t^k. Requires the shifted tail threshold to stay
    /// non-positive when a tail is present.
    pub fn shift_exp(&self, k: i64) -> Result<Self> {
        let tail = match &self.tail {
            None => None,
            Some(t) => {
                let below = t.below + k;
                let offset = t.q0.clone() * BigRational::from_integer(BigInt::from(k));
                Some(TailBound::new(
                    below,
                    t.q0.clone(),
                    t.bound_exp.shift(&offset),
                )?)
            }
        };
        Ok(LaurentChunk {
            ctx: self.ctx,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (*e + k, c.clone()))
                .collect(),
            tail,
        })
    }

    /// Shared tail-radius resolution: both operands tailed requires equal
    /// anchor radii.
    fn common_q0<'a>(
        a: Option<&'a TailBound>,
        b: Option<&'a TailBound>,
    ) -> Result<Option<BigRational>> {
        match (a, b) {
            (None, None) => Ok(None),
            (Some(t), None) | (None, Some(t)) => Ok(Some(t.q0.clone())),
            (Some(ta), Some(tb)) => {
                if ta.q0 == tb.q0 {
                    Ok(Some(ta.q0.clone()))
                } else {
                    Err(Error::IncompatibleTails(format!(
                        "tail radii anchored at {} and {}",
                        ta.q0, tb.q0
                    )))
                }
            }
        }
    }

    /// Drops stored coefficients with exponent < below, folding their line
    /// values at q0 into `bound`.
    fn fold_below(
        coeffs: &mut BTreeMap<i64, PScalar>,
        below: i64,
        q0: &BigRational,
        bound: &mut NormExp,
    ) {
        let dropped: Vec<i64> = coeffs.range(..below).map(|(e, _)| *e).collect();
        for e in dropped {
            let c = coeffs.remove(&e).unwrap();
            *bound = bound.clone().max(Self::line_exp(&c, e, q0));
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.assert_ctx(other);
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            let entry = coeffs.entry(*e).or_insert_with(|| self.ctx.zero());
            *entry = &*entry + c;
            if entry.is_zero() {
                coeffs.remove(e);
            }
        }
        let q0 = match Self::common_q0(self.tail.as_ref(), other.tail.as_ref())? {
            None => {
                return Ok(LaurentChunk {
                    ctx: self.ctx,
                    coeffs,
                    tail: None,
                });
            }
            Some(q0) => q0,
        };
        let below = self
            .tail
            .iter()
            .chain(other.tail.iter())
            .map(|t| t.below)
            .max()
            .unwrap();
        let mut bound = NormExp::Bottom;
        for t in self.tail.iter().chain(other.tail.iter()) {
            bound = bound.max(t.bound_exp.clone());
        }
        Self::fold_below(&mut coeffs, below, &q0, &mut bound);
        LaurentChunk {
            ctx: self.ctx,
            coeffs,
            tail: None,
        }
        .with_tail(TailBound::new(below, q0, bound)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn raw_convolve(&self, other: &Self) -> BTreeMap<i64, PScalar> {
        let mut acc: BTreeMap<i64, PScalar> = BTreeMap::new();
        for (ef, cf) in &self.coeffs {
            for (eg, cg) in &other.coeffs {
                let e = ef + eg;
                let term = cf * cg;
                let entry = acc.entry(e).or_insert_with(|| self.ctx.zero());
                *entry = &*entry + &term;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        acc
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.assert_ctx(other);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.ctx));
        }
        let mut coeffs = self.raw_convolve(other);
        let q0 = match Self::common_q0(self.tail.as_ref(), other.tail.as_ref())? {
            None => {
                return Ok(LaurentChunk {
                    ctx: self.ctx,
                    coeffs,
                    tail: None,
                });
            }
            Some(q0) => q0,
        };
        // Contamination threshold: every product exponent reachable with at
        // least one tail factor lies strictly below it.
        let mut below: Option<i64> = None;
        let mut raise = |v: i64| below = Some(below.map_or(v, |b| b.max(v)));
        if let (Some(tf), Some(mg)) = (&self.tail, other.max_exp()) {
            raise(tf.below + mg);
        }
        if let (Some(tg), Some(mf)) = (&other.tail, self.max_exp()) {
            raise(tg.below + mf);
        }
        if let (Some(tf), Some(tg)) = (&self.tail, &other.tail) {
            raise(tf.below + tg.below - 1);
        }
        let below = below.expect("tailed factor with nonzero content");
        if below > 0 {
            return Err(Error::WindowNotCertifiable(format!(
                "product tail contaminates exponents up to {}",
                below - 1
            )));
        }
        let mut bound = NormExp::Bottom;
        if let Some(tf) = &self.tail {
            bound = bound.max(tf.bound_exp.plus(&other.gauss_norm_exp(&q0)?));
        }
        if let Some(tg) = &other.tail {
            bound = bound.max(self.gauss_norm_exp(&q0)?.plus(&tg.bound_exp));
        }
        Self::fold_below(&mut coeffs, below, &q0, &mut bound);
        LaurentChunk {
            ctx: self.ctx,
            coeffs,
            tail: None,
        }
        .with_tail(TailBound::new(below, q0, bound)?)
    }

    /// Termwise derivative d/dt. The exponent -1 coefficient of the result
    /// is always absent: only j = 0 could produce it and that term dies.
    pub fn derivative(&self) -> Self {
        let ctx = self.ctx;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| **e != 0)
            .map(|(e, c)| (*e - 1, c * &ctx.scalar_i64(*e)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        // |j * f_j| <= |f_j|, and the line moves down by one exponent slot.
        let tail = self.tail.as_ref().map(|t| TailBound {
            below: t.below - 1,
            q0: t.q0.clone(),
            bound_exp: t.bound_exp.shift(&-t.q0.clone()),
        });
        LaurentChunk { ctx, coeffs, tail }
    }

    /// Keeps only exponents <= hi. Callers widen windows before multiplying
    /// so that clipped content never reaches the exponents they consume.
    pub fn clip_above(&self, hi: i64) -> Self {
        LaurentChunk {
            ctx: self.ctx,
            coeffs: self
                .coeffs
                .range(..=hi)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
            tail: self.tail.clone(),
        }
    }

    /// Restricts to the window, folding dropped low coefficients into the
    /// tail certificate anchored at q0.
    pub fn restrict(&self, window: Window, q0: &BigRational) -> Result<Self> {
        let clipped = self.clip_above(window.hi);
        let needs_fold = clipped.min_exp().is_some_and(|m| m < window.lo)
            || clipped.tail.as_ref().is_some_and(|t| t.below < window.lo);
        if !needs_fold {
            return Ok(clipped);
        }
        let mut coeffs = clipped.coeffs;
        let mut bound = NormExp::Bottom;
        let mut q_anchor = q0.clone();
        if let Some(t) = &clipped.tail {
            let t = if t.q0 < *q0 {
                t.rebase(q0.clone())?
            } else {
                t.clone()
            };
            q_anchor = t.q0.clone();
            bound = t.bound_exp;
        }
        Self::fold_below(&mut coeffs, window.lo, &q_anchor, &mut bound);
        LaurentChunk {
            ctx: self.ctx,
            coeffs,
            tail: None,
        }
        .with_tail(TailBound::new(window.lo, q_anchor, bound)?)
    }
}

/// Orientation of an annulus map, read off the sign of the dominant
/// exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Preserving,
    Reversing,
}

/// Degree and orientation of a unit viewed as a map between annuli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapClass {
    pub degree: u64,
    pub orientation: Orientation,
    pub dominant_exp: i64,
}

/// Finds the unique stored exponent n whose line norm_exp(f_n) + q*n
/// strictly dominates every other stored line and the tail line for all q
/// in the open interval (q1, q2). Lines are affine in q, so non-strict
/// dominance at both endpoints plus strict dominance at the midpoint is
/// equivalent to strict dominance on the whole open interval.
pub fn dominant_term(
    f: &LaurentChunk,
    q1: &BigRational,
    q2: &BigRational,
) -> Result<(i64, PScalar)> {
    assert!(q1 < q2, "empty radius interval");
    if let Some(t) = f.tail() {
        if *q1 < t.q0 {
            return Err(Error::RadiusBelowTailCertificate {
                radius: q1.to_string(),
                base: t.q0.to_string(),
            });
        }
    }
    if f.coeffs().is_empty() {
        return Err(Error::NotAUnit(format!(
            "no stored terms to dominate on ({q1}, {q2})"
        )));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mid = (q1 + q2) / two;
    let lines_at = |q: &BigRational| -> Result<Vec<(i64, NormExp)>> {
        let mut v: Vec<(i64, NormExp)> = f
            .coeffs()
            .iter()
            .map(|(e, c)| (*e, LaurentChunk::line_exp(c, *e, q)))
            .collect();
        if let Some(t) = f.tail() {
            // The tail line participates as an anonymous competitor.
            v.push((i64::MIN, t.line_at(q)?));
        }
        Ok(v)
    };
    let at_mid = lines_at(&mid)?;
    let best = at_mid
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1))
        .map(|(e, v)| (*e, v.clone()))
        .unwrap();
    let strict_unique = at_mid
        .iter()
        .filter(|(e, v)| *e != best.0 && *v >= best.1)
        .count()
        == 0;
    if !strict_unique || best.0 == i64::MIN {
        return Err(Error::NotAUnit(format!(
            "no single term dominates on ({q1}, {q2})"
        )));
    }
    let n = best.0;
    for q in [q1, q2] {
        let lines = lines_at(q)?;
        let mine = lines.iter().find(|(e, _)| *e == n).unwrap().1.clone();
        for (e, v) in &lines {
            if *e != n && *v > mine {
                return Err(Error::NotAUnit(format!(
                    "no single term dominates on ({q1}, {q2})"
                )));
            }
        }
    }
    Ok((n, f.coefficient(n)))
}

/// Degree and orientation of the map q -> norm-profile induced by a unit.
pub fn classify_map(f: &LaurentChunk, q1: &BigRational, q2: &BigRational) -> Result<MapClass> {
    let (n, _) = dominant_term(f, q1, q2)?;
    if n == 0 {
        return Err(Error::DegreeZero);
    }
    Ok(MapClass {
        degree: n.unsigned_abs(),
        orientation: if n > 0 {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        },
        dominant_exp: n,
    })
}

/// Sign class of the unit part h: exponents all positive, all negative, or
/// absent. Mixed support falls outside the exact-composition classes.
enum UnitShape {
    Trivial,
    Upward,
    Downward,
}

fn unit_shape(h: &LaurentChunk) -> Result<UnitShape> {
    match (h.min_exp(), h.max_exp()) {
        (None, _) | (_, None) => Ok(UnitShape::Trivial),
        (Some(min), Some(max)) => {
            if min > 0 {
                Ok(UnitShape::Upward)
            } else if max < 0 {
                Ok(UnitShape::Downward)
            } else {
                Err(Error::WindowNotCertifiable(format!(
                    "unit part mixes exponent signs ({min}..{max}); window coefficients \
                     would be infinite sums"
                )))
            }
        }
    }
}

/// (1+h)^{-m} truncated so that every kept coefficient is an exact finite
/// sum: one-signed h makes h^k march monotonically away from 0.
fn newton_inverse_power(
    h: &LaurentChunk,
    m: u64,
    keep: impl Fn(i64) -> bool,
    steps: u64,
) -> LaurentChunk {
    let ctx = h.context();
    let mut acc = LaurentChunk::one(ctx);
    let mut hk = LaurentChunk::one(ctx);
    for k in 1..=steps {
        hk = hk.mul(h).expect("finite chunks");
        hk = LaurentChunk::from_coeffs(
            ctx,
            hk.coeffs()
                .iter()
                .filter(|(e, _)| keep(**e))
                .map(|(e, c)| (*e, c.clone())),
        );
        if hk.is_zero() {
            break;
        }
        let c = binomial(BigInt::from(m + k - 1), BigInt::from(k));
        let sign = if k % 2 == 1 { -c } else { c };
        let coef = ctx.scalar_from_ratio(BigRational::from_integer(sign));
        acc = acc.add(&hk.scale(&coef)).expect("finite chunks");
    }
    acc
}

/// Exact positive power by repeated multiplication.
fn positive_power(f: &LaurentChunk, m: u64) -> LaurentChunk {
    let mut acc = LaurentChunk::one(f.context());
    for _ in 0..m {
        acc = acc.mul(f).expect("finite chunks");
    }
    acc
}

/// Substitutes s = f(t) into g(s) on the window. Exactness demands finite
/// operands and a one-signed unit part; the upward class yields a finite
/// exact result on (-inf, window.hi], the downward class an exact explicit
/// part on [window.lo, ..] plus a geometric tail certificate anchored at q1.
pub fn compose(
    g: &LaurentChunk,
    f: &LaurentChunk,
    q1: &BigRational,
    q2: &BigRational,
    window: Window,
) -> Result<LaurentChunk> {
    let ctx = f.context();
    assert_eq!(ctx, g.context(), "chunks from different p-adic contexts");
    if f.tail().is_some() {
        return Err(Error::WindowNotCertifiable(
            "composition target carries a tail certificate".into(),
        ));
    }
    if g.tail().is_some() {
        return Err(Error::WindowNotCertifiable(
            "outer series carries a tail certificate".into(),
        ));
    }
    if g.is_zero() {
        return Ok(LaurentChunk::zero(ctx));
    }
    let mut result = LaurentChunk::zero(ctx);
    let mut tail_bound = NormExp::Bottom;
    let mut tail_needed = false;
    // Dominant-term analysis is needed only once negative powers of f
    // appear; positive powers are exact for any finite f.
    let mut unit: Option<(i64, PScalar, LaurentChunk)> = None;
    for (i, gi) in g.coeffs() {
        let i = *i;
        if i >= 0 {
            let term = positive_power(f, i as u64).scale(gi);
            result = result.add(&term)?;
            continue;
        }
        if unit.is_none() {
            let (n, lead) = dominant_term(f, q1, q2)?;
            // h = f / (lead t^n) - 1, supported away from exponent 0.
            let h = LaurentChunk::from_coeffs(
                ctx,
                f.coeffs()
                    .iter()
                    .filter(|(e, _)| **e != n)
                    .map(|(e, c)| (*e - n, c.div(&lead).unwrap())),
            );
            unit = Some((n, lead, h));
        }
        let (n, lead, h) = unit.as_ref().unwrap();
        let m = i.unsigned_abs();
        // f^i = lead^i t^{n i} (1+h)^{-m}
        let lead_pow = lead.pow_i64(i).unwrap();
        let shift = n * i;
        let series = match unit_shape(h)? {
            UnitShape::Trivial => LaurentChunk::one(ctx),
            UnitShape::Upward => {
                let cap = window.hi - shift;
                if cap < 0 {
                    LaurentChunk::zero(ctx)
                } else {
                    let min_h = h.min_exp().unwrap();
                    let steps = (cap / min_h).max(0) as u64 + 1;
                    newton_inverse_power(h, m, |e| e <= cap, steps)
                }
            }
            UnitShape::Downward => {
                let floor = window.lo - shift;
                // Every truncated term obeys the per-term line bound
                // norm_exp + q1*j <= norm_exp(gi lead^i) + n i q1: the
                // binomials are integers and |h|_{q1} <= 1.
                let shift_q = BigRational::from_integer(BigInt::from(shift));
                tail_bound = tail_bound.max((gi * &lead_pow).norm_exp().shift(&(q1 * shift_q)));
                tail_needed = true;
                if floor > 0 {
                    LaurentChunk::zero(ctx)
                } else {
                    let max_h = h.max_exp().unwrap();
                    let steps = (floor / max_h).max(0) as u64 + 1;
                    newton_inverse_power(h, m, |e| e >= floor, steps)
                }
            }
        };
        let term = series.scale(&(gi * &lead_pow)).shift_exp(shift)?;
        result = result.add(&term)?;
    }
    let result = result.clip_above(window.hi);
    if !tail_needed {
        return Ok(result);
    }
    if window.lo > 0 {
        return Err(Error::WindowNotCertifiable(format!(
            "window floor {} cannot anchor a tail certificate",
            window.lo
        )));
    }
    // Fold any explicit content below the floor (from positive-power
    // cross terms) into the certificate along with the geometric bound.
    let mut coeffs = result.coeffs().clone();
    LaurentChunk::fold_below(&mut coeffs, window.lo, q1, &mut tail_bound);
    LaurentChunk {
        ctx,
        coeffs,
        tail: None,
    }
    .with_tail(TailBound::new(window.lo, q1.clone(), tail_bound)?)
}

/// 1/f on the window: compose with s^{-1}.
pub fn invert_unit(
    f: &LaurentChunk,
    q1: &BigRational,
    q2: &BigRational,
    window: Window,
) -> Result<LaurentChunk> {
    let ctx = f.context();
    let g = LaurentChunk::monomial(ctx, -1, ctx.one());
    compose(&g, f, q1, q2, window)
}

impl fmt::Display for LaurentChunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (e, c)) in self.coeffs.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                match e {
                    0 => write!(f, "{c}")?,
                    1 => write!(f, "{c}*t")?,
                    _ => write!(f, "{c}*t^{e}")?,
                }
            }
        }
        if let Some(t) = &self.tail {
            write!(
                f,
                " [tail below {} at q0={}: {}]",
                t.below, t.q0, t.bound_exp
            )?;
        }
        Ok(())
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

    fn chunk(ctx: PContext, entries: &[(i64, i64)]) -> LaurentChunk {
        LaurentChunk::from_coeffs(ctx, entries.iter().map(|(e, c)| (*e, ctx.scalar_i64(*c))))
    }

    #[test]
    fn arithmetic_examples() {
        let c = ctx();
        let a = chunk(c, &[(0, 1), (1, 1)]);
        let b = chunk(c, &[(0, 1), (1, -1)]);
        assert_eq!(a.mul(&b).unwrap(), chunk(c, &[(0, 1), (2, -1)]));
        let tinv = chunk(c, &[(-1, 1)]);
        let t = chunk(c, &[(1, 1)]);
        assert_eq!(tinv.mul(&t).unwrap(), LaurentChunk::one(c));
        let s = chunk(c, &[(0, 2), (1, 1)]);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq, chunk(c, &[(0, 4), (1, 4), (2, 1)]));
        assert_eq!(sq.gauss_norm_exp(&q(0, 1)).unwrap(), NormExp::exp_i64(0));
    }

    #[test]
    fn derivative_examples() {
        let c = ctx();
        assert_eq!(chunk(c, &[(2, 1)]).derivative(), chunk(c, &[(1, 2)]));
        assert_eq!(chunk(c, &[(-1, 1)]).derivative(), chunk(c, &[(-2, -1)]));
        let f = chunk(c, &[(-2, 3), (4, 5)]);
        assert!(f.derivative().coefficient(-1).is_zero());
    }

    #[test]
    fn gauss_examples() {
        let c = ctx();
        assert_eq!(
            chunk(c, &[(0, 2), (1, 1)])
                .gauss_norm_exp(&q(-1, 2))
                .unwrap(),
            NormExp::exp_ratio(-1, 2)
        );
        assert_eq!(
            chunk(c, &[(-1, 1)]).gauss_norm_exp(&q(3, 2)).unwrap(),
            NormExp::exp_ratio(-3, 2)
        );
        assert_eq!(
            chunk(c, &[(-2, 4), (3, 1)])
                .gauss_norm_exp(&q(1, 1))
                .unwrap(),
            NormExp::exp_i64(3)
        );
    }

    #[test]
    fn tail_queries() {
        let c = ctx();
        let f = chunk(c, &[(-2, 1), (0, 3)])
            .with_tail(TailBound::new(-2, q(-1, 1), NormExp::exp_i64(1)).unwrap())
            .unwrap();
        // Tail line at q = -1 is 1; at q = 0 it is 1 + (0 - (-1))*(-3) = -2.
        assert_eq!(f.gauss_norm_exp(&q(-1, 1)).unwrap(), NormExp::exp_i64(2));
        assert_eq!(f.gauss_norm_exp(&q(0, 1)).unwrap(), NormExp::exp_i64(0));
        assert!(matches!(
            f.gauss_norm_exp(&q(-2, 1)),
            Err(Error::RadiusBelowTailCertificate { .. })
        ));
    }

    #[test]
    fn tail_addition_folds_dropped_terms() {
        let c = ctx();
        let f = chunk(c, &[(-3, 1), (0, 1)]);
        let g = chunk(c, &[(0, 1)])
            .with_tail(TailBound::new(-1, q(0, 1), NormExp::exp_i64(-5)).unwrap())
            .unwrap();
        let s = f.add(&g).unwrap();
        let t = s.tail().unwrap();
        assert_eq!(t.below, -1);
        // The dropped explicit 1*t^{-3} has line 0 at q0 = 0, beating -5.
        assert_eq!(t.bound_exp, NormExp::exp_i64(0));
        assert_eq!(s.coefficient(0), c.scalar_i64(2));
        assert!(s.coefficient(-3).is_zero());
    }

    #[test]
    fn tail_radius_disagreement_is_rejected() {
        let c = ctx();
        let f = chunk(c, &[(0, 1)])
            .with_tail(TailBound::new(-1, q(0, 1), NormExp::exp_i64(0)).unwrap())
            .unwrap();
        let g = chunk(c, &[(0, 1)])
            .with_tail(TailBound::new(-1, q(1, 1), NormExp::exp_i64(0)).unwrap())
            .unwrap();
        assert!(matches!(f.add(&g), Err(Error::IncompatibleTails(_))));
    }

    #[test]
    fn product_contamination_threshold() {
        let c = ctx();
        // f = t^{-1} + tail below -1; g = t^2. Contamination reaches 1 > 0.
        let f = chunk(c, &[(-1, 1)])
            .with_tail(TailBound::new(-1, q(0, 1), NormExp::exp_i64(0)).unwrap())
            .unwrap();
        let g = chunk(c, &[(2, 1)]);
        assert!(matches!(f.mul(&g), Err(Error::WindowNotCertifiable(_))));
        // Against t^{1} the contamination stays at exponents < 0.
        let g2 = chunk(c, &[(1, 1)]);
        let prod = f.mul(&g2).unwrap();
        assert_eq!(prod.coefficient(0), c.scalar_i64(1));
        assert_eq!(prod.tail().unwrap().below, 0);
    }

    #[test]
    fn derivative_moves_tail() {
        let c = ctx();
        let f = chunk(c, &[(0, 1)])
            .with_tail(TailBound::new(-1, q(2, 1), NormExp::exp_i64(3)).unwrap())
            .unwrap();
        let d = f.derivative();
        let t = d.tail().unwrap();
        assert_eq!(t.below, -2);
        assert_eq!(t.bound_exp, NormExp::exp_i64(1));
        assert_eq!(t.q0, q(2, 1));
    }

    #[test]
    fn dominant_term_examples() {
        let c = ctx();
        let f = chunk(c, &[(1, 1), (3, 2)]);
        assert_eq!(
            dominant_term(&f, &q(-1, 1), &q(0, 1)).unwrap(),
            (1, c.scalar_i64(1))
        );
        let g = chunk(c, &[(-1, 1)]);
        assert_eq!(
            dominant_term(&g, &q(-7, 1), &q(9, 1)).unwrap(),
            (-1, c.scalar_i64(1))
        );
        let h = chunk(c, &[(1, 1), (2, 1)]);
        assert!(matches!(
            dominant_term(&h, &q(-1, 1), &q(1, 1)),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let c = ctx();
        let inv = chunk(c, &[(-1, 1)]);
        let m = classify_map(&inv, &q(-1, 1), &q(1, 1)).unwrap();
        assert_eq!((m.degree, m.orientation), (1, Orientation::Reversing));
        let f = chunk(c, &[(1, 1), (2, 2)]);
        let m = classify_map(&f, &q(-2, 1), &q(-1, 1)).unwrap();
        assert_eq!((m.degree, m.orientation), (1, Orientation::Preserving));
        let sq = chunk(c, &[(2, 1)]);
        let m = classify_map(&sq, &q(-1, 1), &q(1, 1)).unwrap();
        assert_eq!((m.degree, m.orientation), (2, Orientation::Preserving));
        let konst = chunk(c, &[(0, 5)]);
        assert!(matches!(
            classify_map(&konst, &q(-1, 1), &q(1, 1)),
            Err(Error::DegreeZero)
        ));
    }

    #[test]
    fn invert_examples() {
        let c = ctx();
        let t = chunk(c, &[(1, 1)]);
        let r = invert_unit(&t, &q(-2, 1), &q(0, 1), Window::new(-2, 2)).unwrap();
        assert_eq!(r, chunk(c, &[(-1, 1)]));

        let f = chunk(c, &[(0, 1), (1, 2)]);
        let r = invert_unit(&f, &q(-2, 1), &q(0, 1), Window::new(0, 4)).unwrap();
        assert_eq!(r, chunk(c, &[(0, 1), (1, -2), (2, 4), (3, -8), (4, 16)]));
        assert!(r.tail().is_none());

        let g = chunk(c, &[(1, 1), (2, 2)]);
        let r = invert_unit(&g, &q(-2, 1), &q(0, 1), Window::new(-1, 2)).unwrap();
        assert_eq!(r, chunk(c, &[(-1, 1), (0, -2), (1, 4), (2, -8)]));
        // Multiplying back: exact 1 plus junk beyond the certified range.
        let prod = g.mul(&r).unwrap();
        assert_eq!(prod, chunk(c, &[(0, 1), (4, -16)]));
    }

    #[test]
    fn invert_downward_unit_carries_tail() {
        let c = ctx();
        // f = t^{-1}(1 + 2t^{-1}); 1/f = t - 2 + 4t^{-1} - 8t^{-2} + ...
        let f = chunk(c, &[(-1, 1), (-2, 2)]);
        let r = invert_unit(&f, &q(0, 1), &q(2, 1), Window::new(-2, 3)).unwrap();
        assert_eq!(r.coefficient(1), c.scalar_i64(1));
        assert_eq!(r.coefficient(0), c.scalar_i64(-2));
        assert_eq!(r.coefficient(-1), c.scalar_i64(4));
        assert_eq!(r.coefficient(-2), c.scalar_i64(-8));
        let t = r.tail().unwrap();
        assert_eq!(t.below, -2);
        assert_eq!(t.q0, q(0, 1));
        // Sanity: the omitted terms 16 t^{-3}, -32 t^{-4}, ... satisfy the
        // per-term bound norm_exp + q0*j <= bound_exp at q0 = 0.
        for j in 3..8i64 {
            let omitted = c.scalar_i64(if j % 2 == 1 { 1 } else { -1 } * (1i64 << (j + 1)));
            assert!(omitted.norm_exp() <= t.bound_exp);
        }
    }

    #[test]
    fn compose_examples() {
        let c = ctx();
        let g = chunk(c, &[(2, 1)]);
        let f = chunk(c, &[(0, 1), (1, 1)]);
        let r = compose(&g, &f, &q(-3, 1), &q(-1, 1), Window::new(0, 5)).unwrap();
        assert_eq!(r, chunk(c, &[(0, 1), (1, 2), (2, 1)]));

        let ginv = chunk(c, &[(-1, 1)]);
        let f2 = chunk(c, &[(1, 1), (2, 2)]);
        let r = compose(&ginv, &f2, &q(-2, 1), &q(0, 1), Window::new(-1, 1)).unwrap();
        assert_eq!(r, chunk(c, &[(-1, 1), (0, -2), (1, 4)]));

        let ident = chunk(c, &[(1, 1)]);
        let any = chunk(c, &[(-3, 7), (0, 2), (2, 5)]);
        let r = compose(&ident, &any, &q(-1, 1), &q(1, 1), Window::new(-5, 5)).unwrap();
        assert_eq!(r, any);
    }

    #[test]
    fn compose_rejects_mixed_unit_part() {
        let c = ctx();
        // f = 2 + t + 4t^2 has dominant exponent 1 on (-1/2, 1/2), so its
        // unit part 2t^{-1} + 4t mixes exponent signs.
        let f = chunk(c, &[(0, 2), (1, 1), (2, 4)]);
        let g = chunk(c, &[(-1, 1)]);
        let r = compose(&g, &f, &q(-1, 2), &q(1, 2), Window::new(-1, 1));
        assert!(matches!(r, Err(Error::WindowNotCertifiable(_))));
    }

    #[test]
    fn restrict_folds_into_tail() {
        let c = ctx();
        let f = chunk(c, &[(-4, 1), (0, 1), (5, 1)]);
        let r = f.restrict(Window::new(-2, 3), &q(1, 1)).unwrap();
        assert!(r.coefficient(-4).is_zero());
        assert!(r.coefficient(5).is_zero());
        let t = r.tail().unwrap();
        assert_eq!(t.below, -2);
        // Folded line of t^{-4} at q0 = 1: 0 + 1*(-4) = -4.
        assert_eq!(t.bound_exp, NormExp::exp_i64(-4));
    }
}
