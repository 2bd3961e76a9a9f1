//! Genus-0 domain model: the projective line minus closed discs.
//!
//! A wide-open domain removes n >= 1 pairwise disjoint closed discs from
//! P^1; each removed disc contributes one end, reached through a boundary
//! annulus whose canonical coordinate is t - a (or 1/t at infinity).
//! Affinoid slices trim every end at a chosen radius; their Shilov points
//! are the Gauss points at the trim radii, which is where spectral norms
//! are read off.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;

use crate::error::{Error, Result};
use crate::laurent::LaurentChunk;
use crate::scalar::{NormExp, PContext};

/// A point of P^1 usable as a disc center or pole location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Center {
    Finite(BigRational),
    Inf,
}

impl Center {
    pub fn finite_i64(n: i64) -> Self {
        Center::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            Center::Finite(a) => Some(a),
            Center::Inf => None,
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Center::Inf)
    }
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Center::Finite(a) => write!(f, "{a}"),
            Center::Inf => write!(f, "inf"),
        }
    }
}

/// A closed disc: {|t - a| <= p^radius_q}, or {|t| >= p^{-radius_q}} for
/// the disc at infinity (a closed disc around 0 in the coordinate 1/t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disc {
    pub center: Center,
    pub radius_q: BigRational,
}

impl Disc {
    pub fn finite(center: BigRational, radius_q: BigRational) -> Self {
        Disc {
            center: Center::Finite(center),
            radius_q,
        }
    }

    pub fn at_infinity(radius_q: BigRational) -> Self {
        Disc {
            center: Center::Inf,
            radius_q,
        }
    }
}

/// One end of a wide-open domain, canonically labeled by its removed disc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct End {
    pub index: usize,
    pub center: Center,
}

/// Direction an annulus is traversed: INNER points toward the removed
/// disc, which is the boundary-annulus convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toward {
    Inner,
    Outer,
}

/// An annulus A(0; p^q1, p^q2) in the canonical end coordinate, tagged
/// with its end and an orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedAnnulus {
    pub end: End,
    /// True when the coordinate is 1/t (the end at infinity).
    pub inverted: bool,
    pub q1: BigRational,
    pub q2: BigRational,
    pub oriented_toward: Toward,
}

impl OrientedAnnulus {
    pub fn flipped(&self) -> OrientedAnnulus {
        let mut a = self.clone();
        a.oriented_toward = match self.oriented_toward {
            Toward::Inner => Toward::Outer,
            Toward::Outer => Toward::Inner,
        };
        a
    }
}

/// P^1 minus n >= 1 pairwise disjoint closed discs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideOpenDomain {
    ctx: PContext,
    discs: Vec<Disc>,
}

fn norm_exp_of(ctx: PContext, a: &BigRational) -> NormExp {
    ctx.scalar_from_ratio(a.clone()).norm_exp()
}

/// max(|a|-exponent, q): the outer reach exponent of the disc D(a, p^q)
/// seen from 0, i.e. sup of norm exponents of its points.
fn disc_reach(ctx: PContext, a: &BigRational, q: &BigRational) -> BigRational {
    match norm_exp_of(ctx, a) {
        NormExp::Bottom => q.clone(),
        NormExp::Exp(e) => e.max(q.clone()),
    }
}

impl WideOpenDomain {
    pub fn new(ctx: PContext, discs: Vec<Disc>) -> Result<Self> {
        if discs.is_empty() {
            return Err(Error::Invalid(
                "a wide-open domain removes at least one disc".into(),
            ));
        }
        for i in 0..discs.len() {
            for j in i + 1..discs.len() {
                let (di, dj) = (&discs[i], &discs[j]);
                match (&di.center, &dj.center) {
                    (Center::Inf, Center::Inf) => {
                        return Err(Error::DuplicateCenters("two discs at inf".into()));
                    }
                    (Center::Finite(a), Center::Finite(b)) => {
                        if a == b {
                            return Err(Error::DuplicateCenters(format!(
                                "two discs centered at {a}"
                            )));
                        }
                        let gap = norm_exp_of(ctx, &(a - b));
                        let need = di.radius_q.clone().max(dj.radius_q.clone());
                        if gap <= NormExp::Exp(need.clone()) {
                            return Err(Error::OverlappingDiscs(format!(
                                "centers {a} and {b} at distance exponent {gap} with radii up to {need}"
                            )));
                        }
                    }
                    (Center::Finite(a), Center::Inf) | (Center::Inf, Center::Finite(a)) => {
                        let (qa, qi) = if di.center.is_inf() {
                            (&dj.radius_q, &di.radius_q)
                        } else {
                            (&di.radius_q, &dj.radius_q)
                        };
                        // D(a, p^qa) avoids {|t| >= p^{-qi}} iff its reach
                        // stays strictly inside.
                        if disc_reach(ctx, a, qa) >= -qi.clone() {
                            return Err(Error::OverlappingDiscs(format!(
                                "disc at {a} reaches the disc at inf"
                            )));
                        }
                    }
                }
            }
        }
        Ok(WideOpenDomain { ctx, discs })
    }

    pub fn context(&self) -> PContext {
        self.ctx
    }

    pub fn discs(&self) -> &[Disc] {
        &self.discs
    }

    pub fn ends(&self) -> Vec<End> {
        self.discs
            .iter()
            .enumerate()
            .map(|(index, d)| End {
                index,
                center: d.center.clone(),
            })
            .collect()
    }

    /// Supremum of admissible outer radius exponents for boundary annuli at
    /// the given end; None when no other disc constrains it.
    pub fn separation_bound(&self, end: usize) -> Option<BigRational> {
        let my = &self.discs[end];
        let mut best: Option<BigRational> = None;
        let mut push = |v: BigRational| {
            best = Some(match best.take() {
                None => v,
                Some(b) => b.min(v),
            });
        };
        for (j, other) in self.discs.iter().enumerate() {
            if j == end {
                continue;
            }
            match (&my.center, &other.center) {
                (Center::Finite(a), Center::Finite(b)) => {
                    if let NormExp::Exp(d) = norm_exp_of(self.ctx, &(a - b)) {
                        push(d);
                    }
                }
                (Center::Finite(_), Center::Inf) => push(-other.radius_q.clone()),
                (Center::Inf, Center::Finite(b)) => {
                    push(-disc_reach(self.ctx, b, &other.radius_q));
                }
                (Center::Inf, Center::Inf) => unreachable!("validated at construction"),
            }
        }
        best
    }

    /// The boundary annulus at an end, running from the removed disc's
    /// radius out to q_outer, oriented toward the disc.
    pub fn boundary_annulus(&self, end: usize, q_outer: &BigRational) -> Result<OrientedAnnulus> {
        let disc = &self.discs[end];
        let q1 = disc.radius_q.clone();
        if *q_outer <= q1 {
            return Err(Error::RadiusOutOfRange(format!(
                "outer exponent {q_outer} does not exceed the disc radius exponent {q1}"
            )));
        }
        if let Some(sep) = self.separation_bound(end) {
            if *q_outer >= sep {
                return Err(Error::RadiusOutOfRange(format!(
                    "outer exponent {q_outer} reaches the neighboring disc (bound {sep})"
                )));
            }
        }
        Ok(OrientedAnnulus {
            end: End {
                index: end,
                center: disc.center.clone(),
            },
            inverted: disc.center.is_inf(),
            q1,
            q2: q_outer.clone(),
            oriented_toward: Toward::Inner,
        })
    }
}

/// The domain with every end trimmed at a radius inside its boundary
/// annulus range; a compact carrier for spectral norms.
#[derive(Debug, Clone)]
pub struct AffinoidSlice {
    domain: WideOpenDomain,
    trims: Vec<BigRational>,
}

impl AffinoidSlice {
    pub fn new(domain: WideOpenDomain, trims: Vec<BigRational>) -> Result<Self> {
        if trims.len() != domain.discs().len() {
            return Err(Error::Invalid(format!(
                "{} trims for {} ends",
                trims.len(),
                domain.discs().len()
            )));
        }
        for (i, q) in trims.iter().enumerate() {
            let lo = &domain.discs()[i].radius_q;
            if q <= lo {
                return Err(Error::RadiusOutOfRange(format!(
                    "trim {q} at end {i} does not exceed the disc radius exponent {lo}"
                )));
            }
            if let Some(sep) = domain.separation_bound(i) {
                if *q >= sep {
                    return Err(Error::RadiusOutOfRange(format!(
                        "trim {q} at end {i} reaches the neighboring disc (bound {sep})"
                    )));
                }
            }
        }
        Ok(AffinoidSlice { domain, trims })
    }

    pub fn domain(&self) -> &WideOpenDomain {
        &self.domain
    }

    pub fn trims(&self) -> &[BigRational] {
        &self.trims
    }

    /// Supremum norm over the slice of a function given per-end: the Gauss
    /// norm at each trim radius, maximized over ends.
    pub fn spectral_norm_exp(&self, per_end: &[LaurentChunk]) -> Result<NormExp> {
        assert_eq!(per_end.len(), self.trims.len(), "one chunk per end");
        let mut acc = NormExp::Bottom;
        for (chunk, q) in per_end.iter().zip(&self.trims) {
            acc = acc.max(chunk.gauss_norm_exp(q)?);
        }
        Ok(acc)
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

    /// Two ends: disc of radius 2^{-2} at 0 and the region |t| >= 4.
    fn standard(c: PContext) -> WideOpenDomain {
        WideOpenDomain::new(
            c,
            vec![Disc::finite(q(0, 1), q(-2, 1)), Disc::at_infinity(q(-2, 1))],
        )
        .unwrap()
    }

    #[test]
    fn builds_standard_instance() {
        let d = standard(ctx());
        assert_eq!(d.ends().len(), 2);
        assert_eq!(d.separation_bound(0), Some(q(2, 1)));
        assert_eq!(d.separation_bound(1), Some(q(2, 1)));
    }

    #[test]
    fn single_disc_domain_is_unbounded() {
        let c = ctx();
        let d = WideOpenDomain::new(c, vec![Disc::finite(q(0, 1), q(-2, 1))]).unwrap();
        assert_eq!(d.separation_bound(0), None);
        assert!(d.boundary_annulus(0, &q(100, 1)).is_ok());
    }

    #[test]
    fn disjointness_checks() {
        let c = ctx();
        // |0 - 1/2| has exponent 1 > -2: valid.
        assert!(WideOpenDomain::new(
            c,
            vec![
                Disc::finite(q(0, 1), q(-2, 1)),
                Disc::finite(q(1, 2), q(-2, 1))
            ],
        )
        .is_ok());
        // Radius exponent 1 >= distance exponent 1: overlap.
        assert!(matches!(
            WideOpenDomain::new(
                c,
                vec![
                    Disc::finite(q(0, 1), q(1, 1)),
                    Disc::finite(q(1, 2), q(-2, 1))
                ],
            ),
            Err(Error::OverlappingDiscs(_))
        ));
        assert!(matches!(
            WideOpenDomain::new(
                c,
                vec![
                    Disc::finite(q(3, 1), q(0, 1)),
                    Disc::finite(q(3, 1), q(0, 1))
                ],
            ),
            Err(Error::DuplicateCenters(_))
        ));
        // |1/4| = 4 = 2^2, so a disc centered there meets {|t| >= 4}.
        assert!(matches!(
            WideOpenDomain::new(
                c,
                vec![Disc::finite(q(1, 4), q(0, 1)), Disc::at_infinity(q(-2, 1))],
            ),
            Err(Error::OverlappingDiscs(_))
        ));
        // The integer 4 is p-adically small; the same disc shape is fine.
        assert!(WideOpenDomain::new(
            c,
            vec![Disc::finite(q(4, 1), q(0, 1)), Disc::at_infinity(q(-2, 1))],
        )
        .is_ok());
    }

    #[test]
    fn boundary_annuli_of_standard_instance() {
        let d = standard(ctx());
        let a0 = d.boundary_annulus(0, &q(-1, 1)).unwrap();
        assert_eq!((a0.q1.clone(), a0.q2.clone()), (q(-2, 1), q(-1, 1)));
        assert!(!a0.inverted);
        assert_eq!(a0.oriented_toward, Toward::Inner);

        // At inf: 2 < |t| < 4 reads as 2^{-2} < |1/t| < 2^{-1}.
        let a1 = d.boundary_annulus(1, &q(-1, 1)).unwrap();
        assert_eq!((a1.q1.clone(), a1.q2.clone()), (q(-2, 1), q(-1, 1)));
        assert!(a1.inverted);

        assert!(matches!(
            d.boundary_annulus(0, &q(-2, 1)),
            Err(Error::RadiusOutOfRange(_))
        ));
        assert!(matches!(
            d.boundary_annulus(0, &q(2, 1)),
            Err(Error::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn annuli_at_one_end_nest() {
        let d = standard(ctx());
        let inner = d.boundary_annulus(0, &q(-3, 2)).unwrap();
        let outer = d.boundary_annulus(0, &q(-1, 1)).unwrap();
        assert_eq!(inner.q1, outer.q1);
        assert!(inner.q2 < outer.q2);
    }

    #[test]
    fn flip_toggles_orientation() {
        let d = standard(ctx());
        let a = d.boundary_annulus(0, &q(-1, 1)).unwrap();
        assert_eq!(a.flipped().oriented_toward, Toward::Outer);
        assert_eq!(a.flipped().flipped(), a);
    }

    #[test]
    fn spectral_norm_examples() {
        let c = ctx();
        let slice = AffinoidSlice::new(standard(c), vec![q(-3, 2), q(-3, 2)]).unwrap();
        // f = t^{-1} + 2 reads as t_2 + 2 on the inf side.
        let side1 = LaurentChunk::from_coeffs(c, [(-1, c.one()), (0, c.scalar_i64(2))]);
        let side2 = LaurentChunk::from_coeffs(c, [(1, c.one()), (0, c.scalar_i64(2))]);
        assert_eq!(
            slice.spectral_norm_exp(&[side1, side2]).unwrap(),
            NormExp::exp_ratio(3, 2)
        );
        let zero = LaurentChunk::zero(c);
        assert!(slice
            .spectral_norm_exp(&[zero.clone(), zero])
            .unwrap()
            .is_bottom());
        let one = LaurentChunk::one(c);
        assert_eq!(
            slice.spectral_norm_exp(&[one.clone(), one]).unwrap(),
            NormExp::exp_i64(0)
        );
    }

    #[test]
    fn trim_validation() {
        let c = ctx();
        assert!(matches!(
            AffinoidSlice::new(standard(c), vec![q(-2, 1), q(-3, 2)]),
            Err(Error::RadiusOutOfRange(_))
        ));
        assert!(matches!(
            AffinoidSlice::new(standard(c), vec![q(-3, 2), q(5, 2)]),
            Err(Error::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn gauss_norm_is_spectral_on_each_end() {
        let c = ctx();
        let slice = AffinoidSlice::new(standard(c), vec![q(-1, 1), q(-1, 1)]).unwrap();
        let f = LaurentChunk::from_coeffs(c, [(-2, c.scalar_i64(4)), (3, c.one())]);
        let g = LaurentChunk::zero(c);
        let expect = f.gauss_norm_exp(&q(-1, 1)).unwrap();
        assert_eq!(slice.spectral_norm_exp(&[f, g]).unwrap(), expect);
    }
}
