//! Residues on oriented annuli and the residue-theorem checks.
//!
//! The residue of a differential on an end is the t^{-1} coefficient of its
//! series in an orientation-preserving coordinate; the canonical end
//! coordinates point INNER, so an OUTER-oriented reading negates the
//! coefficient. Everything downstream (the disc lemma, the residue theorem
//! on a wide-open domain, the inside-outside and splitting corollaries) is
//! an exact equality of such coefficients.

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::geometry::{Center, OrientedAnnulus, Toward, WideOpenDomain};
use crate::laurent::{classify_map, compose, LaurentChunk, Orientation, Window};
use crate::rational::RationalDiff;
use crate::scalar::{NormExp, PContext, PScalar};

/// A differential alpha(t) dt on an oriented annulus, held as the series of
/// alpha in the end coordinate.
#[derive(Debug, Clone)]
pub struct AnnularDifferential {
    pub annulus: OrientedAnnulus,
    pub series: LaurentChunk,
}

impl AnnularDifferential {
    pub fn new(annulus: OrientedAnnulus, series: LaurentChunk) -> Self {
        AnnularDifferential { annulus, series }
    }

    /// The residue at the annulus's end. Requires the t^{-1} coefficient to
    /// be explicit: a tail certificate covering -1 obscures it.
    pub fn residue(&self) -> Result<PScalar> {
        if !self.series.is_exact_at(-1) {
            return Err(Error::TailObscuresResidue);
        }
        let c = self.series.coefficient(-1);
        Ok(match self.annulus.oriented_toward {
            Toward::Inner => c,
            Toward::Outer => -c,
        })
    }

    /// The same differential read from the opposite end.
    pub fn flipped(&self) -> AnnularDifferential {
        AnnularDifferential {
            annulus: self.annulus.flipped(),
            series: self.series.clone(),
        }
    }
}

/// Residue at the opposite end: exactly the negation.
pub fn flip_end(omega: &AnnularDifferential) -> Result<PScalar> {
    omega.flipped().residue()
}

/// Two certified expansions of one differential at the same end (nested
/// annuli) must read the same residue.
pub fn end_stability_check(a: &AnnularDifferential, b: &AnnularDifferential) -> Result<bool> {
    if a.annulus.end.index != b.annulus.end.index
        || a.annulus.oriented_toward != b.annulus.oriented_toward
    {
        return Err(Error::Invalid("expansions belong to different ends".into()));
    }
    Ok(a.residue()? == b.residue()?)
}

/// Change of coordinate s = f(t): omega = sum beta_i s^i ds pulls back to
/// (sum beta_i f^i) f' dt on the t-annulus (q1, q2). The orientation flag
/// flips for degree-reversing changes, which is what keeps the residue
/// coordinate-independent.
pub fn pullback(
    omega: &AnnularDifferential,
    f: &LaurentChunk,
    q1: &BigRational,
    q2: &BigRational,
    window: Window,
) -> Result<AnnularDifferential> {
    let class = classify_map(f, q1, q2)?;
    let fprime = f.derivative();
    // Widen so that after multiplying by f' every window coefficient of the
    // product is exact.
    let wc = Window::new(
        window.lo - fprime.max_exp().expect("nonconstant map"),
        window.hi - fprime.min_exp().expect("nonconstant map"),
    );
    let comp = compose(&omega.series, f, q1, q2, wc)?;
    let series = comp.mul(&fprime)?.restrict(window, q1)?;
    let mut annulus = omega.annulus.clone();
    annulus.q1 = q1.clone();
    annulus.q2 = q2.clone();
    if class.orientation == Orientation::Reversing {
        annulus = annulus.flipped();
    }
    Ok(AnnularDifferential::new(annulus, series))
}

fn finite_norm_exp(ctx: PContext, x: &BigRational) -> NormExp {
    ctx.scalar_from_ratio(x.clone()).norm_exp()
}

/// Sum of residues of sum_k part_k(t - b_k) dt at the poles inside the disc
/// bounded by `annulus`, against the residue read on the annulus itself.
/// Exact equality is the disc lemma. Poles outside the disc are allowed and
/// contribute nothing; for a disc at INF the point INF itself lies inside
/// and carries the balancing residue -sum of all simple coefficients.
pub fn disc_lemma_check(
    ctx: PContext,
    poles: &[(BigRational, LaurentChunk)],
    annulus: &OrientedAnnulus,
) -> Result<(PScalar, PScalar, bool)> {
    let mut omega = crate::rational::RationalFn::zero(ctx);
    let mut lhs = ctx.zero();
    let mut total_simple = ctx.zero();
    for (b, part) in poles {
        let radius = match &annulus.end.center {
            Center::Finite(a) => finite_norm_exp(ctx, &(b - a)),
            // In s = 1/t the pole sits at radius -norm(b); b = 0 escapes to
            // s = INF, outside any disc around s = 0.
            Center::Inf => match finite_norm_exp(ctx, b) {
                NormExp::Bottom => NormExp::Exp(annulus.q2.clone() + BigRational::one()),
                NormExp::Exp(e) => NormExp::Exp(-e),
            },
        };
        if radius > NormExp::Exp(annulus.q1.clone()) {
            if radius < NormExp::Exp(annulus.q2.clone()) {
                return Err(Error::PoleOnAnnulus(format!(
                    "pole at {b} lies on the boundary annulus"
                )));
            }
        } else {
            lhs = lhs + part.coefficient(-1);
        }
        total_simple = total_simple + part.coefficient(-1);
        omega = omega.with_part(b.clone(), part.clone())?;
    }
    if annulus.end.center.is_inf() {
        lhs = lhs - total_simple;
    }
    let rhs = annulus_residue(&RationalDiff::new(omega), annulus)?;
    let expected = match annulus.oriented_toward {
        Toward::Inner => lhs.clone(),
        Toward::Outer => -lhs.clone(),
    };
    let equal = rhs == expected;
    Ok((lhs, rhs, equal))
}

/// True when omega has a pole at INF: any entire part (dt alone already has
/// a double pole there), or a nonzero residue sum escaping to INF.
pub fn has_pole_at_inf(omega: &RationalDiff) -> bool {
    if !omega.func.entire().is_zero() {
        return true;
    }
    let ctx = omega.context();
    let mut simple = ctx.zero();
    for part in omega.func.parts().values() {
        simple = simple + part.coefficient(-1);
    }
    !simple.is_zero()
}

/// Every pole of omega must sit inside a removed disc of the domain.
pub fn confine_poles(domain: &WideOpenDomain, omega: &RationalDiff) -> Result<()> {
    let ctx = domain.context();
    for b in omega.func.parts().keys() {
        let mut housed = false;
        for disc in domain.discs() {
            match &disc.center {
                Center::Finite(a) => {
                    if finite_norm_exp(ctx, &(b - a)) <= NormExp::Exp(disc.radius_q.clone()) {
                        housed = true;
                        break;
                    }
                }
                Center::Inf => {
                    if finite_norm_exp(ctx, b) >= NormExp::Exp(-disc.radius_q.clone()) {
                        housed = true;
                        break;
                    }
                }
            }
        }
        if !housed {
            return Err(Error::PoleInsideDomain(format!(
                "pole at {b} lies in the wide-open domain"
            )));
        }
    }
    if has_pole_at_inf(omega) && !domain.discs().iter().any(|d| d.center.is_inf()) {
        return Err(Error::PoleInsideDomain(
            "pole at inf, but no disc is removed there".into(),
        ));
    }
    Ok(())
}

/// The residue of omega read on the given annulus. At INF the entire part
/// lands at exponents below -1 after the coordinate change, so the window
/// floor drops to hold it explicitly.
pub fn annulus_residue(omega: &RationalDiff, annulus: &OrientedAnnulus) -> Result<PScalar> {
    let window = match &annulus.end.center {
        Center::Inf => {
            let d = omega.func.entire().degree().map_or(-1, |d| d as i64);
            Window::new((-2 - d).min(-1), 0)
        }
        Center::Finite(_) => Window::new(-1, 0),
    };
    let series = omega.annulus_expansion(&annulus.end.center, &annulus.q1, &annulus.q2, window)?;
    AnnularDifferential::new(annulus.clone(), series).residue()
}

/// The residue of omega at a domain end, on a boundary annulus at the
/// midpoint of the admissible radius range.
pub fn end_residue(domain: &WideOpenDomain, end: usize, omega: &RationalDiff) -> Result<PScalar> {
    let radius = &domain.discs()[end].radius_q;
    let q_outer = match domain.separation_bound(end) {
        Some(sep) => (radius + sep) / BigRational::from_integer(2.into()),
        None => radius + BigRational::one(),
    };
    let annulus = domain.boundary_annulus(end, &q_outer)?;
    annulus_residue(omega, &annulus)
}

/// Per-end residues and their sum; the theorem is that the sum vanishes for
/// any differential with poles confined to the removed discs.
pub fn residue_theorem_check(
    domain: &WideOpenDomain,
    omega: &RationalDiff,
) -> Result<(Vec<PScalar>, PScalar)> {
    confine_poles(domain, omega)?;
    let mut per_end = Vec::new();
    let mut sum = domain.context().zero();
    for end in 0..domain.discs().len() {
        let r = end_residue(domain, end, omega)?;
        sum = sum + r.clone();
        per_end.push(r);
    }
    Ok((per_end, sum))
}

/// Residue sums over the two annulus families around an affinoid slice:
/// once between disc and trim, once beyond the trim. End-stability makes
/// them agree end by end, so the sums agree exactly.
pub fn inside_outside_check(
    slice: &crate::geometry::AffinoidSlice,
    omega: &RationalDiff,
) -> Result<(PScalar, PScalar, bool)> {
    let domain = slice.domain();
    confine_poles(domain, omega)?;
    let ctx = domain.context();
    let mut inner_sum = ctx.zero();
    let mut outer_sum = ctx.zero();
    for end in 0..domain.discs().len() {
        let radius = &domain.discs()[end].radius_q;
        let trim = &slice.trims()[end];
        let inner = domain.boundary_annulus(end, trim)?;
        inner_sum = inner_sum + annulus_residue(omega, &inner)?;
        let q_out = match domain.separation_bound(end) {
            Some(sep) => (trim + sep) / BigRational::from_integer(2.into()),
            None => trim + BigRational::one(),
        };
        let mut outer = domain.boundary_annulus(end, &q_out)?;
        outer.q1 = trim.clone();
        let _ = radius;
        outer_sum = outer_sum + annulus_residue(omega, &outer)?;
    }
    let equal = inner_sum == outer_sum;
    Ok((inner_sum, outer_sum, equal))
}

/// Validates that U and V split W along a single annular cut and compares
/// the residue sums over the two halves of W's ends. The cut is a finite
/// disc (one extra disc of one domain) against a disc at infinity (the
/// extra disc of the other); antisymmetry of the two sums is the content.
pub fn splitting_check(
    u: &WideOpenDomain,
    v: &WideOpenDomain,
    w: &WideOpenDomain,
    omega: &RationalDiff,
) -> Result<(PScalar, PScalar, bool)> {
    confine_poles(w, omega)?;
    let ctx = w.context();

    let extras_of = |dom: &WideOpenDomain| -> Vec<crate::geometry::Disc> {
        dom.discs()
            .iter()
            .filter(|d| !w.discs().contains(d))
            .cloned()
            .collect()
    };
    let u_extra = extras_of(u);
    let v_extra = extras_of(v);
    if u_extra.len() != 1 || v_extra.len() != 1 {
        return Err(Error::NotAnAnnularOverlap(format!(
            "expected one cut disc per half, found {} and {}",
            u_extra.len(),
            v_extra.len()
        )));
    }
    let (fin_cut, inf_cut) = match (u_extra[0].center.is_inf(), v_extra[0].center.is_inf()) {
        (true, false) => (&v_extra[0], &u_extra[0]),
        (false, true) => (&u_extra[0], &v_extra[0]),
        _ => {
            return Err(Error::NotAnAnnularOverlap(
                "cut discs must pair one finite against one at infinity".into(),
            ))
        }
    };
    let c1 = fin_cut.radius_q.clone();
    let c2 = -inf_cut.radius_q.clone();
    let a = fin_cut.center.as_finite().expect("finite cut disc").clone();
    let reach = match finite_norm_exp(ctx, &a) {
        NormExp::Bottom => c1.clone(),
        NormExp::Exp(e) => e.max(c1.clone()),
    };
    if c1 >= c2 || reach >= c2 {
        return Err(Error::NotAnAnnularOverlap(format!(
            "cut discs at radius exponents {c1} and {c2} leave no annulus between them"
        )));
    }

    // Each of W's discs must appear in exactly one half and fit inside the
    // other half's cut disc, so the overlap is the bare annulus.
    let contained_in_cut = |disc: &crate::geometry::Disc, cut_is_inf: bool| -> bool {
        match (&disc.center, cut_is_inf) {
            (Center::Finite(b), false) => {
                finite_norm_exp(ctx, &(b - &a)) <= NormExp::Exp(c1.clone()) && disc.radius_q <= c1
            }
            (Center::Finite(b), true) => match finite_norm_exp(ctx, b) {
                NormExp::Bottom => false,
                NormExp::Exp(e) => e >= c2 && NormExp::Exp(e) > NormExp::Exp(disc.radius_q.clone()),
            },
            (Center::Inf, true) => -disc.radius_q.clone() >= c2,
            (Center::Inf, false) => false,
        }
    };
    for disc in w.discs() {
        let in_u = u.discs().contains(disc);
        let in_v = v.discs().contains(disc);
        match (in_u, in_v) {
            (true, false) => {
                let v_cut_is_inf = v_extra[0].center.is_inf();
                if !contained_in_cut(disc, v_cut_is_inf) {
                    return Err(Error::NotAnAnnularOverlap(format!(
                        "disc at {} assigned to the first half is not covered by the second half's cut",
                        disc.center
                    )));
                }
            }
            (false, true) => {
                let u_cut_is_inf = u_extra[0].center.is_inf();
                if !contained_in_cut(disc, u_cut_is_inf) {
                    return Err(Error::NotAnAnnularOverlap(format!(
                        "disc at {} assigned to the second half is not covered by the first half's cut",
                        disc.center
                    )));
                }
            }
            (true, true) => {
                return Err(Error::NotAnAnnularOverlap(format!(
                    "disc at {} was removed from both halves",
                    disc.center
                )))
            }
            (false, false) => {
                return Err(Error::NotAnAnnularOverlap(format!(
                    "disc at {} was removed from neither half",
                    disc.center
                )))
            }
        }
    }

    let half_sum = |half: &WideOpenDomain| -> Result<PScalar> {
        let mut sum = ctx.zero();
        for (i, disc) in half.discs().iter().enumerate() {
            if w.discs().contains(disc) {
                sum = sum + end_residue(half, i, omega)?;
            }
        }
        Ok(sum)
    };
    let sum_u = half_sum(u)?;
    let sum_v = half_sum(v)?;
    let antisymmetric = sum_u.clone() == -sum_v.clone();
    Ok((sum_u, sum_v, antisymmetric))
}
