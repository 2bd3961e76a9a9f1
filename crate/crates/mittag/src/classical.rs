//! Classical interpolation on the projective line: divisor-constrained
//! bases, jet-prescription solvers with dual certificates, Mittag-Leffler
//! decomposition, and Runge approximation on affinoid slices.
//!
//! Jet semantics throughout: prescribing data at a point with top index j
//! fixes every local coefficient at exponents <= j (zeros where nothing is
//! listed) and says nothing above j. Solvability is decided criterion-first
//! by pairing the data against a dual basis; the construction that follows
//! a passing criterion is exact linear algebra and is re-verified by
//! expansion before anything is returned.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{AffinoidSlice, Center};
use crate::laurent::{LaurentChunk, Window};
use crate::linalg::{solve_exact, LinearOutcome};
use crate::rational::{binom, Polynomial, RationalDiff, RationalFn};
use crate::scalar::{rational_pow, NormExp, PContext, PScalar};

/// A finitely supported integer divisor on the projective line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Divisor {
    mult: BTreeMap<Center, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    /// Sums duplicate centers; zero multiplicities are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Center, i64)>) -> Self {
        let mut d = Divisor::default();
        for (c, m) in pairs {
            d.add_to(c, m);
        }
        d
    }

    pub fn add_to(&mut self, center: Center, m: i64) {
        let v = self.mult.entry(center.clone()).or_insert(0);
        *v += m;
        if *v == 0 {
            self.mult.remove(&center);
        }
    }

    pub fn multiplicity(&self, center: &Center) -> i64 {
        self.mult.get(center).copied().unwrap_or(0)
    }

    pub fn deg(&self) -> i64 {
        self.mult.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = (&Center, i64)> {
        self.mult.iter().map(|(c, m)| (c, *m))
    }

    pub fn is_effective(&self) -> bool {
        self.mult.values().all(|m| *m > 0)
    }
}

fn poly_divmod(n: &Polynomial, d: &Polynomial) -> (Polynomial, Polynomial) {
    let dd = d.degree().expect("division by the zero polynomial");
    let lead_inv = d.coeff(dd).recip();
    let mut rem: Vec<BigRational> = n.coeffs().to_vec();
    let nd = match n.degree() {
        Some(nd) if nd >= dd => nd,
        _ => return (Polynomial::zero(), n.clone()),
    };
    let mut quot = vec![BigRational::zero(); nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = &rem[i + dd] * &lead_inv;
        if c.is_zero() {
            continue;
        }
        for (k, dc) in d.coeffs().iter().enumerate() {
            let delta = &c * dc;
            rem[i + k] -= delta;
        }
        quot[i] = c;
    }
    (Polynomial::from_coeffs(quot), Polynomial::from_coeffs(rem))
}

/// Multiplicative inverse of a power series mod z^m; c[0] must be nonzero.
fn series_inverse(c: &[BigRational], m: usize) -> Vec<BigRational> {
    let c0_inv = c[0].recip();
    let mut inv = vec![BigRational::zero(); m];
    inv[0] = c0_inv.clone();
    for k in 1..m {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            if i < c.len() {
                acc += &c[i] * &inv[k - i];
            }
        }
        inv[k] = -acc * &c0_inv;
    }
    inv
}

/// Exact partial fractions of num / prod (t-a)^m for the given distinct
/// linear factors.
fn fraction_to_rational_fn(
    ctx: PContext,
    num: &Polynomial,
    factors: &[(BigRational, u64)],
) -> Result<RationalFn> {
    let mut den = Polynomial::one();
    for (a, m) in factors {
        den = den.mul(&Polynomial::from_coeffs(vec![-a.clone(), BigRational::one()]).pow(*m));
    }
    let (quot, rem) = poly_divmod(num, &den);
    let mut f = RationalFn::from_entire(ctx, quot);
    if rem.is_zero() {
        return Ok(f);
    }
    for (a, m) in factors {
        let m = *m as usize;
        let mut cof = Polynomial::one();
        for (b, mb) in factors {
            if b != a {
                cof = cof
                    .mul(&Polynomial::from_coeffs(vec![-b.clone(), BigRational::one()]).pow(*mb));
            }
        }
        let rs = rem.taylor_shift(a);
        let ps = cof.taylor_shift(a);
        let inv = series_inverse(ps.coeffs(), m);
        let mut part = Vec::new();
        for r in 0..m {
            let mut c = BigRational::zero();
            for i in 0..=r {
                if i < rs.coeffs().len() {
                    c += &rs.coeffs()[i] * &inv[r - i];
                }
            }
            if !c.is_zero() {
                part.push((r as i64 - m as i64, ctx.scalar_from_ratio(c)));
            }
        }
        if !part.is_empty() {
            f = f.with_part(a.clone(), LaurentChunk::from_coeffs(ctx, part))?;
        }
    }
    Ok(f)
}

/// Lexicographic pole-order key: order at INF first, then at each finite
/// support center ascending.
fn pole_key(f: &RationalFn, finite_support: &[BigRational]) -> Vec<u64> {
    let mut key = vec![f.pole_order_at_inf()];
    for a in finite_support {
        key.push(f.pole_order(a));
    }
    key
}

/// A basis of L(E) = {f : div(f) >= -E}, dimension deg E + 1 (empty for
/// negative degree), canonicalized pole-order-lexicographic with monic
/// numerators.
fn space_basis(ctx: PContext, e: &Divisor) -> Result<Vec<RationalFn>> {
    let deg = e.deg();
    if deg < 0 {
        return Ok(Vec::new());
    }
    let finite_support: Vec<BigRational> = e
        .support()
        .filter_map(|(c, _)| c.as_finite().cloned())
        .collect();
    let mut out = Vec::new();
    if e.is_effective() {
        // Pure partial-fraction shapes exist exactly when E is effective.
        out.push(RationalFn::constant(ctx, BigRational::one()));
        for (c, m) in e.support() {
            if let Some(a) = c.as_finite() {
                for k in 1..=m as u64 {
                    out.push(RationalFn::pole_monomial(ctx, a.clone(), k, ctx.one()));
                }
            }
        }
        for m in 1..=e.multiplicity(&Center::Inf) as u64 {
            out.push(RationalFn::from_entire(
                ctx,
                Polynomial::monomial(m as usize, BigRational::one()),
            ));
        }
    } else {
        // Required zeros Z over negative multiplicities, allowed poles P
        // over positive ones; t^j Z/P for j = 0..deg E spans L(E).
        let mut z = Polynomial::one();
        let mut factors = Vec::new();
        for (c, m) in e.support() {
            let Some(a) = c.as_finite() else { continue };
            if m < 0 {
                z = z.mul(
                    &Polynomial::from_coeffs(vec![-a.clone(), BigRational::one()]).pow((-m) as u64),
                );
            } else {
                factors.push((a.clone(), m as u64));
            }
        }
        for j in 0..=deg as usize {
            let num = z.mul(&Polynomial::monomial(j, BigRational::one()));
            out.push(fraction_to_rational_fn(ctx, &num, &factors)?);
        }
    }
    out.sort_by_key(|f| pole_key(f, &finite_support));
    Ok(out)
}

/// Basis of differentials omega with div(omega) >= -D, holomorphic outside
/// supp D. Dimension max(deg D - 1, 0) at genus zero.
pub fn l1_basis(ctx: PContext, d: &Divisor) -> Result<Vec<RationalDiff>> {
    let mut e = d.clone();
    e.add_to(Center::Inf, -2);
    Ok(space_basis(ctx, &e)?
        .into_iter()
        .map(RationalDiff::new)
        .collect())
}

/// Basis of rational functions g with div(g) >= -D. Dimension deg D + 1.
pub fn ld_basis(ctx: PContext, d: &Divisor) -> Result<Vec<RationalFn>> {
    space_basis(ctx, d)
}

/// Per-point jet prescription: every local coefficient at exponents <= top
/// is fixed (implicitly zero off the listed support).
#[derive(Debug, Clone)]
pub struct JetPoint {
    pub center: Center,
    pub top: i64,
    pub data: BTreeMap<i64, PScalar>,
}

impl JetPoint {
    pub fn new(center: Center, top: i64, data: impl IntoIterator<Item = (i64, PScalar)>) -> Self {
        JetPoint {
            center,
            top,
            data: data.into_iter().collect(),
        }
    }

    /// Lowest exponent at which a coefficient may be nonzero: everything
    /// below is prescribed zero.
    fn floor(&self) -> i64 {
        self.data
            .keys()
            .next()
            .copied()
            .unwrap_or(self.top + 1)
            .min(self.top + 1)
    }
}

#[derive(Debug, Clone)]
pub struct JetData {
    ctx: PContext,
    points: Vec<JetPoint>,
}

impl JetData {
    pub fn new(ctx: PContext, points: Vec<JetPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            for (e, c) in &p.data {
                if *e > p.top {
                    return Err(Error::Invalid(format!(
                        "coefficient at exponent {e} lies above the top index {}",
                        p.top
                    )));
                }
                if c.context().prime() != ctx.prime() {
                    return Err(Error::Invalid("mixed scalar contexts in jet data".into()));
                }
            }
            if points[..i].iter().any(|q| q.center == p.center) {
                return Err(Error::Invalid(format!(
                    "duplicate jet point at {}",
                    p.center
                )));
            }
        }
        Ok(JetData { ctx, points })
    }

    pub fn context(&self) -> PContext {
        self.ctx
    }

    pub fn points(&self) -> &[JetPoint] {
        &self.points
    }

    /// The divisor sum (top_i + 1)[a_i] indexing the dual space.
    pub fn divisor(&self) -> Divisor {
        Divisor::from_pairs(self.points.iter().map(|p| (p.center.clone(), p.top + 1)))
    }
}

fn chunk_pairing(data: &BTreeMap<i64, PScalar>, dual: &LaurentChunk, ctx: PContext) -> PScalar {
    let mut acc = ctx.zero();
    for (s, c) in data {
        acc = acc + c.clone() * dual.coefficient(-1 - s);
    }
    acc
}

fn dual_window(p: &JetPoint) -> Option<Window> {
    let lo = *p.data.keys().next()?;
    let hi = *p.data.keys().next_back()?;
    Some(Window::new(-1 - hi, -1 - lo))
}

/// Sum over points of Res(data_i sigma): function-mode data against a dual
/// differential.
pub fn function_pairing(data: &JetData, sigma: &RationalDiff) -> PScalar {
    let ctx = data.ctx;
    let mut acc = ctx.zero();
    for p in &data.points {
        let Some(w) = dual_window(p) else { continue };
        let exp = sigma.local_expansion(&p.center, w);
        acc = acc + chunk_pairing(&p.data, &exp, ctx);
    }
    acc
}

/// Sum over points of Res(g omega_i): differential-mode data against a
/// dual function.
pub fn differential_pairing(data: &JetData, g: &RationalFn) -> PScalar {
    let ctx = data.ctx;
    let mut acc = ctx.zero();
    for p in &data.points {
        let Some(w) = dual_window(p) else { continue };
        let exp = g.local_expansion(&p.center, w);
        acc = acc + chunk_pairing(&p.data, &exp, ctx);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    Principal,
    Generalized,
}

#[derive(Debug, Clone)]
pub enum JetOutcome<S, C> {
    Solution(S),
    Unsolvable { certificate: C, pairing: PScalar },
}

impl<S, C> JetOutcome<S, C> {
    pub fn solution(&self) -> Option<&S> {
        match self {
            JetOutcome::Solution(s) => Some(s),
            JetOutcome::Unsolvable { .. } => None,
        }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, JetOutcome::Solution(_))
    }
}

/// Degrees of freedom of the interpolation system.
#[derive(Debug, Clone)]
enum Unknown {
    Const,
    Pole { center: BigRational, k: u64 },
    Entire { m: u64 },
}

impl Unknown {
    fn object(&self, ctx: PContext) -> RationalFn {
        match self {
            Unknown::Const => RationalFn::constant(ctx, BigRational::one()),
            Unknown::Pole { center, k } => {
                RationalFn::pole_monomial(ctx, center.clone(), *k, ctx.one())
            }
            Unknown::Entire { m } => {
                RationalFn::from_entire(ctx, Polynomial::monomial(*m as usize, BigRational::one()))
            }
        }
    }
}

/// Builds the unknown catalog and the exact row system, solves it, and
/// assembles the combination. Shared by both modes; `is_diff` switches the
/// expansion Jacobian and the holomorphy-at-INF bookkeeping.
fn solve_jet_system(data: &JetData, is_diff: bool) -> Result<Option<RationalFn>> {
    let ctx = data.ctx;
    let inf_point = data.points.iter().find(|p| p.center.is_inf());
    let mut unknowns = Vec::new();
    if !is_diff || inf_point.is_some() {
        unknowns.push(Unknown::Const);
    }
    for p in &data.points {
        if let Some(a) = p.center.as_finite() {
            let depth = (-p.floor()).max(0);
            for k in 1..=depth as u64 {
                unknowns.push(Unknown::Pole {
                    center: a.clone(),
                    k,
                });
            }
        }
    }
    if let Some(p) = inf_point {
        let depth = if is_diff { -p.floor() - 2 } else { -p.floor() };
        for m in 1..=depth.max(0) as u64 {
            unknowns.push(Unknown::Entire { m });
        }
    }

    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for p in &data.points {
        let jac_floor = if is_diff && p.center.is_inf() { -2 } else { 0 };
        let lo = p.floor().min(jac_floor);
        if lo > p.top {
            continue;
        }
        let w = Window::new(lo, p.top);
        let columns: Vec<LaurentChunk> = unknowns
            .iter()
            .map(|u| {
                let f = u.object(ctx);
                if is_diff {
                    RationalDiff::new(f).local_expansion(&p.center, w)
                } else {
                    f.local_expansion(&p.center, w)
                }
            })
            .collect();
        for e in lo..=p.top {
            rows.push(
                columns
                    .iter()
                    .map(|c| c.coefficient(e).into_value())
                    .collect(),
            );
            rhs.push(
                p.data
                    .get(&e)
                    .map_or_else(BigRational::zero, |c| c.value().clone()),
            );
        }
    }
    if is_diff && inf_point.is_none() {
        // Holomorphy at the unprescribed INF: the simple-pole coefficients
        // must cancel there.
        rows.push(
            unknowns
                .iter()
                .map(|u| match u {
                    Unknown::Pole { k: 1, .. } => BigRational::one(),
                    _ => BigRational::zero(),
                })
                .collect(),
        );
        rhs.push(BigRational::zero());
    }

    let x = match solve_exact(&rows, &rhs) {
        LinearOutcome::Solution(x) => x,
        LinearOutcome::Inconsistent { .. } => return Ok(None),
    };
    let mut f = RationalFn::zero(ctx);
    for (u, c) in unknowns.iter().zip(&x) {
        if !c.is_zero() {
            f = f.add(&u.object(ctx).scale(&ctx.scalar_from_ratio(c.clone())));
        }
    }
    Ok(Some(f))
}

/// Every prescribed coefficient of the candidate must reproduce exactly.
fn verify_jets(data: &JetData, f: &RationalFn, is_diff: bool) -> bool {
    for p in &data.points {
        let jac_floor = if is_diff && p.center.is_inf() { -2 } else { 0 };
        let lo = p.floor().min(jac_floor);
        if lo > p.top {
            continue;
        }
        let w = Window::new(lo, p.top);
        let exp = if is_diff {
            RationalDiff::new(f.clone()).local_expansion(&p.center, w)
        } else {
            f.local_expansion(&p.center, w)
        };
        for e in lo..=p.top {
            let want = p.data.get(&e).cloned().unwrap_or_else(|| data.ctx.zero());
            if exp.coefficient(e) != want {
                return false;
            }
        }
    }
    true
}

/// Jet interpolation for functions. The criterion pairs the data against
/// l1_basis of the jet divisor; a nonzero pairing is the unsolvability
/// certificate, and a passing criterion always constructs.
pub fn classical_jet_solve_functions(
    data: &JetData,
) -> Result<JetOutcome<RationalFn, RationalDiff>> {
    let ctx = data.ctx;
    for sigma in l1_basis(ctx, &data.divisor())? {
        let pairing = function_pairing(data, &sigma);
        if !pairing.is_zero() {
            return Ok(JetOutcome::Unsolvable {
                certificate: sigma,
                pairing,
            });
        }
    }
    let f = solve_jet_system(data, false)?.ok_or_else(|| {
        Error::Invalid("criterion passed but the jet system is inconsistent".into())
    })?;
    if !verify_jets(data, &f, false) {
        return Err(Error::Invalid("jet solution failed re-verification".into()));
    }
    Ok(JetOutcome::Solution(f))
}

/// Jet interpolation for differentials. PRINCIPAL accepts only pole-part
/// data (all tops <= -1); its dual space L(divisor) is then the constant 1
/// when every top is -1 (the sum-of-residues criterion) and empty as soon
/// as some point leaves its residue slot free. GENERALIZED pairs against
/// ld_basis of the jet divisor with tops of either sign.
pub fn classical_jet_solve_differentials(
    data: &JetData,
    mode: DiffMode,
) -> Result<JetOutcome<RationalDiff, RationalFn>> {
    let ctx = data.ctx;
    if mode == DiffMode::Principal {
        if let Some(p) = data.points.iter().find(|p| p.top >= 0) {
            return Err(Error::ModeViolation(format!(
                "principal mode requires tops <= -1, found {} at {}",
                p.top, p.center
            )));
        }
    }
    let duals = ld_basis(ctx, &data.divisor())?;
    for g in duals {
        let pairing = differential_pairing(data, &g);
        if !pairing.is_zero() {
            return Ok(JetOutcome::Unsolvable {
                certificate: g,
                pairing,
            });
        }
    }
    let f = solve_jet_system(data, true)?.ok_or_else(|| {
        Error::Invalid("criterion passed but the jet system is inconsistent".into())
    })?;
    if !verify_jets(data, &f, true) {
        return Err(Error::Invalid("jet solution failed re-verification".into()));
    }
    Ok(JetOutcome::Solution(RationalDiff::new(f)))
}

/// Splits a series into its nonnegative-exponent part and its principal
/// part; the tail certificate (exponents below the window) stays with the
/// principal part.
pub fn ml_decomposition(f: &LaurentChunk) -> Result<(LaurentChunk, LaurentChunk)> {
    let ctx = f.context();
    let plus = LaurentChunk::from_coeffs(
        ctx,
        f.coeffs()
            .iter()
            .filter(|(e, _)| **e >= 0)
            .map(|(e, c)| (*e, c.clone())),
    );
    let mut minus = LaurentChunk::from_coeffs(
        ctx,
        f.coeffs()
            .iter()
            .filter(|(e, _)| **e < 0)
            .map(|(e, c)| (*e, c.clone())),
    );
    if let Some(t) = f.tail() {
        minus = minus.with_tail(t.clone())?;
    }
    Ok((plus, minus))
}

fn norm_of(ctx: PContext, x: &BigRational) -> NormExp {
    ctx.scalar_from_ratio(x.clone()).norm_exp()
}

/// Truncated re-centering of one pole part around another point of the
/// same disc: (t-b)^{-k} = sum_m C(k+m-1, m) (b-c)^m (t-c)^{-k-m}.
fn recenter_part(
    ctx: PContext,
    part: &LaurentChunk,
    delta: &BigRational,
    depth: u64,
) -> Vec<(i64, PScalar)> {
    let mut acc: BTreeMap<i64, PScalar> = BTreeMap::new();
    for (e, c) in part.coeffs() {
        let k = (-e) as u64;
        for m in 0..=depth {
            let coef = binom(k + m - 1, m) * rational_pow(delta, m as i64);
            let term = c.clone() * ctx.scalar_from_ratio(coef);
            let slot = e - m as i64;
            let v = acc.remove(&slot).unwrap_or_else(|| ctx.zero()) + term;
            if !v.is_zero() {
                acc.insert(slot, v);
            }
        }
    }
    acc.into_iter().collect()
}

/// Truncated polynomial expansion of a pole part whose center lies in the
/// disc at infinity: (t-b)^{-k} = (-b)^{-k} sum_m C(k+m-1, m) (t/b)^m.
fn part_to_polynomial(
    _ctx: PContext,
    part: &LaurentChunk,
    b: &BigRational,
    depth: u64,
) -> Polynomial {
    let mut coeffs = vec![BigRational::zero(); depth as usize + 1];
    for (e, c) in part.coeffs() {
        let k = (-e) as u64;
        let lead = rational_pow(&-b.clone(), *e);
        for (m, slot) in coeffs.iter_mut().enumerate() {
            let coef = binom(k + m as u64 - 1, m as u64) * &lead * rational_pow(b, -(m as i64));
            *slot += c.value() * coef;
        }
    }
    Polynomial::from_coeffs(coeffs)
}

/// Best approximation of `target` from span{1, (t-c)^{-j}, j <= depth} by
/// matching Taylor jets at 0 through order `depth` (the jet map on that
/// span is injective, so the system is uniquely solvable).
fn match_jets_at_pole(
    ctx: PContext,
    target: &RationalFn,
    c: &BigRational,
    depth: u64,
) -> Result<RationalFn> {
    let w = Window::new(0, depth as i64);
    let n = depth as usize + 1;
    let mut cols: Vec<LaurentChunk> = Vec::with_capacity(n);
    cols.push(
        RationalFn::constant(ctx, BigRational::one()).local_expansion(&Center::finite_i64(0), w),
    );
    for j in 1..=depth {
        cols.push(
            RationalFn::pole_monomial(ctx, c.clone(), j, ctx.one())
                .local_expansion(&Center::finite_i64(0), w),
        );
    }
    let t = target.local_expansion(&Center::finite_i64(0), w);
    let rows: Vec<Vec<BigRational>> = (0..=depth as i64)
        .map(|e| {
            cols.iter()
                .map(|col| col.coefficient(e).into_value())
                .collect()
        })
        .collect();
    let rhs: Vec<BigRational> = (0..=depth as i64)
        .map(|e| t.coefficient(e).into_value())
        .collect();
    let x = match solve_exact(&rows, &rhs) {
        LinearOutcome::Solution(x) => x,
        LinearOutcome::Inconsistent { .. } => {
            return Err(Error::Invalid("jet matching system is singular".into()))
        }
    };
    let mut g = RationalFn::constant(ctx, x[0].clone());
    let mut part = Vec::new();
    for (j, coef) in x.iter().enumerate().skip(1) {
        if !coef.is_zero() {
            part.push((-(j as i64), ctx.scalar_from_ratio(coef.clone())));
        }
    }
    if !part.is_empty() {
        g = g.with_part(c.clone(), LaurentChunk::from_coeffs(ctx, part))?;
    }
    Ok(g)
}

/// Replaces f by a function with poles only at the allowed points (one per
/// removed disc) whose distance to f on the slice is at most eps_exp in
/// the spectral norm. Returns the approximant and its exact error.
pub fn runge_approximate(
    f: &RationalFn,
    x: &AffinoidSlice,
    allowed: &[Center],
    eps_exp: &BigRational,
) -> Result<(RationalFn, NormExp)> {
    let domain = x.domain();
    let ctx = domain.context();
    let discs = domain.discs();
    if allowed.len() != discs.len() {
        return Err(Error::Invalid(format!(
            "expected one allowed pole per removed disc ({}), got {}",
            discs.len(),
            allowed.len()
        )));
    }
    for (disc, pt) in discs.iter().zip(allowed) {
        let ok = match (&disc.center, pt) {
            (Center::Finite(a), Center::Finite(c)) => {
                norm_of(ctx, &(c - a)) <= NormExp::Exp(disc.radius_q.clone())
            }
            (Center::Inf, Center::Inf) => true,
            (Center::Inf, Center::Finite(c)) => {
                norm_of(ctx, c) >= NormExp::Exp(-disc.radius_q.clone())
            }
            (Center::Finite(_), Center::Inf) => false,
        };
        if !ok {
            return Err(Error::Invalid(format!(
                "allowed point {pt} lies outside its removed disc at {}",
                disc.center
            )));
        }
    }

    // Route every pole of f to the trimmed disc containing it.
    let mut routed: Vec<Vec<(&BigRational, &LaurentChunk)>> = vec![Vec::new(); discs.len()];
    for (b, part) in f.parts() {
        let home = discs
            .iter()
            .zip(x.trims())
            .position(|(disc, trim)| match &disc.center {
                Center::Finite(a) => norm_of(ctx, &(b - a)) < NormExp::Exp(trim.clone()),
                Center::Inf => norm_of(ctx, b) > NormExp::Exp(-trim.clone()),
            });
        match home {
            Some(i) => routed[i].push((b, part)),
            None => {
                return Err(Error::PoleInsideAffinoid(format!(
                    "pole at {b} lies on the affinoid slice"
                )))
            }
        }
    }
    let inf_index = discs.iter().position(|d| d.center.is_inf());
    let entire_tail = {
        let mut coeffs = f.entire().coeffs().to_vec();
        if !coeffs.is_empty() {
            coeffs[0] = BigRational::zero();
        }
        Polynomial::from_coeffs(coeffs)
    };
    if !entire_tail.is_zero() && inf_index.is_none() {
        return Err(Error::PoleInsideAffinoid(
            "entire part has its pole at inf, which lies on the slice".into(),
        ));
    }
    let constant = RationalFn::constant(ctx, f.entire().coeff(0));

    let spectral = |diff: &RationalFn| -> NormExp {
        let mut worst = NormExp::Bottom;
        for (disc, trim) in discs.iter().zip(x.trims()) {
            worst = worst.max(diff.gauss_norm_exp_at(&disc.center, trim));
        }
        worst
    };

    let mut depth: u64 = 2;
    for _ in 0..24 {
        let mut g = constant.clone();
        for (i, disc) in discs.iter().enumerate() {
            match (&disc.center, &allowed[i]) {
                (Center::Finite(_), Center::Finite(c)) => {
                    let mut acc: BTreeMap<i64, PScalar> = BTreeMap::new();
                    for (b, part) in &routed[i] {
                        for (e, v) in recenter_part(ctx, part, &(*b - c), depth) {
                            let s = acc.remove(&e).unwrap_or_else(|| ctx.zero()) + v;
                            if !s.is_zero() {
                                acc.insert(e, s);
                            }
                        }
                    }
                    if !acc.is_empty() {
                        g = g.with_part(c.clone(), LaurentChunk::from_coeffs(ctx, acc))?;
                    }
                }
                (Center::Inf, Center::Inf) => {
                    let mut entire = entire_tail.clone();
                    for (b, part) in &routed[i] {
                        entire = entire.add(&part_to_polynomial(ctx, part, b, depth));
                    }
                    g = g.add(&RationalFn::from_entire(ctx, entire));
                }
                (Center::Inf, Center::Finite(c)) => {
                    let mut target = RationalFn::from_entire(ctx, entire_tail.clone());
                    for (b, part) in &routed[i] {
                        target = target.with_part((*b).clone(), (*part).clone())?;
                    }
                    if !target.is_zero() {
                        g = g.add(&match_jets_at_pole(ctx, &target, c, depth)?);
                    }
                }
                (Center::Finite(_), Center::Inf) => unreachable!("rejected at validation"),
            }
        }
        let err = spectral(&f.sub(&g));
        if err <= NormExp::Exp(eps_exp.clone()) {
            return Ok((g, err));
        }
        depth *= 2;
    }
    Err(Error::Invalid(
        "runge approximation did not reach the requested accuracy".into(),
    ))
}
