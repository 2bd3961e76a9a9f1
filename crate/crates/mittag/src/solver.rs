//! The wide-open Mittag-Leffler engine: boundary data on the ends of a
//! wide-open domain, criterion-first solvability with certified tail
//! bounds, correction systems with Cramer bounds, the descending
//! truncation sequence with its Cauchy trace, and an independent
//! coefficient-matching oracle.
//!
//! Everything is exact: a verdict of UNSOLVABLE always carries a dual
//! certificate whose pairing provably exceeds the certified tail bound,
//! and SOLVABLE always carries a solution that was re-expanded against
//! every explicit coefficient. When tail certificates are too weak to
//! decide either way the verdict is INCONCLUSIVE, never a guess.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::classical::{
    classical_jet_solve_differentials, classical_jet_solve_functions, l1_basis, ld_basis, DiffMode,
    Divisor, JetData, JetOutcome, JetPoint,
};
use crate::error::{Error, Result};
use crate::geometry::{Center, OrientedAnnulus, WideOpenDomain};
use crate::laurent::{LaurentChunk, Window};
use crate::linalg::{det_exact, solve_exact, strike, with_column, LinearOutcome};
use crate::rational::{RationalDiff, RationalFn};
use crate::scalar::{NormExp, PContext, PScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Functions,
    Differentials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Jet,
    Exact,
}

/// Prescribed data on one end: a series on the boundary annulus whose
/// exponents do not exceed `top`, optionally carrying a tail certificate.
/// Free ends carry no data and are filled in by completion.
#[derive(Debug, Clone)]
pub struct BoundaryDatum {
    pub annulus: OrientedAnnulus,
    pub top: i64,
    pub data: LaurentChunk,
    pub free: bool,
}

#[derive(Debug, Clone)]
pub struct MLProblem {
    domain: WideOpenDomain,
    pub mode: Mode,
    pub diff_mode: DiffMode,
    pub semantics: Semantics,
    ends: Vec<BoundaryDatum>,
}

impl MLProblem {
    pub fn new(
        domain: WideOpenDomain,
        mode: Mode,
        diff_mode: DiffMode,
        semantics: Semantics,
        ends: Vec<BoundaryDatum>,
    ) -> Result<Self> {
        if ends.len() != domain.discs().len() {
            return Err(Error::Invalid(format!(
                "expected one boundary datum per end ({}), got {}",
                domain.discs().len(),
                ends.len()
            )));
        }
        for (i, end) in ends.iter().enumerate() {
            if end.annulus.end.index != i {
                return Err(Error::Invalid(format!(
                    "datum {i} is attached to end {}",
                    end.annulus.end.index
                )));
            }
            if end.free && !end.data.is_zero() {
                return Err(Error::Invalid(format!("free end {i} carries data")));
            }
            if let Some(hi) = end.data.max_exp() {
                if hi > end.top {
                    return Err(Error::Invalid(format!(
                        "end {i} has data above its top index {}",
                        end.top
                    )));
                }
            }
        }
        Ok(MLProblem {
            domain,
            mode,
            diff_mode,
            semantics,
            ends,
        })
    }

    pub fn domain(&self) -> &WideOpenDomain {
        &self.domain
    }

    pub fn ends(&self) -> &[BoundaryDatum] {
        &self.ends
    }

    pub fn context(&self) -> PContext {
        self.domain.context()
    }

    /// The jet divisor sum of (top_i + 1)[a_i] indexing the dual space.
    pub fn divisor(&self) -> Divisor {
        Divisor::from_pairs(
            self.ends
                .iter()
                .map(|e| (e.annulus.end.center.clone(), e.top + 1)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Solvable,
    Unsolvable,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub enum Solution {
    Function(RationalFn),
    Differential(RationalDiff),
}

impl Solution {
    pub fn is_zero(&self) -> bool {
        match self {
            Solution::Function(f) => f.is_zero(),
            Solution::Differential(w) => w.is_zero(),
        }
    }

    pub fn sub(&self, other: &Solution) -> Solution {
        match (self, other) {
            (Solution::Function(a), Solution::Function(b)) => Solution::Function(a.sub(b)),
            (Solution::Differential(a), Solution::Differential(b)) => {
                Solution::Differential(a.sub(b))
            }
            _ => unreachable!("mixed solution modes"),
        }
    }

    pub fn gauss_at(&self, center: &Center, q: &BigRational) -> NormExp {
        match self {
            Solution::Function(f) => f.gauss_norm_exp_at(center, q),
            Solution::Differential(w) => w.gauss_norm_exp_at(center, q),
        }
    }

    pub fn local_expansion(&self, center: &Center, w: Window) -> LaurentChunk {
        match self {
            Solution::Function(f) => f.local_expansion(center, w),
            Solution::Differential(d) => d.local_expansion(center, w),
        }
    }
}

/// Dual element whose pairing certifies unsolvability: a differential for
/// function problems, a function for differential problems.
#[derive(Debug, Clone)]
pub enum DualElement {
    Differential(RationalDiff),
    Function(RationalFn),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub verdict: Verdict,
    pub certificate: Option<(DualElement, PScalar)>,
    pub solution: Option<Solution>,
    /// Per-end local expansions of the solution over the data windows.
    pub jets: Vec<LaurentChunk>,
    pub error_exp: NormExp,
    pub cauchy_trace: Vec<(i64, NormExp)>,
    pub oracle_verdict: Option<Verdict>,
    /// Inconsistent data row (end index, exponent) found by the oracle.
    pub oracle_witness: Option<(usize, i64)>,
    pub inconclusive_reason: Option<String>,
}

impl SolveReport {
    fn bare(verdict: Verdict) -> Self {
        SolveReport {
            verdict,
            certificate: None,
            solution: None,
            jets: Vec::new(),
            error_exp: NormExp::Bottom,
            cauchy_trace: Vec::new(),
            oracle_verdict: None,
            oracle_witness: None,
            inconclusive_reason: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DualBasis {
    Functions(Vec<RationalDiff>),
    Differentials(Vec<RationalFn>),
}

impl DualBasis {
    pub fn len(&self) -> usize {
        match self {
            DualBasis::Functions(v) => v.len(),
            DualBasis::Differentials(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn element(&self, j: usize) -> DualElement {
        match self {
            DualBasis::Functions(v) => DualElement::Differential(v[j].clone()),
            DualBasis::Differentials(v) => DualElement::Function(v[j].clone()),
        }
    }
}

/// The dual space paired against the data: l1 of the jet divisor for
/// functions, constants for principal differentials, ld of the jet divisor
/// for generalized differentials.
pub fn dual_basis(problem: &MLProblem) -> Result<DualBasis> {
    let ctx = problem.context();
    match problem.mode {
        Mode::Functions => Ok(DualBasis::Functions(l1_basis(ctx, &problem.divisor())?)),
        Mode::Differentials => match problem.diff_mode {
            DiffMode::Principal => {
                if let Some(e) = problem.ends.iter().find(|e| !e.free && e.top >= 0) {
                    return Err(Error::ModeViolation(format!(
                        "principal mode requires tops <= -1, found {} at end {}",
                        e.top, e.annulus.end.index
                    )));
                }
                // The jet divisor has no positive part here, so this is the
                // constant 1 when every top is -1 (the residue-sum pairing)
                // and empty as soon as some end leaves its residue free.
                Ok(DualBasis::Differentials(ld_basis(ctx, &problem.divisor())?))
            }
            DiffMode::Generalized => {
                Ok(DualBasis::Differentials(ld_basis(ctx, &problem.divisor())?))
            }
        },
    }
}

/// Expansion of a dual element on a boundary annulus, with the requested
/// floor widened so every explicit coefficient of the element stays
/// representable (tails must anchor at nonpositive exponents).
fn dual_expansion(
    basis: &DualBasis,
    j: usize,
    annulus: &OrientedAnnulus,
    window: Window,
) -> Result<LaurentChunk> {
    let center = &annulus.end.center;
    let lo = match (basis, center) {
        (_, Center::Finite(_)) => window.lo.min(0),
        (DualBasis::Functions(v), Center::Inf) => {
            let d = v[j].func.entire().degree().map_or(0, |d| d as i64);
            window.lo.min(-2 - d)
        }
        (DualBasis::Differentials(v), Center::Inf) => {
            let d = v[j].entire().degree().map_or(0, |d| d as i64);
            window.lo.min(-d).min(0)
        }
    };
    let w = Window::new(lo, window.hi.max(lo));
    match basis {
        DualBasis::Functions(v) => v[j].annulus_expansion(center, &annulus.q1, &annulus.q2, w),
        DualBasis::Differentials(v) => v[j].annulus_expansion(center, &annulus.q1, &annulus.q2, w),
    }
}

/// Gauss norm of a dual element's coefficient series at radius q on an
/// end's local coordinate.
fn dual_gauss(basis: &DualBasis, j: usize, center: &Center, q: &BigRational) -> NormExp {
    match basis {
        DualBasis::Functions(v) => v[j].gauss_norm_exp_at(center, q),
        DualBasis::Differentials(v) => v[j].gauss_norm_exp_at(center, q),
    }
}

fn half(a: &BigRational, b: &BigRational) -> BigRational {
    (a + b) / BigRational::from_integer(2.into())
}

/// The annulus radius at which tail contributions are bounded: the
/// midpoint between the tail anchor (or inner radius) and the outer
/// radius. None when the certificate leaves no radius to evaluate at.
fn tail_eval_radius(end: &BoundaryDatum) -> Option<BigRational> {
    let t = end.data.tail()?;
    let lo = t.q0.clone().max(end.annulus.q1.clone());
    if lo >= end.annulus.q2 {
        return None;
    }
    Some(half(&lo, &end.annulus.q2))
}

/// Exact pairing of one end's explicit coefficients against a dual
/// expansion: the residue of the product series.
fn explicit_pairing(ctx: PContext, data: &LaurentChunk, dual: &LaurentChunk) -> PScalar {
    let mut acc = ctx.zero();
    for (s, c) in data.coeffs() {
        acc = acc + c.clone() * dual.coefficient(-1 - s);
    }
    acc
}

fn data_window(data: &LaurentChunk) -> Option<Window> {
    let lo = data.min_exp()?;
    let hi = data.max_exp()?;
    Some(Window::new(-1 - hi, -1 - lo))
}

/// One pairing residual: the exact part over explicit coefficients and a
/// certified bound on whatever the tail certificates may add. `None`
/// means some tail could not be bounded at any admissible radius.
#[derive(Debug, Clone)]
pub struct PairingResidual {
    pub exact: PScalar,
    pub tail_bound: Option<NormExp>,
}

impl PairingResidual {
    /// The pairing provably differs from zero.
    pub fn certified_nonzero(&self) -> bool {
        match &self.tail_bound {
            Some(b) => self.exact.norm_exp() > *b,
            None => false,
        }
    }
}

/// Pairs the problem data against every basis element. The tail of end i
/// contributes at most tail_line(q) + |dual|_gauss(q) + q at any radius q
/// between the anchor and the outer radius, per term and hence (by the
/// ultrametric inequality) in total.
pub fn pairing_residuals(problem: &MLProblem, basis: &DualBasis) -> Result<Vec<PairingResidual>> {
    let ctx = problem.context();
    let mut out = Vec::with_capacity(basis.len());
    for j in 0..basis.len() {
        let mut exact = ctx.zero();
        let mut bound = Some(NormExp::Bottom);
        for end in &problem.ends {
            if let Some(w) = data_window(&end.data) {
                let dual = dual_expansion(basis, j, &end.annulus, w)?;
                exact = exact + explicit_pairing(ctx, &end.data, &dual);
            }
            if let Some(t) = end.data.tail() {
                match tail_eval_radius(end) {
                    Some(q) => {
                        if let Some(b) = bound {
                            let g = dual_gauss(basis, j, &end.annulus.end.center, &q);
                            let term = t.line_at(&q)?.plus(&g).shift(&q);
                            bound = Some(b.max(term));
                        }
                    }
                    None => bound = None,
                }
            }
        }
        out.push(PairingResidual {
            exact,
            tail_bound: bound,
        });
    }
    Ok(out)
}

/// The dropped-term obstruction at truncation depth l: the exact pairing
/// of the explicit coefficients below l, with the tail certificates folded
/// into the reported bound.
#[derive(Debug, Clone)]
pub struct ObstructionState {
    pub l: i64,
    pub beta: Vec<PScalar>,
    pub bound_exp: Option<NormExp>,
}

pub fn compute_obstructions(
    problem: &MLProblem,
    basis: &DualBasis,
    l: i64,
) -> Result<ObstructionState> {
    let ctx = problem.context();
    let mut beta = Vec::with_capacity(basis.len());
    let mut bound = Some(NormExp::Bottom);
    for j in 0..basis.len() {
        let mut acc = ctx.zero();
        for end in &problem.ends {
            let dropped = LaurentChunk::from_coeffs(
                ctx,
                end.data
                    .coeffs()
                    .iter()
                    .filter(|(s, _)| **s < l)
                    .map(|(s, c)| (*s, c.clone())),
            );
            if let Some(w) = data_window(&dropped) {
                let dual = dual_expansion(basis, j, &end.annulus, w)?;
                acc = acc + explicit_pairing(ctx, &dropped, &dual);
            }
            if let Some(t) = end.data.tail() {
                match tail_eval_radius(end) {
                    Some(q) => {
                        if let Some(b) = bound {
                            let g = dual_gauss(basis, j, &end.annulus.end.center, &q);
                            let term = t.line_at(&q)?.plus(&g).shift(&q);
                            bound = Some(b.max(term));
                        }
                    }
                    None => bound = None,
                }
            }
        }
        bound = bound.map(|b| b.max(acc.norm_exp()));
        beta.push(acc);
    }
    Ok(ObstructionState {
        l,
        beta,
        bound_exp: bound,
    })
}

/// Exponent floor of an end's explicit window: corrections may only be
/// placed strictly below it.
fn end_floor(end: &BoundaryDatum) -> i64 {
    end.data.min_exp().unwrap_or(end.top + 1).min(end.top + 1)
}

#[derive(Debug, Clone)]
pub struct CorrectionSystem {
    /// (end index, exponent l_s) with l_1 < ... < l_m.
    pub columns: Vec<(usize, i64)>,
    /// matrix[j][s] = alpha^(i_s)_{j, -l_s - 1}.
    pub matrix: Vec<Vec<BigRational>>,
    pub det_exp: NormExp,
    pub minor_exp: NormExp,
}

fn column_vector(basis: &DualBasis, annulus: &OrientedAnnulus, l: i64) -> Result<Vec<BigRational>> {
    let w = Window::new(-l - 1, -l - 1);
    let mut v = Vec::with_capacity(basis.len());
    for j in 0..basis.len() {
        let dual = dual_expansion(basis, j, annulus, w)?;
        v.push(dual.coefficient(-l - 1).into_value());
    }
    Ok(v)
}

/// Residual of v after eliminating along the pivots of the already-chosen
/// columns; a nonzero residual means v extends the span.
fn eliminate(chosen: &[(Vec<BigRational>, usize)], v: &[BigRational]) -> Vec<BigRational> {
    let mut r = v.to_vec();
    for (col, pivot) in chosen {
        if r[*pivot].is_zero() {
            continue;
        }
        let factor = &r[*pivot] / &col[*pivot];
        for (ri, ci) in r.iter_mut().zip(col) {
            let delta = &factor * ci;
            *ri -= delta;
        }
    }
    r
}

/// Scans candidate columns from the shallowest admissible exponent
/// downward, one exponent level per chosen column, keeping the candidate
/// with the largest eliminated-pivot norm at each level. The budget caps
/// how many candidates are examined in total.
pub fn build_correction_system(problem: &MLProblem, basis: &DualBasis) -> Result<CorrectionSystem> {
    let ctx = problem.context();
    let m = basis.len();
    if m == 0 {
        return Ok(CorrectionSystem {
            columns: Vec::new(),
            matrix: Vec::new(),
            det_exp: NormExp::exp_i64(0),
            minor_exp: NormExp::exp_i64(0),
        });
    }
    let budget = 8 * m;
    let mut examined = 0usize;
    let floors: Vec<i64> = problem.ends.iter().map(end_floor).collect();
    let mut l = floors.iter().max().copied().unwrap_or(0) - 1;
    let mut chosen: Vec<(Vec<BigRational>, usize)> = Vec::new();
    let mut columns = Vec::new();
    let mut raw_cols: Vec<Vec<BigRational>> = Vec::new();
    while chosen.len() < m {
        let mut best: Option<(NormExp, usize, Vec<BigRational>, Vec<BigRational>)> = None;
        for (i, end) in problem.ends.iter().enumerate() {
            if end.free || l >= floors[i] {
                continue;
            }
            if examined >= budget {
                return Err(Error::NoInvertibleMinor { budget });
            }
            examined += 1;
            let v = column_vector(basis, &end.annulus, l)?;
            let r = eliminate(&chosen, &v);
            let score = r
                .iter()
                .map(|x| ctx.scalar_from_ratio(x.clone()).norm_exp())
                .fold(NormExp::Bottom, |a, b| a.max(b));
            if score.is_bottom() {
                continue;
            }
            if best.as_ref().is_none_or(|(s, _, _, _)| score > *s) {
                best = Some((score, i, v, r));
            }
        }
        if let Some((_, i, v, r)) = best {
            let pivot = r
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .max_by_key(|(_, x)| ctx.scalar_from_ratio((*x).clone()).norm_exp())
                .map(|(j, _)| j)
                .expect("nonzero residual");
            chosen.push((r, pivot));
            columns.push((i, l));
            raw_cols.push(v);
        }
        l -= 1;
        if examined >= budget && chosen.len() < m {
            return Err(Error::NoInvertibleMinor { budget });
        }
    }
    // Columns were gathered at descending exponents; the system is stated
    // with l_1 < ... < l_m.
    columns.reverse();
    raw_cols.reverse();
    let matrix: Vec<Vec<BigRational>> = (0..m)
        .map(|j| raw_cols.iter().map(|c| c[j].clone()).collect())
        .collect();
    let det = det_exact(&matrix);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let det_exp = ctx.scalar_from_ratio(det).norm_exp();
    let mut minor_exp = if m == 1 {
        NormExp::exp_i64(0)
    } else {
        NormExp::Bottom
    };
    if m > 1 {
        for r in 0..m {
            for c in 0..m {
                let d = det_exact(&strike(&matrix, r, c));
                minor_exp = minor_exp.max(ctx.scalar_from_ratio(d).norm_exp());
            }
        }
    }
    Ok(CorrectionSystem {
        columns,
        matrix,
        det_exp,
        minor_exp,
    })
}

/// Cramer solve of M x = beta with the certified bound
/// |x_s| <= B + minor_exp - det_exp, B = max |beta_j|.
pub fn solve_corrections(
    system: &CorrectionSystem,
    beta: &[PScalar],
) -> Result<(Vec<PScalar>, NormExp)> {
    let m = system.columns.len();
    assert_eq!(beta.len(), m, "obstruction length mismatch");
    if m == 0 {
        return Ok((Vec::new(), NormExp::Bottom));
    }
    let ctx = beta[0].context();
    let det = det_exact(&system.matrix);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let b_exp = beta
        .iter()
        .fold(NormExp::Bottom, |a, b| a.max(b.norm_exp()));
    let det_offset = system
        .det_exp
        .as_exp()
        .cloned()
        .ok_or(Error::SingularMatrix)?;
    let bound = b_exp.plus(&system.minor_exp).shift(&-det_offset);
    let rhs: Vec<BigRational> = beta.iter().map(|b| b.value().clone()).collect();
    let mut x = Vec::with_capacity(m);
    for s in 0..m {
        let num = det_exact(&with_column(&system.matrix, s, &rhs));
        let xs = ctx.scalar_from_ratio(num / &det);
        assert!(
            xs.norm_exp() <= bound,
            "Cramer bound violated: |x_{s}| exceeds B + minor - det"
        );
        x.push(xs);
    }
    Ok((x, bound))
}

/// Truncation schedule start: the shallowest explicit negative exponent
/// among tail-carrying ends; -1 when such ends have no explicit negative
/// coefficients yet.
fn schedule_start(problem: &MLProblem) -> Option<i64> {
    let mut start: Option<i64> = None;
    for end in &problem.ends {
        if end.data.tail().is_none() {
            continue;
        }
        let shallowest = end
            .data
            .coeffs()
            .keys()
            .rev()
            .find(|s| **s <= -1)
            .copied()
            .unwrap_or(-1);
        start = Some(start.map_or(shallowest, |s: i64| s.max(shallowest)));
    }
    start
}

fn trim_radius(end: &BoundaryDatum) -> BigRational {
    half(&end.annulus.q1, &end.annulus.q2)
}

/// The jet data of the problem truncated at depth l (tail-carrying ends
/// keep only exponents >= l) with corrections added at the system columns.
fn truncated_jet_data(
    problem: &MLProblem,
    l: i64,
    corrections: &[((usize, i64), PScalar)],
) -> Result<JetData> {
    let ctx = problem.context();
    let mut points = Vec::new();
    for (i, end) in problem.ends.iter().enumerate() {
        let mut coeffs: BTreeMap<i64, PScalar> = end
            .data
            .coeffs()
            .iter()
            .filter(|(s, _)| end.data.tail().is_none() || **s >= l)
            .map(|(s, c)| (*s, c.clone()))
            .collect();
        for ((ci, cl), x) in corrections {
            if *ci == i && !x.is_zero() {
                let v = coeffs.remove(cl).unwrap_or_else(|| ctx.zero()) + x.clone();
                if !v.is_zero() {
                    coeffs.insert(*cl, v);
                }
            }
        }
        points.push(JetPoint::new(
            end.annulus.end.center.clone(),
            end.top,
            coeffs,
        ));
    }
    JetData::new(ctx, points)
}

fn classical_solve(problem: &MLProblem, data: &JetData) -> Result<Solution> {
    match problem.mode {
        Mode::Functions => match classical_jet_solve_functions(data)? {
            JetOutcome::Solution(f) => Ok(Solution::Function(f)),
            JetOutcome::Unsolvable { .. } => Err(Error::Invalid(
                "corrected truncation failed its criterion".into(),
            )),
        },
        Mode::Differentials => match classical_jet_solve_differentials(data, problem.diff_mode)? {
            JetOutcome::Solution(w) => Ok(Solution::Differential(w)),
            JetOutcome::Unsolvable { .. } => Err(Error::Invalid(
                "corrected truncation failed its criterion".into(),
            )),
        },
    }
}

fn spectral_distance(problem: &MLProblem, a: &Solution, b: &Solution) -> NormExp {
    let d = a.sub(b);
    let mut worst = NormExp::Bottom;
    for end in &problem.ends {
        worst = worst.max(d.gauss_at(&end.annulus.end.center, &trim_radius(end)));
    }
    worst
}

/// Certified error of the returned truncation-depth solution: dropped
/// explicit coefficients and tail certificates measured at each end's trim
/// radius.
fn residual_error(problem: &MLProblem, l_final: i64) -> Option<NormExp> {
    let mut worst = NormExp::Bottom;
    for end in &problem.ends {
        let Some(t) = end.data.tail() else { continue };
        let q = trim_radius(end);
        if q < t.q0 {
            return None;
        }
        for (s, c) in end.data.coeffs() {
            if *s < l_final {
                worst = worst.max(
                    c.norm_exp()
                        .shift(&(&q * BigRational::from_integer((*s).into()))),
                );
            }
        }
        worst = worst.max(t.line_at(&q).ok()?);
    }
    Some(worst)
}

/// Re-expands the solution at every end and compares each explicit
/// coefficient at exponents >= l_final.
fn verify_explicit(problem: &MLProblem, solution: &Solution, l_final: i64) -> bool {
    for end in &problem.ends {
        let kept: Vec<(i64, PScalar)> = end
            .data
            .coeffs()
            .iter()
            .filter(|(s, _)| end.data.tail().is_none() || **s >= l_final)
            .map(|(s, c)| (*s, c.clone()))
            .collect();
        let Some(lo) = kept.first().map(|(s, _)| *s) else {
            continue;
        };
        let hi = kept.last().map(|(s, _)| *s).unwrap();
        let exp = solution.local_expansion(&end.annulus.end.center, Window::new(lo, hi));
        for (s, c) in kept {
            if exp.coefficient(s) != c {
                return false;
            }
        }
    }
    true
}

/// The per-end jet tables reported alongside a solution.
fn solution_jets(
    problem: &MLProblem,
    solution: &Solution,
    floor: Option<i64>,
) -> Vec<LaurentChunk> {
    problem
        .ends
        .iter()
        .map(|end| {
            let mut lo = end.data.min_exp().unwrap_or(end.top).min(end.top);
            if let Some(f) = floor {
                lo = lo.min(f);
            }
            solution.local_expansion(&end.annulus.end.center, Window::new(lo, end.top))
        })
        .collect()
}

/// Criterion-and-truncation solve under jet semantics. EXACT problems are
/// delegated to the oracle wholesale.
pub fn solve(problem: &MLProblem, depth: u32) -> Result<SolveReport> {
    if problem.ends.iter().any(|e| e.free) {
        return Err(Error::Invalid(
            "free ends present: complete the data first".into(),
        ));
    }
    if problem.semantics == Semantics::Exact {
        return oracle_solve(problem, depth);
    }
    let basis = dual_basis(problem)?;

    let residuals = pairing_residuals(problem, &basis)?;
    for (j, r) in residuals.iter().enumerate() {
        if r.certified_nonzero() {
            let mut report = SolveReport::bare(Verdict::Unsolvable);
            report.certificate = Some((basis.element(j), r.exact.clone()));
            return Ok(report);
        }
    }
    for (i, end) in problem.ends.iter().enumerate() {
        if end.data.tail().is_some() && tail_eval_radius(end).is_none() {
            let mut report = SolveReport::bare(Verdict::Inconclusive);
            report.inconclusive_reason = Some(format!(
                "tail certificate on end {i} is anchored outside the annulus; its decay cannot be certified"
            ));
            return Ok(report);
        }
    }

    let has_tails = problem.ends.iter().any(|e| e.data.tail().is_some());
    let system = if has_tails && !basis.is_empty() {
        match build_correction_system(problem, &basis) {
            Ok(s) => s,
            Err(Error::NoInvertibleMinor { budget }) => {
                let mut report = SolveReport::bare(Verdict::Inconclusive);
                report.inconclusive_reason = Some(format!(
                    "no invertible correction minor within a budget of {budget} columns"
                ));
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    } else {
        CorrectionSystem {
            columns: Vec::new(),
            matrix: Vec::new(),
            det_exp: NormExp::exp_i64(0),
            minor_exp: NormExp::exp_i64(0),
        }
    };

    let (steps, l_start) = match schedule_start(problem) {
        Some(l0) => (depth.max(1), l0),
        None => (
            1,
            problem
                .ends
                .iter()
                .filter_map(|e| e.data.min_exp())
                .min()
                .unwrap_or(0)
                .min(0)
                - 1,
        ),
    };
    let mut trace = Vec::new();
    let mut current: Option<Solution> = None;
    let mut l_final = l_start;
    for step in 0..steps {
        let l = l_start - step as i64;
        l_final = l;
        let corrections: Vec<((usize, i64), PScalar)> = if system.columns.is_empty() {
            Vec::new()
        } else {
            // The correction right-hand side makes the truncated data
            // satisfy the criterion exactly.
            let plain = truncated_jet_data(problem, l, &[])?;
            let rhs: Vec<PScalar> = match &basis {
                DualBasis::Functions(v) => v
                    .iter()
                    .map(|s| -crate::classical::function_pairing(&plain, s))
                    .collect(),
                DualBasis::Differentials(v) => v
                    .iter()
                    .map(|g| -crate::classical::differential_pairing(&plain, g))
                    .collect(),
            };
            let (x, _bound) = solve_corrections(&system, &rhs)?;
            system.columns.iter().cloned().zip(x).collect()
        };
        let data = truncated_jet_data(problem, l, &corrections)?;
        let sol = classical_solve(problem, &data)?;
        if let Some(prev) = &current {
            trace.push((l, spectral_distance(problem, prev, &sol)));
        }
        current = Some(sol);
    }
    let solution = current.expect("at least one truncation step");

    if !verify_explicit(problem, &solution, l_final) {
        return Err(Error::Invalid(
            "solution failed re-verification against explicit data".into(),
        ));
    }
    let Some(error_exp) = residual_error(problem, l_final) else {
        let mut report = SolveReport::bare(Verdict::Inconclusive);
        report.inconclusive_reason =
            Some("tail certificate cannot be evaluated at the trim radius".into());
        return Ok(report);
    };

    let mut report = SolveReport::bare(Verdict::Solvable);
    report.jets = solution_jets(problem, &solution, Some(l_final));
    report.solution = Some(solution);
    report.error_exp = error_exp;
    report.cauchy_trace = trace;
    Ok(report)
}

/// solve() plus an oracle pass recorded in the report.
pub fn solve_with_oracle(problem: &MLProblem, depth: u32) -> Result<SolveReport> {
    let mut report = solve(problem, depth)?;
    let oracle = oracle_solve(problem, depth)?;
    report.oracle_verdict = Some(oracle.verdict);
    if report.oracle_witness.is_none() {
        report.oracle_witness = oracle.oracle_witness;
    }
    Ok(report)
}

/// Candidate degrees of freedom for the oracle's global parametrization.
#[derive(Debug, Clone)]
enum OracleUnknown {
    Const,
    Pole { center: BigRational, k: u64 },
    Entire { m: u64 },
}

impl OracleUnknown {
    fn scaled(&self, ctx: PContext, c: &BigRational) -> RationalFn {
        match self {
            OracleUnknown::Const => RationalFn::constant(ctx, c.clone()),
            OracleUnknown::Pole { center, k } => {
                RationalFn::pole_monomial(ctx, center.clone(), *k, ctx.scalar_from_ratio(c.clone()))
            }
            OracleUnknown::Entire { m } => RationalFn::from_entire(
                ctx,
                crate::rational::Polynomial::monomial(*m as usize, c.clone()),
            ),
        }
    }

    fn object(&self, ctx: PContext) -> RationalFn {
        self.scaled(ctx, &BigRational::one())
    }
}

/// Independent coefficient-matching oracle. Jet semantics: a global
/// rational candidate space (poles at the end centers, entire part sized
/// by the data) is matched row-by-row against every prescribed
/// coefficient; exact elimination either solves or exposes an
/// inconsistent row as witness. Exact semantics: each end's finite series
/// is itself a rational object, and a solution exists iff they all agree.
pub fn oracle_solve(problem: &MLProblem, depth: u32) -> Result<SolveReport> {
    if problem.ends.iter().any(|e| e.free) {
        return Err(Error::Invalid(
            "free ends present: complete the data first".into(),
        ));
    }
    match problem.semantics {
        Semantics::Exact => oracle_exact(problem),
        Semantics::Jet => oracle_jet(problem, depth),
    }
}

fn is_diff(problem: &MLProblem) -> bool {
    problem.mode == Mode::Differentials
}

fn oracle_jet(problem: &MLProblem, _depth: u32) -> Result<SolveReport> {
    let ctx = problem.context();
    let diff = is_diff(problem);
    let inf_end = problem.ends.iter().find(|e| e.annulus.end.center.is_inf());

    let floor_of = |end: &BoundaryDatum| -> i64 { end_floor(end) };

    let mut unknowns: Vec<OracleUnknown> = Vec::new();
    if !diff || inf_end.is_some() {
        unknowns.push(OracleUnknown::Const);
    }
    for end in &problem.ends {
        if let Some(a) = end.annulus.end.center.as_finite() {
            let depth_i = (-floor_of(end)).max(0);
            for k in 1..=depth_i as u64 {
                unknowns.push(OracleUnknown::Pole {
                    center: a.clone(),
                    k,
                });
            }
        }
    }
    // Entire degrees: forced by the INF floor, and widened so that positive
    // explicit data at finite ends can be globalized (their clash, if any,
    // then surfaces on an INF row).
    let jac = if diff { 2 } else { 0 };
    let mut entire_deg: i64 = inf_end.map_or(0, |e| (-floor_of(e) - jac).max(0));
    for end in &problem.ends {
        if end.annulus.end.center.is_inf() {
            continue;
        }
        if let Some(hi) = end.data.max_exp() {
            entire_deg = entire_deg.max(hi);
        }
    }
    if inf_end.is_some() {
        for m in 1..=entire_deg.max(0) as u64 {
            unknowns.push(OracleUnknown::Entire { m });
        }
    }

    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    let mut row_tags: Vec<(usize, i64)> = Vec::new();
    for (i, end) in problem.ends.iter().enumerate() {
        let center = &end.annulus.end.center;
        let jac_floor = if diff && center.is_inf() { -2 } else { 0 };
        let lo = if center.is_inf() {
            floor_of(end).min(jac_floor - entire_deg.max(0))
        } else {
            floor_of(end).min(jac_floor)
        };
        if lo > end.top {
            continue;
        }
        let w = Window::new(lo, end.top);
        let columns: Vec<LaurentChunk> = unknowns
            .iter()
            .map(|u| {
                let f = u.object(ctx);
                if diff {
                    RationalDiff::new(f).local_expansion(center, w)
                } else {
                    f.local_expansion(center, w)
                }
            })
            .collect();
        for e in lo..=end.top {
            rows.push(
                columns
                    .iter()
                    .map(|c| c.coefficient(e).into_value())
                    .collect(),
            );
            rhs.push(end.data.coefficient(e).into_value());
            row_tags.push((i, e));
        }
    }
    if diff && inf_end.is_none() {
        rows.push(
            unknowns
                .iter()
                .map(|u| match u {
                    OracleUnknown::Pole { k: 1, .. } => BigRational::one(),
                    _ => BigRational::zero(),
                })
                .collect(),
        );
        rhs.push(BigRational::zero());
        row_tags.push((usize::MAX, 0));
    }

    match solve_exact(&rows, &rhs) {
        LinearOutcome::Solution(x) => {
            let mut f = RationalFn::zero(ctx);
            for (u, c) in unknowns.iter().zip(&x) {
                if !c.is_zero() {
                    f = f.add(&u.scaled(ctx, c));
                }
            }
            let solution = if diff {
                Solution::Differential(RationalDiff::new(f))
            } else {
                Solution::Function(f)
            };
            let mut error_exp = NormExp::Bottom;
            for end in &problem.ends {
                if let Some(t) = end.data.tail() {
                    let q = trim_radius(end);
                    if q < t.q0 {
                        let mut report = SolveReport::bare(Verdict::Inconclusive);
                        report.inconclusive_reason =
                            Some("tail certificate cannot be evaluated at the trim radius".into());
                        return Ok(report);
                    }
                    error_exp = error_exp.max(t.line_at(&q)?);
                }
            }
            let mut report = SolveReport::bare(Verdict::Solvable);
            report.jets = solution_jets(problem, &solution, None);
            report.solution = Some(solution);
            report.error_exp = error_exp;
            Ok(report)
        }
        LinearOutcome::Inconsistent { row } => {
            let mut report = SolveReport::bare(Verdict::Unsolvable);
            let tag = row_tags[row];
            report.oracle_witness = if tag.0 == usize::MAX { None } else { Some(tag) };
            Ok(report)
        }
    }
}

/// Interprets one end's finite series as a global rational object in t.
fn end_object(ctx: PContext, end: &BoundaryDatum, diff: bool) -> Result<RationalFn> {
    let center = &end.annulus.end.center;
    let mut f = RationalFn::zero(ctx);
    match center {
        Center::Finite(a) => {
            let mut part = Vec::new();
            let mut poly = crate::rational::Polynomial::zero();
            for (e, c) in end.data.coeffs() {
                if *e < 0 {
                    part.push((*e, c.clone()));
                } else {
                    poly = poly.add(&crate::rational::Polynomial::monomial(
                        *e as usize,
                        c.value().clone(),
                    ));
                }
            }
            // Rebase the polynomial part from (t - a) to t.
            f = f.add(&RationalFn::from_entire(
                ctx,
                poly.taylor_shift(&-a.clone()),
            ));
            if !part.is_empty() {
                f = f.with_part(a.clone(), LaurentChunk::from_coeffs(ctx, part))?;
            }
        }
        Center::Inf => {
            // s = 1/t; for differentials the series is the ds-coefficient,
            // and ds = -t^{-2} dt.
            let mut part = Vec::new();
            let mut poly = crate::rational::Polynomial::zero();
            for (e, c) in end.data.coeffs() {
                let (t_exp, v) = if diff {
                    (-e - 2, -c.clone())
                } else {
                    (-e, c.clone())
                };
                if t_exp >= 0 {
                    poly = poly.add(&crate::rational::Polynomial::monomial(
                        t_exp as usize,
                        v.into_value(),
                    ));
                } else {
                    part.push((t_exp, v));
                }
            }
            f = f.add(&RationalFn::from_entire(ctx, poly));
            if !part.is_empty() {
                f = f.with_part(BigRational::zero(), LaurentChunk::from_coeffs(ctx, part))?;
            }
        }
    }
    Ok(f)
}

fn oracle_exact(problem: &MLProblem) -> Result<SolveReport> {
    let ctx = problem.context();
    let diff = is_diff(problem);
    if problem.ends.iter().any(|e| e.data.tail().is_some()) {
        let mut report = SolveReport::bare(Verdict::Inconclusive);
        report.inconclusive_reason = Some("exact semantics requires fully explicit data".into());
        return Ok(report);
    }
    let objects: Vec<RationalFn> = problem
        .ends
        .iter()
        .map(|e| end_object(ctx, e, diff))
        .collect::<Result<_>>()?;
    for (i, obj) in objects.iter().enumerate().skip(1) {
        let d = objects[0].sub(obj);
        if !d.is_zero() {
            // Locate a differing coefficient at this end as the witness.
            let span: i64 = 2
                + d.pole_order_at_inf() as i64
                + d.parts()
                    .values()
                    .map(|p| -p.min_exp().unwrap_or(0))
                    .sum::<i64>();
            let target = if diff {
                RationalDiff::new(d).local_expansion(
                    &problem.ends[i].annulus.end.center,
                    Window::new(-span - 2, span),
                )
            } else {
                d.local_expansion(
                    &problem.ends[i].annulus.end.center,
                    Window::new(-span, span),
                )
            };
            let e = target.coeffs().keys().next().copied().unwrap_or(0);
            let mut report = SolveReport::bare(Verdict::Unsolvable);
            report.oracle_witness = Some((i, e));
            return Ok(report);
        }
    }
    // All ends agree on one rational object; it solves the problem iff its
    // poles stay inside the removed discs.
    let f = objects
        .into_iter()
        .next()
        .unwrap_or_else(|| RationalFn::zero(ctx));
    let solution = if diff {
        Solution::Differential(RationalDiff::new(f))
    } else {
        Solution::Function(f)
    };
    let confined = match &solution {
        Solution::Function(f) => confine_function_poles(problem.domain(), f),
        Solution::Differential(w) => crate::residues::confine_poles(problem.domain(), w).is_ok(),
    };
    if !confined {
        let mut report = SolveReport::bare(Verdict::Unsolvable);
        report.inconclusive_reason =
            Some("the common rational object has a pole inside the domain".into());
        return Ok(report);
    }
    let mut report = SolveReport::bare(Verdict::Solvable);
    report.jets = solution_jets(problem, &solution, None);
    report.solution = Some(solution);
    Ok(report)
}

/// Pole confinement for a function: finite poles inside removed discs; a
/// nonconstant entire part needs the disc at infinity.
fn confine_function_poles(domain: &WideOpenDomain, f: &RationalFn) -> bool {
    let ctx = domain.context();
    for b in f.parts().keys() {
        let mut housed = false;
        for disc in domain.discs() {
            let inside = match &disc.center {
                Center::Finite(a) => {
                    ctx.scalar_from_ratio(b - a).norm_exp() <= NormExp::Exp(disc.radius_q.clone())
                }
                Center::Inf => {
                    ctx.scalar_from_ratio(b.clone()).norm_exp()
                        >= NormExp::Exp(-disc.radius_q.clone())
                }
            };
            if inside {
                housed = true;
                break;
            }
        }
        if !housed {
            return false;
        }
    }
    if f.entire().degree().map_or(0, |d| d) >= 1
        && !domain.discs().iter().any(|d| d.center.is_inf())
    {
        return false;
    }
    true
}

/// Fills in the free ends so every pairing vanishes, then solves.
/// Functions: a correction-style column system on the free ends.
/// Principal differentials: zeros everywhere free except a residue
/// balancing simple pole on the last free end.
pub fn complete_partial_data(problem: &MLProblem, depth: u32) -> Result<(MLProblem, SolveReport)> {
    let ctx = problem.context();
    if !problem.ends.iter().any(|e| e.free) {
        return Err(Error::Invalid("no free ends to complete".into()));
    }
    if problem.semantics == Semantics::Exact {
        return Err(Error::Invalid(
            "completion works under jet semantics".into(),
        ));
    }
    let mut completed = problem.clone();
    match problem.mode {
        Mode::Functions => {
            let basis = dual_basis(problem)?;
            let m = basis.len();
            let fixed = pairing_residuals(problem, &basis)?;
            if m > 0 {
                // Select columns on the free ends only, shallowest first.
                let budget = 8 * m;
                let mut examined = 0usize;
                let mut l = problem
                    .ends
                    .iter()
                    .filter(|e| e.free)
                    .map(|e| e.top)
                    .max()
                    .unwrap();
                let mut chosen: Vec<(Vec<BigRational>, usize)> = Vec::new();
                let mut columns: Vec<(usize, i64)> = Vec::new();
                let mut raw: Vec<Vec<BigRational>> = Vec::new();
                while chosen.len() < m {
                    let mut best: Option<(NormExp, usize, Vec<BigRational>, Vec<BigRational>)> =
                        None;
                    for (i, end) in problem.ends.iter().enumerate() {
                        if !end.free || l > end.top {
                            continue;
                        }
                        if examined >= budget {
                            return Err(Error::NoInvertibleMinor { budget });
                        }
                        examined += 1;
                        let v = column_vector(&basis, &end.annulus, l)?;
                        let r = eliminate(&chosen, &v);
                        let score = r
                            .iter()
                            .map(|c| ctx.scalar_from_ratio(c.clone()).norm_exp())
                            .fold(NormExp::Bottom, |a, b| a.max(b));
                        if score.is_bottom() {
                            continue;
                        }
                        if best.as_ref().is_none_or(|(s, _, _, _)| score > *s) {
                            best = Some((score, i, v, r));
                        }
                    }
                    if let Some((_, i, v, r)) = best {
                        let pivot = r
                            .iter()
                            .position(|c| !c.is_zero())
                            .expect("nonzero residual");
                        chosen.push((r, pivot));
                        columns.push((i, l));
                        raw.push(v);
                    }
                    l -= 1;
                    if examined >= budget && chosen.len() < m {
                        return Err(Error::NoInvertibleMinor { budget });
                    }
                }
                columns.reverse();
                raw.reverse();
                let matrix: Vec<Vec<BigRational>> = (0..m)
                    .map(|j| raw.iter().map(|c| c[j].clone()).collect())
                    .collect();
                let system = CorrectionSystem {
                    columns,
                    matrix,
                    det_exp: NormExp::exp_i64(0),
                    minor_exp: NormExp::exp_i64(0),
                };
                let beta: Vec<PScalar> = fixed.iter().map(|r| -r.exact.clone()).collect();
                let det = det_exact(&system.matrix);
                if det.is_zero() {
                    return Err(Error::SingularMatrix);
                }
                let rhsv: Vec<BigRational> = beta.iter().map(|b| b.value().clone()).collect();
                for (s, (i, lexp)) in system.columns.iter().enumerate() {
                    let num = det_exact(&with_column(&system.matrix, s, &rhsv));
                    let x = ctx.scalar_from_ratio(num / &det);
                    if !x.is_zero() {
                        let chunk = LaurentChunk::monomial(ctx, *lexp, x);
                        completed.ends[*i].data = completed.ends[*i].data.add(&chunk)?;
                    }
                }
            }
        }
        Mode::Differentials => {
            if problem.diff_mode == DiffMode::Generalized {
                return Err(Error::ModeViolation(
                    "generalized differential completion is not supported".into(),
                ));
            }
            let mut residue_sum = ctx.zero();
            for end in &problem.ends {
                if !end.free {
                    residue_sum = residue_sum + end.data.coefficient(-1);
                }
            }
            let last_free = problem
                .ends
                .iter()
                .rposition(|e| e.free)
                .expect("free end exists");
            if problem.ends[last_free].top < -1 {
                return Err(Error::Invalid(format!(
                    "free end {last_free} cannot hold a simple pole (top {})",
                    problem.ends[last_free].top
                )));
            }
            let a = -residue_sum;
            if !a.is_zero() {
                completed.ends[last_free].data = LaurentChunk::monomial(ctx, -1, a);
            }
        }
    }
    for end in completed.ends.iter_mut() {
        end.free = false;
    }
    let report = solve(&completed, depth)?;
    Ok((completed, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disc;
    use crate::laurent::TailBound;
    use num_bigint::BigInt;

    fn ctx() -> PContext {
        PContext::new(2).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn chunk(c: PContext, entries: &[(i64, i64)]) -> LaurentChunk {
        LaurentChunk::from_coeffs(c, entries.iter().map(|(e, v)| (*e, c.scalar_i64(*v))))
    }

    fn standard_domain(c: PContext) -> WideOpenDomain {
        WideOpenDomain::new(
            c,
            vec![Disc::finite(q(0, 1), q(-2, 1)), Disc::at_infinity(q(-2, 1))],
        )
        .unwrap()
    }

    fn standard_problem(
        c: PContext,
        mode: Mode,
        tops: [i64; 2],
        data: [LaurentChunk; 2],
    ) -> MLProblem {
        let domain = standard_domain(c);
        let ends = data
            .into_iter()
            .enumerate()
            .map(|(i, d)| BoundaryDatum {
                annulus: domain.boundary_annulus(i, &q(-1, 1)).unwrap(),
                top: tops[i],
                data: d,
                free: false,
            })
            .collect();
        MLProblem::new(domain, mode, DiffMode::Principal, Semantics::Jet, ends).unwrap()
    }

    #[test]
    fn pairing_residuals_standard_examples() {
        let c = ctx();
        // f1 = t^{-1} + 2, f2 = 2 against {dt/t}: 2 + (-2) = 0.
        let p = standard_problem(
            c,
            Mode::Functions,
            [0, 0],
            [chunk(c, &[(-1, 1), (0, 2)]), chunk(c, &[(0, 2)])],
        );
        let basis = dual_basis(&p).unwrap();
        assert_eq!(basis.len(), 1);
        let res = pairing_residuals(&p, &basis).unwrap();
        assert!(res[0].exact.is_zero());
        assert!(!res[0].certified_nonzero());

        // f1 = t (top 1), f2 = 0 (top 0): dt/t pairs to 0, dt/t^2 to 1.
        let p = standard_problem(
            c,
            Mode::Functions,
            [1, 0],
            [chunk(c, &[(1, 1)]), chunk(c, &[])],
        );
        let basis = dual_basis(&p).unwrap();
        assert_eq!(basis.len(), 2);
        let res = pairing_residuals(&p, &basis).unwrap();
        assert!(res[0].exact.is_zero());
        assert_eq!(res[1].exact, c.one());
        assert!(res[1].certified_nonzero());
    }

    #[test]
    fn correction_system_single_column() {
        let c = ctx();
        let p = standard_problem(c, Mode::Functions, [0, 0], [chunk(c, &[]), chunk(c, &[])]);
        let basis = dual_basis(&p).unwrap();
        let sys = build_correction_system(&p, &basis).unwrap();
        assert_eq!(sys.columns, vec![(0, 0)]);
        assert_eq!(sys.matrix, vec![vec![BigRational::one()]]);
    }

    #[test]
    fn correction_system_two_columns_identity() {
        let c = ctx();
        let p = standard_problem(c, Mode::Functions, [1, 0], [chunk(c, &[]), chunk(c, &[])]);
        let basis = dual_basis(&p).unwrap();
        let sys = build_correction_system(&p, &basis).unwrap();
        assert_eq!(sys.columns, vec![(0, 0), (0, 1)]);
        // Basis order is {dt/t, dt/t^2}; columns at exponents 0 and 1 give
        // the identity.
        assert_eq!(
            sys.matrix,
            vec![
                vec![BigRational::one(), BigRational::zero()],
                vec![BigRational::zero(), BigRational::one()]
            ]
        );
    }

    #[test]
    fn cramer_solve_with_bound() {
        let c = ctx();
        let system = CorrectionSystem {
            columns: vec![(0, 0), (0, 1)],
            matrix: vec![
                vec![BigRational::one(), BigRational::one()],
                vec![BigRational::zero(), q(2, 1)],
            ],
            det_exp: NormExp::exp_i64(-1),
            minor_exp: NormExp::exp_i64(0),
        };
        let beta = vec![c.one(), c.scalar_i64(2)];
        let (x, bound) = solve_corrections(&system, &beta).unwrap();
        assert_eq!(x, vec![c.zero(), c.one()]);
        assert_eq!(bound, NormExp::exp_i64(1));
    }

    #[test]
    fn solve_standard_function_instance() {
        let c = ctx();
        let p = standard_problem(
            c,
            Mode::Functions,
            [0, 0],
            [chunk(c, &[(-1, 1), (0, 2)]), chunk(c, &[(0, 2)])],
        );
        let report = solve(&p, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Solvable);
        assert!(report.error_exp.is_bottom());
        let Some(Solution::Function(f)) = &report.solution else {
            panic!("expected a function solution")
        };
        assert_eq!(f.entire().coeffs(), &[q(2, 1)]);
        assert_eq!(f.parts().len(), 1);
        assert_eq!(report.jets[0].coefficient(-1), c.one());
        assert_eq!(report.jets[1].coefficient(0), c.scalar_i64(2));
    }

    #[test]
    fn solve_unsolvable_differential_instance() {
        let c = ctx();
        let p = standard_problem(
            c,
            Mode::Differentials,
            [-1, -1],
            [chunk(c, &[(-1, 1)]), chunk(c, &[(-1, 1)])],
        );
        let report = solve(&p, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        let (cert, pairing) = report.certificate.expect("certificate");
        assert!(
            matches!(cert, DualElement::Function(g) if g.entire().coeffs() == [BigRational::one()])
        );
        assert_eq!(pairing, c.scalar_i64(2));
    }

    #[test]
    fn solve_geometric_tail_instance() {
        let c = ctx();
        // f_{1,j} = 2^{-2j} for j in [-8, -1], certified tail below -8;
        // the second end is zero.
        let coeffs: Vec<(i64, PScalar)> = (-8..=-1)
            .map(|j| {
                (
                    j,
                    c.scalar_from_ratio(crate::scalar::rational_pow(&q(2, 1), -2 * j)),
                )
            })
            .collect();
        let tail = TailBound::new(-8, q(-2, 1), NormExp::exp_i64(0)).unwrap();
        let data1 = LaurentChunk::from_coeffs(c, coeffs)
            .with_tail(tail)
            .unwrap();
        let p = standard_problem(c, Mode::Functions, [0, 0], [data1, chunk(c, &[])]);
        let report = solve(&p, 5).unwrap();
        assert_eq!(report.verdict, Verdict::Solvable);
        // Depth 5 from l0 = -1 keeps exponents >= -5; dropped explicit
        // terms peak at j = -6 with norm 12 at trim -3/2: 12 + 6*3/2 = ...
        // exponent 2*(-6) - (-6)(-3/2) = -12 + 9 = -3.
        assert_eq!(report.error_exp, NormExp::exp_i64(-3));
        // Cauchy distances shrink by exactly 1/2 per step at the trims.
        let exps: Vec<BigRational> = report
            .cauchy_trace
            .iter()
            .map(|(_, d)| d.as_exp().unwrap().clone())
            .collect();
        assert_eq!(exps.len(), 4);
        for w in exps.windows(2) {
            assert_eq!(&w[0] - &w[1], q(1, 2));
        }
        // The solution reproduces every kept coefficient exactly.
        let Some(Solution::Function(f)) = &report.solution else {
            panic!()
        };
        let exp = f.local_expansion(&Center::finite_i64(0), Window::new(-5, 0));
        for j in -5..=-1_i64 {
            assert_eq!(
                exp.coefficient(j),
                c.scalar_from_ratio(crate::scalar::rational_pow(&q(2, 1), -2 * j))
            );
        }
    }

    #[test]
    fn oracle_matches_pinned_examples() {
        let c = ctx();
        let solvable = standard_problem(
            c,
            Mode::Functions,
            [0, 0],
            [chunk(c, &[(-1, 1), (0, 2)]), chunk(c, &[(0, 2)])],
        );
        let report = oracle_solve(&solvable, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Solvable);
        let Some(Solution::Function(f)) = &report.solution else {
            panic!()
        };
        assert_eq!(f.entire().coeffs(), &[q(2, 1)]);

        let clash = standard_problem(
            c,
            Mode::Functions,
            [1, 0],
            [chunk(c, &[(1, 1)]), chunk(c, &[])],
        );
        let report = oracle_solve(&clash, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert!(report.oracle_witness.is_some());

        // t dt against zero data at INF: the clash surfaces on the
        // t2^{-3} row.
        let diff_clash = standard_problem(
            c,
            Mode::Differentials,
            [1, 0],
            [chunk(c, &[(1, 1)]), chunk(c, &[])],
        );
        let report = oracle_solve(&diff_clash, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert_eq!(report.oracle_witness, Some((1, -3)));
    }

    #[test]
    fn oracle_exact_semantics() {
        let c = ctx();
        let mut p = standard_problem(
            c,
            Mode::Functions,
            [0, 0],
            [chunk(c, &[(-1, 1), (0, 2)]), chunk(c, &[(0, 2)])],
        );
        p.semantics = Semantics::Exact;
        // Jet-solvable but exact-unsolvable: 2 + 1/t restricted to the INF
        // end is 2 + t2, not the constant 2.
        let report = solve(&p, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert!(report.oracle_witness.is_some());

        // Exact agreement: f1 = t^{-1}, f2 = t2 is 1/t on both ends.
        let mut p = standard_problem(
            c,
            Mode::Functions,
            [1, 1],
            [chunk(c, &[(-1, 1)]), chunk(c, &[(1, 1)])],
        );
        p.semantics = Semantics::Exact;
        let report = solve(&p, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Solvable);
        let Some(Solution::Function(f)) = &report.solution else {
            panic!()
        };
        assert!(f.entire().is_zero());
        assert_eq!(f.parts().len(), 1);
    }

    #[test]
    fn completion_examples() {
        let c = ctx();
        let domain = standard_domain(c);
        // Functions: end 2 free, f1 = t^{-1}: completes with zero and
        // solves to 1/t.
        let ends = vec![
            BoundaryDatum {
                annulus: domain.boundary_annulus(0, &q(-1, 1)).unwrap(),
                top: -1,
                data: chunk(c, &[(-1, 1)]),
                free: false,
            },
            BoundaryDatum {
                annulus: domain.boundary_annulus(1, &q(-1, 1)).unwrap(),
                top: -1,
                data: LaurentChunk::zero(c),
                free: true,
            },
        ];
        let p = MLProblem::new(
            domain.clone(),
            Mode::Functions,
            DiffMode::Principal,
            Semantics::Jet,
            ends,
        )
        .unwrap();
        let (completed, report) = complete_partial_data(&p, 4).unwrap();
        assert!(completed.ends()[1].data.is_zero());
        assert_eq!(report.verdict, Verdict::Solvable);
        let Some(Solution::Function(f)) = &report.solution else {
            panic!()
        };
        assert!(f.entire().is_zero());
        assert_eq!(f.parts()[&q(0, 1)].coefficient(-1), c.one());

        // Differentials: residue balancing on the last free end.
        let ends = vec![
            BoundaryDatum {
                annulus: domain.boundary_annulus(0, &q(-1, 1)).unwrap(),
                top: -1,
                data: chunk(c, &[(-1, 1)]),
                free: false,
            },
            BoundaryDatum {
                annulus: domain.boundary_annulus(1, &q(-1, 1)).unwrap(),
                top: -1,
                data: LaurentChunk::zero(c),
                free: true,
            },
        ];
        let p = MLProblem::new(
            domain,
            Mode::Differentials,
            DiffMode::Principal,
            Semantics::Jet,
            ends,
        )
        .unwrap();
        let (completed, report) = complete_partial_data(&p, 4).unwrap();
        assert_eq!(completed.ends()[1].data.coefficient(-1), c.scalar_i64(-1));
        assert_eq!(report.verdict, Verdict::Solvable);
        let Some(Solution::Differential(w)) = &report.solution else {
            panic!()
        };
        assert_eq!(w.func.parts()[&q(0, 1)].coefficient(-1), c.one());
    }

    #[test]
    fn completion_with_every_end_free_yields_zero() {
        let c = ctx();
        let domain = standard_domain(c);
        for mode in [Mode::Functions, Mode::Differentials] {
            let ends = (0..2)
                .map(|i| BoundaryDatum {
                    annulus: domain.boundary_annulus(i, &q(-1, 1)).unwrap(),
                    top: -1,
                    data: LaurentChunk::zero(c),
                    free: true,
                })
                .collect();
            let p = MLProblem::new(
                domain.clone(),
                mode,
                DiffMode::Principal,
                Semantics::Jet,
                ends,
            )
            .unwrap();
            let (completed, report) = complete_partial_data(&p, 4).unwrap();
            assert!(completed.ends().iter().all(|e| e.data.is_zero()));
            assert_eq!(report.verdict, Verdict::Solvable);
            assert!(report.solution.as_ref().unwrap().is_zero());
        }
    }

    #[test]
    fn obstructions_respect_support_disjointness() {
        let c = ctx();
        // Tail data against dt/t: the dual has no coefficients where the
        // tail lives, so beta stays zero while the bound tracks the tail.
        let coeffs: Vec<(i64, PScalar)> = (-4..=-1)
            .map(|j| {
                (
                    j,
                    c.scalar_from_ratio(crate::scalar::rational_pow(&q(2, 1), -2 * j)),
                )
            })
            .collect();
        let tail = TailBound::new(-4, q(-2, 1), NormExp::exp_i64(0)).unwrap();
        let data1 = LaurentChunk::from_coeffs(c, coeffs)
            .with_tail(tail)
            .unwrap();
        let p = standard_problem(c, Mode::Functions, [0, 0], [data1, chunk(c, &[])]);
        let basis = dual_basis(&p).unwrap();
        let st = compute_obstructions(&p, &basis, -2).unwrap();
        assert!(st.beta.iter().all(|b| b.is_zero()));
        assert!(st.bound_exp.is_some());
    }
}
