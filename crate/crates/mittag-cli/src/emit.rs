//! Report serialization. All scalars are emitted as exact rational
//! strings; a norm exponent of zero (the Bottom element) serializes as
//! null. Field order is fixed by the struct declarations so reports are
//! byte-stable for identical inputs.

use num_rational::BigRational;
use serde::Serialize;

use mittag::solver::SolveReport;
use mittag::{
    AnnularDifferential, Center, DualElement, LaurentChunk, NormExp, OrientedAnnulus, PScalar,
    RationalDiff, RationalFn, Solution, Toward, Verdict,
};

pub fn ratio_str(q: &BigRational) -> String {
    q.to_string()
}

pub fn scalar_str(x: &PScalar) -> String {
    ratio_str(x.value())
}

pub fn center_str(c: &Center) -> String {
    match c {
        Center::Inf => "inf".to_string(),
        Center::Finite(a) => ratio_str(a),
    }
}

pub fn norm_str(n: &NormExp) -> Option<String> {
    n.as_exp().map(ratio_str)
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Solvable => "solvable",
        Verdict::Unsolvable => "unsolvable",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Solvable => 0,
        Verdict::Unsolvable => 2,
        Verdict::Inconclusive => 3,
    }
}

#[derive(Serialize)]
pub struct CoefOut {
    pub exp: i64,
    pub coef: String,
}

#[derive(Serialize)]
pub struct TailOut {
    pub below: i64,
    pub q0: String,
    pub bound_exp: Option<String>,
}

#[derive(Serialize)]
pub struct ChunkOut {
    pub coeffs: Vec<CoefOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailOut>,
}

pub fn chunk_out(c: &LaurentChunk) -> ChunkOut {
    ChunkOut {
        coeffs: c
            .coeffs()
            .iter()
            .map(|(e, v)| CoefOut {
                exp: *e,
                coef: scalar_str(v),
            })
            .collect(),
        tail: c.tail().map(|t| TailOut {
            below: t.below,
            q0: ratio_str(&t.q0),
            bound_exp: norm_str(&t.bound_exp),
        }),
    }
}

#[derive(Serialize)]
pub struct PartOut {
    pub center: String,
    pub coeffs: Vec<CoefOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailOut>,
}

/// A rational function or differential as explicit coefficient lists: the
/// entire polynomial (ascending) and one principal part per finite pole.
#[derive(Serialize)]
pub struct FnOut {
    pub kind: &'static str,
    pub entire: Vec<String>,
    pub parts: Vec<PartOut>,
}

fn fn_out(kind: &'static str, f: &RationalFn) -> FnOut {
    FnOut {
        kind,
        entire: f.entire().coeffs().iter().map(ratio_str).collect(),
        parts: f
            .parts()
            .iter()
            .map(|(b, part)| {
                let c = chunk_out(part);
                PartOut {
                    center: ratio_str(b),
                    coeffs: c.coeffs,
                    tail: c.tail,
                }
            })
            .collect(),
    }
}

pub fn function_out(f: &RationalFn) -> FnOut {
    fn_out("function", f)
}

pub fn differential_out(w: &RationalDiff) -> FnOut {
    fn_out("differential", &w.func)
}

pub fn solution_out(s: &Solution) -> FnOut {
    match s {
        Solution::Function(f) => function_out(f),
        Solution::Differential(w) => differential_out(w),
    }
}

pub fn dual_out(d: &DualElement) -> FnOut {
    match d {
        DualElement::Function(f) => function_out(f),
        DualElement::Differential(w) => differential_out(w),
    }
}

#[derive(Serialize)]
pub struct AnnulusOut {
    pub end: usize,
    pub center: String,
    pub inverted: bool,
    pub q1: String,
    pub q2: String,
    pub toward: &'static str,
}

pub fn annulus_out(a: &OrientedAnnulus) -> AnnulusOut {
    AnnulusOut {
        end: a.end.index,
        center: center_str(&a.end.center),
        inverted: a.inverted,
        q1: ratio_str(&a.q1),
        q2: ratio_str(&a.q2),
        toward: match a.oriented_toward {
            Toward::Inner => "inner",
            Toward::Outer => "outer",
        },
    }
}

#[derive(Serialize)]
pub struct CertificateOut {
    pub element: FnOut,
    pub pairing: String,
}

#[derive(Serialize)]
pub struct WitnessOut {
    pub end: usize,
    pub exp: i64,
}

#[derive(Serialize)]
pub struct TraceStepOut {
    pub l: i64,
    pub gap: Option<String>,
}

/// Mirror of the library's SolveReport.
#[derive(Serialize)]
pub struct SolveReportOut {
    pub verdict: &'static str,
    pub certificate: Option<CertificateOut>,
    pub solution: Option<FnOut>,
    pub jets: Vec<ChunkOut>,
    pub error_exp: Option<String>,
    pub cauchy_trace: Vec<TraceStepOut>,
    pub oracle_verdict: Option<&'static str>,
    pub oracle_witness: Option<WitnessOut>,
    pub inconclusive_reason: Option<String>,
}

pub fn report_out(r: &SolveReport) -> SolveReportOut {
    SolveReportOut {
        verdict: verdict_str(r.verdict),
        certificate: r.certificate.as_ref().map(|(d, x)| CertificateOut {
            element: dual_out(d),
            pairing: scalar_str(x),
        }),
        solution: r.solution.as_ref().map(solution_out),
        jets: r.jets.iter().map(chunk_out).collect(),
        error_exp: norm_str(&r.error_exp),
        cauchy_trace: r
            .cauchy_trace
            .iter()
            .map(|(l, g)| TraceStepOut {
                l: *l,
                gap: norm_str(g),
            })
            .collect(),
        oracle_verdict: r.oracle_verdict.map(verdict_str),
        oracle_witness: r.oracle_witness.map(|(end, exp)| WitnessOut { end, exp }),
        inconclusive_reason: r.inconclusive_reason.clone(),
    }
}

#[derive(Serialize)]
pub struct ResidueOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub end: usize,
    pub q_outer: Option<String>,
    pub residue: String,
}

#[derive(Serialize)]
pub struct PullbackOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub annulus: AnnulusOut,
    pub series: ChunkOut,
    pub residue: Option<String>,
    pub residue_exact: bool,
}

pub fn pullback_out(seed: Option<u64>, pulled: &AnnularDifferential) -> PullbackOut {
    let (residue, exact) = match pulled.residue() {
        Ok(r) => (Some(scalar_str(&r)), true),
        Err(_) => (None, false),
    };
    PullbackOut {
        command: "pullback",
        seed,
        annulus: annulus_out(&pulled.annulus),
        series: chunk_out(&pulled.series),
        residue,
        residue_exact: exact,
    }
}

#[derive(Serialize)]
pub struct ResidueTheoremOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub per_end: Vec<String>,
    pub sum: String,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct InsideOutsideOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub inner: String,
    pub outer: String,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct SplittingOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub sum_first: String,
    pub sum_second: String,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct BasisOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub kind: &'static str,
    pub dim: usize,
    pub elements: Vec<FnOut>,
}

#[derive(Serialize)]
pub struct ClassicalOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub kind: &'static str,
    pub mode: Option<&'static str>,
    pub verdict: &'static str,
    pub solution: Option<FnOut>,
    pub certificate: Option<CertificateOut>,
}

#[derive(Serialize)]
pub struct SolveOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub mode: &'static str,
    pub diff_mode: Option<&'static str>,
    pub semantics: &'static str,
    pub depth: u32,
    pub oracle: bool,
    #[serde(flatten)]
    pub report: SolveReportOut,
    pub jet_verdict: Option<&'static str>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct CompletedEndOut {
    pub end: usize,
    pub top: i64,
    pub data: ChunkOut,
}

#[derive(Serialize)]
pub struct CompleteOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub mode: &'static str,
    pub depth: u32,
    pub completed_ends: Vec<CompletedEndOut>,
    #[serde(flatten)]
    pub report: SolveReportOut,
}

#[derive(Serialize)]
pub struct DecomposeOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub plus: ChunkOut,
    pub minus: ChunkOut,
}

#[derive(Serialize)]
pub struct ApproxOut {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub eps_exp: String,
    pub approximant: FnOut,
    pub error_exp: Option<String>,
    pub ok: bool,
}

pub fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("report serialization");
    println!("{text}");
}
