//! Problem-file schema: JSON surface types and their conversion into
//! library objects. Rationals travel as strings "a/b" or "a"; every
//! conversion error names the field it came from.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;

use mittag::geometry::Disc;
use mittag::laurent::TailBound;
use mittag::rational::Polynomial;
use mittag::solver::BoundaryDatum;
use mittag::{
    AnnularDifferential, Center, Divisor, End, JetData, JetPoint, LaurentChunk, MLProblem, NormExp,
    OrientedAnnulus, PContext, RationalDiff, RationalFn, Toward, WideOpenDomain, Window,
};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Schema(String),
    BadRational { field: String, value: String },
    Usage(String),
    Lib(mittag::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::BadRational { field, value } => {
                write!(f, "bad rational at {field}: {value:?}")
            }
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<mittag::Error> for CliError {
    fn from(e: mittag::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub p: u64,
    #[serde(default)]
    pub discs: Vec<DiscJson>,
    #[serde(default)]
    pub trims: Option<Vec<String>>,
    #[serde(default)]
    pub ends: Vec<EndJson>,
    #[serde(default)]
    pub differential: Option<FnJson>,
    #[serde(default)]
    pub function: Option<FnJson>,
    #[serde(default)]
    pub series: Option<ChunkJson>,
    #[serde(default)]
    pub map: Option<ChunkJson>,
    #[serde(default)]
    pub annulus: Option<AnnulusJson>,
    #[serde(default)]
    pub window: Option<WindowJson>,
    #[serde(default)]
    pub q1: Option<String>,
    #[serde(default)]
    pub q2: Option<String>,
    #[serde(default)]
    pub end: Option<usize>,
    #[serde(default)]
    pub q_outer: Option<String>,
    #[serde(default)]
    pub divisor: Vec<DivisorEntryJson>,
    #[serde(default)]
    pub jets: Vec<JetJson>,
    #[serde(default)]
    pub split: Option<SplitJson>,
    #[serde(default)]
    pub allowed_poles: Option<Vec<String>>,
    #[serde(default)]
    pub eps_exp: Option<String>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub diff_mode: Option<String>,
    #[serde(default)]
    pub semantics: Option<String>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub oracle: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscJson {
    pub center: String,
    pub radius_exp: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefJson {
    pub exp: i64,
    pub coef: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailJson {
    pub below: i64,
    pub q0: String,
    pub bound_exp: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkJson {
    #[serde(default)]
    pub coeffs: Vec<CoefJson>,
    #[serde(default)]
    pub tail: Option<TailJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndJson {
    pub end: usize,
    pub top: i64,
    #[serde(default)]
    pub free: bool,
    #[serde(default)]
    pub data: Vec<CoefJson>,
    #[serde(default)]
    pub tail: Option<TailJson>,
    #[serde(default)]
    pub q_outer: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnJson {
    #[serde(default)]
    pub entire: Vec<String>,
    #[serde(default)]
    pub parts: Vec<PartJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartJson {
    pub center: String,
    #[serde(default)]
    pub coeffs: Vec<CoefJson>,
    #[serde(default)]
    pub tail: Option<TailJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusJson {
    pub end: usize,
    pub center: String,
    #[serde(default)]
    pub inverted: bool,
    pub q1: String,
    pub q2: String,
    pub toward: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowJson {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorEntryJson {
    pub center: String,
    pub mult: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetJson {
    pub center: String,
    pub top: i64,
    #[serde(default)]
    pub data: Vec<CoefJson>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitJson {
    pub u: Vec<DiscJson>,
    pub v: Vec<DiscJson>,
}

pub fn load(path: &Path) -> Result<ProblemFile> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))
}

pub fn ratio(field: &str, s: &str) -> Result<BigRational> {
    s.trim().parse().map_err(|_| CliError::BadRational {
        field: field.to_string(),
        value: s.to_string(),
    })
}

pub fn center(field: &str, s: &str) -> Result<Center> {
    if s.trim() == "inf" {
        Ok(Center::Inf)
    } else {
        Ok(Center::Finite(ratio(field, s)?))
    }
}

fn tail(field: &str, t: &TailJson) -> Result<TailBound> {
    let q0 = ratio(&format!("{field}.q0"), &t.q0)?;
    let bound = match &t.bound_exp {
        Some(s) => NormExp::Exp(ratio(&format!("{field}.bound_exp"), s)?),
        None => NormExp::Bottom,
    };
    Ok(TailBound::new(t.below, q0, bound)?)
}

pub fn chunk_from_parts(
    ctx: PContext,
    field: &str,
    coeffs: &[CoefJson],
    t: &Option<TailJson>,
) -> Result<LaurentChunk> {
    let mut entries = Vec::with_capacity(coeffs.len());
    for (i, c) in coeffs.iter().enumerate() {
        let v = ratio(&format!("{field}[{i}].coef"), &c.coef)?;
        entries.push((c.exp, ctx.scalar_from_ratio(v)));
    }
    let mut out = LaurentChunk::from_coeffs(ctx, entries);
    if let Some(t) = t {
        out = out.with_tail(tail(&format!("{field}.tail"), t)?)?;
    }
    Ok(out)
}

pub fn chunk(ctx: PContext, field: &str, c: &ChunkJson) -> Result<LaurentChunk> {
    chunk_from_parts(ctx, &format!("{field}.coeffs"), &c.coeffs, &c.tail)
}

pub fn rational_fn(ctx: PContext, field: &str, f: &FnJson) -> Result<RationalFn> {
    let mut entire = Vec::with_capacity(f.entire.len());
    for (i, c) in f.entire.iter().enumerate() {
        entire.push(ratio(&format!("{field}.entire[{i}]"), c)?);
    }
    let mut out = RationalFn::from_entire(ctx, Polynomial::from_coeffs(entire));
    for (i, part) in f.parts.iter().enumerate() {
        let pf = format!("{field}.parts[{i}]");
        let b = ratio(&format!("{pf}.center"), &part.center)?;
        let series = chunk_from_parts(ctx, &format!("{pf}.coeffs"), &part.coeffs, &part.tail)?;
        out = out.with_part(b, series)?;
    }
    Ok(out)
}

impl ProblemFile {
    pub fn context(&self) -> Result<PContext> {
        Ok(PContext::new(self.p)?)
    }

    pub fn domain(&self, ctx: PContext) -> Result<WideOpenDomain> {
        if self.discs.is_empty() {
            return Err(CliError::Usage(
                "this command needs a \"discs\" list in the problem file".into(),
            ));
        }
        let mut discs = Vec::with_capacity(self.discs.len());
        for (i, d) in self.discs.iter().enumerate() {
            let r = ratio(&format!("discs[{i}].radius_exp"), &d.radius_exp)?;
            let disc = match center(&format!("discs[{i}].center"), &d.center)? {
                Center::Inf => Disc::at_infinity(r),
                Center::Finite(a) => Disc::finite(a, r),
            };
            discs.push(disc);
        }
        Ok(WideOpenDomain::new(ctx, discs)?)
    }

    pub fn trims(&self) -> Result<Vec<BigRational>> {
        let Some(trims) = &self.trims else {
            return Err(CliError::Usage(
                "this command needs a \"trims\" list in the problem file".into(),
            ));
        };
        trims
            .iter()
            .enumerate()
            .map(|(i, s)| ratio(&format!("trims[{i}]"), s))
            .collect()
    }

    pub fn differential(&self, ctx: PContext) -> Result<RationalDiff> {
        let Some(f) = &self.differential else {
            return Err(CliError::Usage(
                "this command needs a \"differential\" object in the problem file".into(),
            ));
        };
        Ok(RationalDiff::new(rational_fn(ctx, "differential", f)?))
    }

    pub fn annular_differential(&self, ctx: PContext) -> Result<AnnularDifferential> {
        let Some(a) = &self.annulus else {
            return Err(CliError::Usage(
                "this command needs an \"annulus\" object in the problem file".into(),
            ));
        };
        let Some(s) = &self.series else {
            return Err(CliError::Usage(
                "this command needs a \"series\" object in the problem file".into(),
            ));
        };
        let toward = match a.toward.as_str() {
            "inner" => Toward::Inner,
            "outer" => Toward::Outer,
            other => {
                return Err(CliError::Schema(format!(
                    "annulus.toward must be \"inner\" or \"outer\", got {other:?}"
                )))
            }
        };
        let annulus = OrientedAnnulus {
            end: End {
                index: a.end,
                center: center("annulus.center", &a.center)?,
            },
            inverted: a.inverted,
            q1: ratio("annulus.q1", &a.q1)?,
            q2: ratio("annulus.q2", &a.q2)?,
            oriented_toward: toward,
        };
        Ok(AnnularDifferential::new(annulus, chunk(ctx, "series", s)?))
    }

    pub fn window(&self) -> Result<Window> {
        let Some(w) = &self.window else {
            return Err(CliError::Usage(
                "this command needs a \"window\" object in the problem file".into(),
            ));
        };
        if w.lo > w.hi {
            return Err(CliError::Schema(format!(
                "window [{}, {}] is empty",
                w.lo, w.hi
            )));
        }
        Ok(Window::new(w.lo, w.hi))
    }

    pub fn divisor(&self) -> Result<Divisor> {
        let mut pairs = Vec::with_capacity(self.divisor.len());
        for (i, e) in self.divisor.iter().enumerate() {
            pairs.push((center(&format!("divisor[{i}].center"), &e.center)?, e.mult));
        }
        Ok(Divisor::from_pairs(pairs))
    }

    pub fn jet_data(&self, ctx: PContext) -> Result<JetData> {
        if self.jets.is_empty() {
            return Err(CliError::Usage(
                "this command needs a \"jets\" list in the problem file".into(),
            ));
        }
        let mut points = Vec::with_capacity(self.jets.len());
        for (i, j) in self.jets.iter().enumerate() {
            let jf = format!("jets[{i}]");
            let c = center(&format!("{jf}.center"), &j.center)?;
            let mut data = Vec::with_capacity(j.data.len());
            for (k, e) in j.data.iter().enumerate() {
                let v = ratio(&format!("{jf}.data[{k}].coef"), &e.coef)?;
                data.push((e.exp, ctx.scalar_from_ratio(v)));
            }
            points.push(JetPoint::new(c, j.top, data));
        }
        Ok(JetData::new(ctx, points)?)
    }

    pub fn split_domains(&self, ctx: PContext) -> Result<(WideOpenDomain, WideOpenDomain)> {
        let Some(s) = &self.split else {
            return Err(CliError::Usage(
                "this command needs a \"split\" object with \"u\" and \"v\" disc lists".into(),
            ));
        };
        let build = |field: &str, list: &[DiscJson]| -> Result<WideOpenDomain> {
            let mut discs = Vec::with_capacity(list.len());
            for (i, d) in list.iter().enumerate() {
                let r = ratio(&format!("split.{field}[{i}].radius_exp"), &d.radius_exp)?;
                let disc = match center(&format!("split.{field}[{i}].center"), &d.center)? {
                    Center::Inf => Disc::at_infinity(r),
                    Center::Finite(a) => Disc::finite(a, r),
                };
                discs.push(disc);
            }
            Ok(WideOpenDomain::new(ctx, discs)?)
        };
        Ok((build("u", &s.u)?, build("v", &s.v)?))
    }

    pub fn allowed_poles(&self) -> Result<Vec<Center>> {
        let Some(pts) = &self.allowed_poles else {
            return Err(CliError::Usage(
                "this command needs an \"allowed_poles\" list in the problem file".into(),
            ));
        };
        pts.iter()
            .enumerate()
            .map(|(i, s)| center(&format!("allowed_poles[{i}]"), s))
            .collect()
    }

    /// One boundary datum per end, sorted by end index. Ends without an
    /// explicit outer radius get the midpoint of the admissible range.
    pub fn boundary_data(
        &self,
        ctx: PContext,
        domain: &WideOpenDomain,
    ) -> Result<Vec<BoundaryDatum>> {
        if self.ends.is_empty() {
            return Err(CliError::Usage(
                "this command needs an \"ends\" list in the problem file".into(),
            ));
        }
        let n = domain.discs().len();
        let seen: BTreeSet<usize> = self.ends.iter().map(|e| e.end).collect();
        if seen.len() != self.ends.len() {
            return Err(CliError::Schema("duplicate end index in \"ends\"".into()));
        }
        if let Some(missing) = (0..n).find(|i| !seen.contains(i)) {
            return Err(CliError::Schema(format!(
                "no datum for end {missing} ({n} ends; one entry per end)"
            )));
        }
        if let Some(extra) = seen.iter().find(|i| **i >= n) {
            return Err(CliError::Schema(format!(
                "end index {extra} out of range (the domain has {n} ends)"
            )));
        }
        let mut sorted: Vec<&EndJson> = self.ends.iter().collect();
        sorted.sort_by_key(|e| e.end);
        let mut out = Vec::with_capacity(n);
        for e in sorted {
            let ef = format!("ends[{}]", e.end);
            let q_outer = match &e.q_outer {
                Some(s) => ratio(&format!("{ef}.q_outer"), s)?,
                None => {
                    let radius = &domain.discs()[e.end].radius_q;
                    match domain.separation_bound(e.end) {
                        Some(sep) => (radius + sep) / BigRational::from_integer(2.into()),
                        None => radius + BigRational::from_integer(1.into()),
                    }
                }
            };
            let annulus = domain.boundary_annulus(e.end, &q_outer)?;
            let data = chunk_from_parts(ctx, &format!("{ef}.data"), &e.data, &e.tail)?;
            out.push(BoundaryDatum {
                annulus,
                top: e.top,
                data,
                free: e.free,
            });
        }
        Ok(out)
    }

    pub fn ml_problem(
        &self,
        ctx: PContext,
        mode: mittag::Mode,
        diff_mode: mittag::DiffMode,
        semantics: mittag::Semantics,
    ) -> Result<MLProblem> {
        let domain = self.domain(ctx)?;
        let ends = self.boundary_data(ctx, &domain)?;
        Ok(MLProblem::new(domain, mode, diff_mode, semantics, ends)?)
    }
}
