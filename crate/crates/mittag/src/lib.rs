//! Exact residue calculus and Mittag-Leffler boundary interpolation on
//! p-adic annuli.
//!
//! Everything here is computed in exact rational arithmetic: scalars are
//! rationals carrying a p-adic absolute value, series live on explicit
//! exponent windows with certified tail bounds, and geometric norms are
//! tracked through their rational exponents. No floating point enters any
//! verdict.

pub mod classical;
pub mod error;
pub mod geometry;
pub mod laurent;
pub mod linalg;
pub mod rational;
pub mod residues;
pub mod scalar;
pub mod solver;

pub use classical::{DiffMode, Divisor, JetData, JetOutcome, JetPoint};
pub use error::{Error, Result};
pub use geometry::{AffinoidSlice, Center, Disc, End, OrientedAnnulus, Toward, WideOpenDomain};
pub use laurent::{LaurentChunk, MapClass, Orientation, TailBound, Window};
pub use rational::{Polynomial, RationalDiff, RationalFn};
pub use residues::AnnularDifferential;
pub use scalar::{NormExp, PContext, PScalar, Valuation};
pub use solver::{
    BoundaryDatum, DualElement, MLProblem, Mode, Semantics, Solution, SolveReport, Verdict,
};
