//! Exact algebra: scalars in `Q(sqrt 2)[pi, 1/pi]`, polynomials, the exterior algebra
//! over polynomial coefficients, and linear maps between named coordinate spaces.

mod exterior;
mod linmap;
mod parse;
mod poly;
mod scalar;

pub use exterior::{det, pullback_top, ExtElem, Ring};
pub use linmap::{poly_subst_linear, LinMap};
pub use parse::parse_poly;
pub use poly::{index_of, vars, CompiledPoly, Mono, Poly, Vars};
pub use scalar::Scalar;
