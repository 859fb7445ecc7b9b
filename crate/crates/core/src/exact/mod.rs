//! Exact arithmetic foundation: scalars, polynomials, jets, rational
//! functions, linear algebra and a configurable-precision float.

pub mod bigfloat;
pub mod jet;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod ratfunc;
pub mod scalar;

pub use bigfloat::BigFloat;
pub use jet::{jet_pochhammer, Jet};
pub use poly::Poly;
pub use ratfunc::RationalFunction;
pub use scalar::{Field, Ring};
