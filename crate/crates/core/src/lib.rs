//! Exact-arithmetic toolkit that turns proper hypergeometric binomial sums
//! into fast-converging Apéry-limit computations.
//!
//! The arithmetic containers in [`exact`] are generic over the scalar type;
//! the aliases below fix the exact rational instantiation used throughout
//! the pipeline.

pub mod apery;
pub mod catalog;
pub mod error;
pub mod exact;
pub mod guess;
pub mod hyperterm;
pub mod identify;
pub mod miracle;
pub mod telescope;

pub use error::{Error, Result};
pub use exact::{BigFloat, Field, Jet, Poly, RationalFunction, Ring};

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = num_rational::BigRational;
/// Polynomial with exact rational coefficients.
pub type PolyQ = Poly<Rational>;
/// Truncated power series with exact rational coefficients.
pub type JetQ = Jet<Rational>;
/// Bivariate polynomial in `(n, k)`: a polynomial in `k` whose coefficients
/// are polynomials in `n`.
pub type BiPolyQ = Poly<PolyQ>;
/// Double-precision instantiations, for numeric exploration.
pub type PolyF64 = Poly<f64>;
pub type JetF64 = Jet<f64>;
