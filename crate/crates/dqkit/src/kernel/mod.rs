//! Coefficient ring: exact rationals, sparse polynomials and truncated
//! series in the deformation parameter `t`.

mod poly;
mod series;

pub use poly::{poly_mul, poly_partial, variable_names, Exponents, Poly};
pub use series::{tpoly_mul, TPoly};

/// Exact rational scalar, always stored in lowest terms with a positive
/// denominator.
pub type Rat = num::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Rat {
    (1..=n).fold(int(1), |acc, k| acc * int(k.into()))
}
