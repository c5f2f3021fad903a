use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the symbolic operations.
///
/// Variants that carry a witness render it as canonical polynomial text so
/// that reports stay exact.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("exponent at position {pos} is not a non-negative integer")]
    BadExponent { pos: usize },

    #[error("schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("operator is not a derivation: {op}(f*g) - f*{op}(g) - {op}(f)*g = {defect} for f = {f}, g = {g}")]
    NotDerivation {
        op: String,
        f: String,
        g: String,
        defect: String,
    },

    #[error("not a biderivation: {0}")]
    NotBiderivation(String),

    #[error("star product is not special: symmetric part of P1 is {0}")]
    NotSpecial(String),

    #[error("star product is not associative at order {order}")]
    NotAssociative { order: usize },

    #[error("no solution within bounds; residual {residual}")]
    NoSolution { residual: String },

    #[error("form is not closed: d = {0}")]
    NotClosed(String),

    #[error("bivector is not Poisson: jacobiator({triple}) = {value}")]
    NotPoisson { triple: String, value: String },

    #[error("curving mismatch: dB - H = {0}")]
    CurvingMismatch(String),

    #[error("Maurer-Cartan defect at order {order}: {value}")]
    McFailure { order: usize, value: String },

    #[error("not unital: R_{order}(1) != 0")]
    NotUnital { order: usize },

    #[error("convention breakage: {0}")]
    Convention(String),
}

impl Error {
    /// True for failures of a mathematical property of valid input, as
    /// opposed to malformed input.
    pub fn is_defect(&self) -> bool {
        !matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::ArityMismatch { .. }
                | Error::DegreeMismatch { .. }
                | Error::OrderMismatch { .. }
                | Error::Syntax { .. }
                | Error::UnknownVariable { .. }
                | Error::BadExponent { .. }
                | Error::Schema { .. }
                | Error::Invalid(_)
        )
    }
}
