use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("{what} has {got} components, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("h11({t}) = {value} is not positive")]
    NonPositiveH11 { t: f64, value: f64 },
    #[error("Einstein constant must be positive, got {0}")]
    EinsteinConstant(f64),
    #[error("expression `{which}`: {source}")]
    Expr {
        which: &'static str,
        #[source]
        source: ExprError,
    },
    #[error("finite-difference stencil leaves the domain at {0}")]
    Stencil(String),
    #[error("matrix is singular")]
    Singular,
    #[error("coordinate change not expressible: {0}")]
    Transform(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
