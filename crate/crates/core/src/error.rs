use core::fmt;

/// Which Weierstrass constraint failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// Isotropy of `∂Ψ/∂z` (complex).
    Isotropy,
    /// Nonvanishing of `‖∂Ψ/∂z‖²` (real).
    Nondegeneracy,
    /// Tangency of `T` in the `F^j` directions.
    Tangency,
}

impl Constraint {
    pub fn label(self) -> &'static str {
        match self {
            Constraint::Isotropy => "isotropy",
            Constraint::Nondegeneracy => "nondegeneracy",
            Constraint::Tangency => "tangency",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    DegeneratePoint,
    PoleOfCayley,
    NotOnSphere { norm: f64 },
    NotAdmissible,
    PoleAtOrigin,
    NotImmersion { rank: usize, dim: usize },
    CharacteristicPoint { horizontal_gradient: f64 },
    NotTTangent { t_derivative: f64 },
    DegenerateChart { e: f64 },
    ConstraintsViolated { constraint: Constraint, value: f64 },
    NotConverged { iterations: usize, grad_norm: f64 },
    EmptyGrid,
    InvalidDomain(&'static str),
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegeneratePoint => write!(f, "frame undefined at a point with t = 0"),
            Error::PoleOfCayley => write!(f, "Cayley transform has a pole at ζ_(n+1) = -1"),
            Error::NotOnSphere { norm } => write!(f, "point is not on the unit sphere (|ζ| = {norm})"),
            Error::NotAdmissible => write!(f, "parameter α is not admissible (c_α = 0)"),
            Error::PoleAtOrigin => write!(f, "fundamental solution evaluated at the origin"),
            Error::NotImmersion { rank, dim } => {
                write!(f, "pullback metric has rank {rank} < {dim}")
            }
            Error::CharacteristicPoint { horizontal_gradient } => {
                write!(f, "characteristic point: |Xφ| = {horizontal_gradient}")
            }
            Error::NotTTangent { t_derivative } => {
                write!(f, "surface is not tangent to T: |Tφ| = {t_derivative}")
            }
            Error::DegenerateChart { e } => write!(f, "conformal factor E = {e} is not positive"),
            Error::ConstraintsViolated { constraint, value } => {
                write!(f, "{} constraint violated, residual {value:e}", constraint.label())
            }
            Error::NotConverged { iterations, grad_norm } => {
                write!(f, "no convergence after {iterations} iterations (gradient norm {grad_norm:e})")
            }
            Error::EmptyGrid => write!(f, "grid has no points"),
            Error::InvalidDomain(why) => write!(f, "invalid domain: {why}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
