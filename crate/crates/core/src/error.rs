use thiserror::Error;

/// Errors raised across the profile / action / stability pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation not supported for model family {0}")]
    UnsupportedFamily(&'static str),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("no periodic orbit: {0}")]
    NoOrbit(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("kappa is not positive on the orbit interval (min {0:e})")]
    NonPositiveKappa(f64),
    #[error("trajectory left the orbit interval at x = {0}")]
    OrbitEscape(f64),
    #[error("period mismatch between ODE return time and quadrature: {0:e}")]
    PeriodMismatch(f64),
    #[error("degenerate parametrization: {0}")]
    DegenerateParametrization(String),
    #[error("action Hessian asymmetry {0:e} exceeds tolerance")]
    HessianAsymmetry(f64),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("constraints matrix is singular within tolerance")]
    SingularC,
    #[error("signature contradiction: negA = {neg_a} < neg(-C) = {neg_c}")]
    SignatureContradiction { neg_a: usize, neg_c: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("symmetric indefinite factorization broke down at pivot {0}")]
    FactorizationBreakdown(usize),
    #[error("profile is constant (zero amplitude)")]
    ConstantProfile,
    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),
    #[error("contour passes through a zero of the Evans function (|D| = {0:e})")]
    ContourThroughZero(f64),
    #[error("solution blew up at t = {0}")]
    BlowUp(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Variant name, stable across message wording changes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedFamily(_) => "UnsupportedFamily",
            Error::GridTooCoarse(_) => "GridTooCoarse",
            Error::NoOrbit(_) => "NoOrbit",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::NonPositiveKappa(_) => "NonPositiveKappa",
            Error::OrbitEscape(_) => "OrbitEscape",
            Error::PeriodMismatch(_) => "PeriodMismatch",
            Error::DegenerateParametrization(_) => "DegenerateParametrization",
            Error::HessianAsymmetry(_) => "HessianAsymmetry",
            Error::BadDimension(_) => "BadDimension",
            Error::NotApplicable(_) => "NotApplicable",
            Error::SingularC => "SingularC",
            Error::SignatureContradiction { .. } => "SignatureContradiction",
            Error::GridMismatch(_) => "GridMismatch",
            Error::FactorizationBreakdown(_) => "FactorizationBreakdown",
            Error::ConstantProfile => "ConstantProfile",
            Error::IntegrationFailure(_) => "IntegrationFailure",
            Error::ContourThroughZero(_) => "ContourThroughZero",
            Error::BlowUp(_) => "BlowUp",
            Error::Degenerate(_) => "Degenerate",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
