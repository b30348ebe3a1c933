//! Error type shared by all modules.

use std::fmt;

/// Everything that can go wrong across the toolkit.
#[derive(Debug)]
pub enum Error {
    /// Moment matrices with more than two rows are not supported.
    UnsupportedRank(usize),
    /// A moment-matrix column is the zero vector.
    ZeroColumn(usize),
    /// The case analysis of the rank-2 normal form failed.
    NotRankTwoNormalizable(String),
    /// An operation required a validated (compact + smooth) model.
    UnvalidatedModel(String),
    /// A scalar function was evaluated at a pole.
    Pole(String),
    /// The degree-0 part of an algebra element sits at a pole of the series
    /// being applied.
    PoleAtDegreeZero(String),
    /// A q-Pochhammer factor vanished within tolerance but not exactly.
    NearZeroFactor {
        index: usize,
        value: f64,
    },
    /// A Jackson sum failed the empirical decay test.
    NonDecay(String),
    /// The base q is too close to 1 for the requested evaluation.
    BaseTooCloseToOne(f64),
    /// The base q is outside the declared branch of a QParam.
    QParamRange {
        q: f64,
        branch: &'static str,
    },
    /// The requested series degree cannot meet the tail tolerance.
    IncreaseDegree {
        degree: u32,
        bound: f64,
    },
    /// Fiber dimension too large for the quadrature path.
    DimensionTooLarge(usize),
    /// q-Mellin evaluation outside the convergence strip.
    StripViolation(String),
    /// The operation requires the exact-rational backend.
    ExactBackendRequired(&'static str),
    /// The named series has no exact-rational expansion.
    ExactUnsupported(&'static str),
    /// Bad argument (nonpositive Q, z = 0, malformed class string, ...).
    InvalidArgument(String),
    /// Model file or CLI configuration problem.
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedRank(r) => write!(f, "unsupported rank {r}: only r <= 2"),
            Error::ZeroColumn(j) => write!(f, "column {j} of the moment matrix is zero"),
            Error::NotRankTwoNormalizable(why) => write!(f, "not rank-2 normalizable: {why}"),
            Error::UnvalidatedModel(why) => write!(f, "model failed validation: {why}"),
            Error::Pole(what) => write!(f, "pole: {what}"),
            Error::PoleAtDegreeZero(what) => write!(f, "pole at degree-0 part: {what}"),
            Error::NearZeroFactor { index, value } => write!(
                f,
                "q-Pochhammer factor {index} vanishes within tolerance but not exactly ({value:e})"
            ),
            Error::NonDecay(what) => write!(f, "Jackson sum does not decay: {what}"),
            Error::BaseTooCloseToOne(q) => {
                write!(f, "base q = {q} too close to 1 for reliable evaluation")
            }
            Error::QParamRange { q, branch } => {
                write!(f, "q = {q} outside the {branch} branch")
            }
            Error::IncreaseDegree { degree, bound } => write!(
                f,
                "series degree D = {degree} too small: estimated tail {bound:e}; increase D"
            ),
            Error::DimensionTooLarge(d) => {
                write!(f, "fiber dimension {d} > 2 not supported by quadrature")
            }
            Error::StripViolation(what) => write!(f, "outside the convergence strip: {what}"),
            Error::ExactBackendRequired(op) => {
                write!(f, "{op} requires the exact-rational backend")
            }
            Error::ExactUnsupported(what) => {
                write!(f, "{what} has no exact-rational expansion")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::Config(what) => write!(f, "configuration error: {what}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
