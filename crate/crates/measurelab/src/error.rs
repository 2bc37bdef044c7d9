use alloc::string::String;
use core::fmt;

/// Crate-wide error type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Two objects do not live on the same ambient model.
    ModelMismatch,
    /// Vector dimensions disagree.
    DimensionMismatch,
    /// A constructor argument violates a structural invariant.
    Invalid(&'static str),
    /// Numeric knob outside its documented range.
    BadParameter(&'static str),
    /// The input does not represent an L-infinity class on this space:
    /// it is not a.e. constant on the named atom.
    InvalidClass { atom: usize },
    /// Absolute continuity fails; `witness` names a null set with nonzero mass.
    NotAbsolutelyContinuous { witness: String },
    /// Average over a null cell requested.
    UndefinedAverage,
    /// A probed point lies outside the support of the measure.
    OutsideSupport,
    /// The zero measure admits no disintegration.
    ZeroMeasure,
    /// Operation not defined for this representation.
    Unsupported(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ModelMismatch => write!(f, "objects live on different ambient models"),
            Error::DimensionMismatch => write!(f, "vector dimensions disagree"),
            Error::Invalid(what) => write!(f, "invalid construction: {what}"),
            Error::BadParameter(what) => write!(f, "parameter out of range: {what}"),
            Error::InvalidClass { atom } => {
                write!(f, "input is not a.e. constant on atom {atom}")
            }
            Error::NotAbsolutelyContinuous { witness } => {
                write!(
                    f,
                    "not absolutely continuous: nonzero mass on null set {witness}"
                )
            }
            Error::UndefinedAverage => write!(f, "average over a null cell is undefined"),
            Error::OutsideSupport => write!(f, "point lies outside the support of the measure"),
            Error::ZeroMeasure => write!(f, "the zero measure is not allowed here"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
