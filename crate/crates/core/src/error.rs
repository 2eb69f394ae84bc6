use std::fmt;

/// Errors produced by the geometric and numerical operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Semi-axes violate a1_sq >= a2_sq > 0 or are not finite.
    InvalidFamily { a1_sq: f64, a2_sq: f64 },
    /// Conic parameter within the degeneracy tolerance of -a1² or -a2², or below -a1².
    DegenerateLambda { lambda: f64 },
    /// The operation needs distinct foci but the family is a circle family.
    CircleFamily,
    /// The operation needs an ellipse member.
    NotAnEllipse { lambda: f64 },
    /// Elliptic coordinates outside their admissible ranges.
    CoordsOutOfRange { lambda1: f64, lambda2: f64 },
    /// The two members straddle a degeneracy, so the scaling map would be imaginary.
    SignMismatch { lambda: f64, mu: f64 },
    /// Non-finite input coordinate.
    NonFinite,
    /// A symmetric matrix was expected.
    NotSymmetric,
    /// Matrix is zero or numerically singular.
    SingularMatrix,
    /// The line misses the open interior of the boundary.
    LineMissesBoundary { discriminant: f64 },
    /// The line is tangent to the boundary within tolerance.
    TangentLine,
    /// Chart resolution below the supported minimum.
    ResolutionTooSmall { resolution: usize },
    /// Invalid (k, n): need n odd >= 3, 1 <= k <= (n-1)/2, gcd(k, n) = 1.
    InvalidRotationTarget { k: u32, n: u32 },
    /// Same constraints for a polygon build.
    InvalidPolygonIndices { n: u32, k: u32 },
    /// The bisection bracket does not enclose the target rotation number.
    BracketFailure { c_lo: f64, c_hi: f64, target: f64 },
    /// Rotation-number samples spread beyond tolerance; the map is not a clean shift.
    ShiftSpreadExceeded { spread: f64 },
    /// The point lies inside (or on) the caustic: no tangent lines from it.
    PointInsideCaustic,
    /// The string is not longer than the caustic perimeter.
    StringTooShort { length: f64, perimeter: f64 },
    /// A bracketed root search failed to converge.
    RootFindFailure,
    /// Too few points for a conic fit.
    TooFewPoints { needed: usize, got: usize },
    /// Fit input is rank-deficient (e.g. collinear points).
    DegenerateFit,
    /// Fitted conic is not centered and axis-aligned within tolerance.
    NonCentralFit { misalignment: f64 },
    /// Grid sets of mismatched kind or cardinality.
    MismatchedSets,
    /// Two chords that should share a boundary point do not.
    ChordsNotChained { gap: f64 },
    /// Pencil spectrum is complex or defective: the pair is non-generic.
    NonGenericPencil { description: String },
    /// The two conics are not strictly nested real ellipses.
    NotNested,
    /// A Euclidean result was requested for an ideal (infinite) image.
    AtInfinity,
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidFamily { a1_sq, a2_sq } => {
                write!(f, "invalid family: need a1_sq >= a2_sq > 0, got ({a1_sq}, {a2_sq})")
            }
            Self::DegenerateLambda { lambda } => {
                write!(f, "degenerate conic parameter lambda = {lambda}")
            }
            Self::CircleFamily => write!(f, "circle family has no focus-based coordinates"),
            Self::NotAnEllipse { lambda } => {
                write!(f, "ellipse member required, lambda = {lambda} is not one")
            }
            Self::CoordsOutOfRange { lambda1, lambda2 } => {
                write!(f, "elliptic coordinates ({lambda1}, {lambda2}) out of range")
            }
            Self::SignMismatch { lambda, mu } => {
                write!(f, "lambda = {lambda} and mu = {mu} straddle a degeneracy")
            }
            Self::NonFinite => write!(f, "non-finite input"),
            Self::NotSymmetric => write!(f, "matrix is not symmetric"),
            Self::SingularMatrix => write!(f, "matrix is singular or zero"),
            Self::LineMissesBoundary { discriminant } => {
                write!(f, "line misses the boundary (discriminant {discriminant})")
            }
            Self::TangentLine => write!(f, "line is tangent to the boundary"),
            Self::ResolutionTooSmall { resolution } => {
                write!(f, "chart resolution {resolution} too small")
            }
            Self::InvalidRotationTarget { k, n } => {
                write!(f, "invalid rotation target {k}/{n}: need n odd, 1 <= k <= (n-1)/2, gcd(k,n)=1")
            }
            Self::InvalidPolygonIndices { n, k } => {
                write!(f, "invalid polygon indices n={n}, k={k}: need n odd, 1 <= k <= (n-1)/2, gcd(k,n)=1")
            }
            Self::BracketFailure { c_lo, c_hi, target } => {
                write!(f, "bisection bracket [{c_hi}, {c_lo}] does not enclose c = {target}")
            }
            Self::ShiftSpreadExceeded { spread } => {
                write!(f, "rotation-number sample spread {spread} exceeds tolerance")
            }
            Self::PointInsideCaustic => write!(f, "point lies inside the caustic"),
            Self::StringTooShort { length, perimeter } => {
                write!(f, "string length {length} does not exceed caustic perimeter {perimeter}")
            }
            Self::RootFindFailure => write!(f, "root search failed to converge"),
            Self::TooFewPoints { needed, got } => {
                write!(f, "too few points: need {needed}, got {got}")
            }
            Self::DegenerateFit => write!(f, "fit input is rank-deficient"),
            Self::NonCentralFit { misalignment } => {
                write!(f, "fitted conic not centered/axis-aligned (misalignment {misalignment})")
            }
            Self::MismatchedSets => write!(f, "grid sets have mismatched kind or cardinality"),
            Self::ChordsNotChained { gap } => {
                write!(f, "chords do not share a boundary point (gap {gap})")
            }
            Self::NonGenericPencil { description } => {
                write!(f, "non-generic pair: {description}")
            }
            Self::NotNested => write!(f, "conics are not strictly nested real ellipses"),
            Self::AtInfinity => write!(f, "image lies at infinity"),
        }
    }
}

impl std::error::Error for Error {}
