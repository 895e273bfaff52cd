use thiserror::Error;

/// Every failure the library can report. Variants are grouped by the module
/// that raises them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p = {0} is not prime")]
    CompositeP(u32),
    #[error("unsupported field size p^n with p = {p}, n = {n}")]
    UnsupportedSize { p: u32, n: u32 },
    #[error("zero has no inverse or logarithm")]
    ZeroArgument,

    #[error("dimension mismatch: {0}")]
    AmbientMismatch(String),
    #[error("generator lists differ in length ({0} vs {1})")]
    GeneratorCountMismatch(usize, usize),

    #[error("J = S requires chi = chi^s")]
    InvalidJ,
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("vector is not U-invariant")]
    NotUInvariant,
    #[error("representation is zero")]
    ZeroRep,

    #[error("denominator vanishes mod p for r = {0}")]
    DenominatorVanishes(u32),
    #[error("epsilon lies outside the admissible index set")]
    EpsilonOutOfSigma,

    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("label is not an Iwahori orbit: {0}")]
    IwahoriOrbit(String),
    #[error("xi must be nonzero")]
    ZeroXi,

    #[error("precision exhausted")]
    PrecisionExhausted,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element does not lie in the stabilizer")]
    NotInStabilizer,
    #[error("matrix is singular")]
    Singular,

    #[error("restriction map is not injective")]
    NotInjectiveRestriction,
    #[error("restriction map is not an isomorphism")]
    NotIsoRestriction,
    #[error("class is not I1-invariant")]
    NotInvariantClass,
    #[error("window does not close: {0}")]
    NonClosing(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
}

pub type Result<T> = std::result::Result<T, Error>;
