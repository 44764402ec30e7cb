//! Error type shared by every module of the engine.

/// Errors surfaced by engine operations.
///
/// Internal invariant violations (mixing values from different contexts,
/// arithmetic on mismatched moduli) panic instead: they are programming errors,
/// not recoverable conditions.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("division by the zero function")]
    DivisionByZero,
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("`{0}` is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of supported range")]
    ModulusRange(u64),
    #[error("valuation of the zero function is undefined")]
    ZeroInput,
    #[error("cannot reduce: valuation is {0} < 0")]
    NegativeValuation(i64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Witt length {0} exceeds the supported maximum {1}")]
    WittLengthRange(usize, usize),
    #[error("form is not closed")]
    NotClosed,
    #[error("zero argument where a nonzero function is required")]
    ZeroArgument,
    #[error("operation requires modulus equal to the characteristic {p}, got {m}")]
    ModulusNotP { p: u64, m: u64 },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("specialization undefined: symbol is ramified at the valuation")]
    RamifiedInput,
    #[error("residue undefined on wild classes")]
    WildInput,
    #[error("operation requires the residue field to equal the constant field of the tower")]
    UnsupportedResidueField,
    #[error("term limit exceeded: {0} terms")]
    TermLimit(usize),
    #[error("internal iteration limit reached")]
    InternalLimit,
    #[error("operation requires characteristic {expected}, context has {got}")]
    WrongCharacteristic { expected: u64, got: u64 },
    #[error("a_1 must be nonzero for the coordinate change")]
    A1Zero,
    #[error("discriminant is zero: j-invariant undefined")]
    ZeroDiscriminant,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
