use thiserror::Error;

/// Errors raised by parameter validation and contract checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus exponent n={0} outside supported range 1..=62")]
    ModulusExponentOutOfRange(u32),
    #[error("labels have different moduli: 2^{0} vs 2^{1}")]
    ModulusMismatch(u32, u32),
    #[error("value {value} is not reduced modulo 2^{n}")]
    ValueNotReduced { value: u64, n: u32 },
    #[error("bit count t={t} out of range for n={n}")]
    BitRangeOutOfBounds { t: u32, n: u32 },
    #[error("block {index} of width {width} does not fit in {n} bits")]
    BlockOutOfRange { index: u32, width: u32, n: u32 },
    #[error("group element x={x} is not reduced modulo 2^{n}")]
    GroupElementOutOfRange { x: u64, n: u32 },
    #[error("an oracle over D_2 cannot be restricted further")]
    CannotRestrict,
    #[error("kuperberg parameters require n = k^2 + 1, got n={n}, k={k}")]
    KuperbergShape { n: u32, k: u32 },
    #[error("regev parameters require n = 1 + k*l, got n={n}, k={k}, l={l}")]
    RegevShape { n: u32, k: u32, l: u32 },
    #[error("the kuperberg variant takes no block length l")]
    UnexpectedBlockLength,
    #[error("parameter {name} must be at least {min}, got {got}")]
    ParameterTooSmall {
        name: &'static str,
        min: u64,
        got: u64,
    },
    #[error("parameter {name} must be at most {max}, got {got}")]
    ParameterTooLarge {
        name: &'static str,
        max: u64,
        got: u64,
    },
    #[error("expected a batch of {expected} objects, got {got}")]
    BatchSize { expected: usize, got: usize },
    #[error("plan built for variant {expected}, got {got}")]
    VariantMismatch { expected: &'static str, got: &'static str },
    #[error("plan modulus 2^{plan} does not match oracle modulus 2^{oracle}")]
    PlanOracleMismatch { plan: u32, oracle: u32 },
    #[error("no reflection shares the identity coset: the oracle violates the hidden-reflection promise")]
    PromiseViolation,
}

pub type Result<T> = std::result::Result<T, Error>;
