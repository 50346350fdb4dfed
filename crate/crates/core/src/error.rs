use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("group spec has no factors")]
    EmptySpec,
    #[error("factor order {0} is smaller than 2")]
    FactorTooSmall(u64),
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCapExceeded { order: u64, cap: usize },
    #[error("element index {index} is out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("coordinates {0:?} do not match the group factors")]
    BadCoordinates(Vec<u64>),
    #[error("subgroup lattice requested for order {order}, cap is {cap}")]
    LatticeCapExceeded { order: usize, cap: usize },
    #[error("sequence length {len} exceeds the configured cap {cap}")]
    LengthCapExceeded { len: usize, cap: usize },
    #[error("set is not closed under addition")]
    NotASubgroup,
    #[error("subgroup belongs to a group of order {found}, expected {expected}")]
    NotSubgroupOfG { expected: usize, found: usize },
    #[error("operation requires a nonempty set")]
    EmptySet,
    #[error("sumset multiplier must be at least 1")]
    NonPositiveL,
    #[error("operation requires at least {needed} elements, got {got}")]
    SetTooSmall { needed: usize, got: usize },
    #[error("epsilon {0} is outside the allowed range")]
    EpsilonOutOfRange(f64),
    #[error("delta {0} is outside (0, 1/2]")]
    DeltaOutOfRange(f64),
    #[error("target {index} has no representation disjoint from earlier choices")]
    NoDisjointRepresentation { index: usize },
    #[error("set is complete, an incomplete set is required")]
    NotIncomplete,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parameter {value} is below the minimum {min}")]
    PTooSmall { value: u64, min: u64 },
    #[error("parameter {value} exceeds the maximum {max}")]
    PTooLarge { value: u64, max: u64 },
    #[error("primes must satisfy p < q, got p={p}, q={q}")]
    PrimesOutOfOrder { p: u64, q: u64 },
    #[error("group order {0} is not composite")]
    NotComposite(usize),
    #[error("instance exceeds verifier cap: {0}")]
    CapExceeded(String),
    #[error("spread lemma precondition violated: a maximal subgroup holds fraction {fraction} >= {limit}")]
    PreconditionViolated { fraction: f64, limit: f64 },
    #[error("no accepted sample after {attempts} attempts")]
    AttemptsExhausted {
        attempts: u32,
        best_max_fraction: Option<f64>,
        size_window_hits: u32,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("items belong to a group of order {found}, expected {expected}")]
    GroupMismatch { expected: usize, found: usize },
}
