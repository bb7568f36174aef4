use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hilbert space needs at least one factor")]
    EmptySpace,

    #[error("Fock dimension {0} is too small, need at least 2")]
    FockDimension(usize),

    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("slot {slot} out of range for a space with {factors} factors")]
    SlotOutOfRange { slot: usize, factors: usize },

    #[error("operator of dimension {op_dim} cannot act on slot {slot} of dimension {slot_dim}")]
    SlotDimension {
        slot: usize,
        op_dim: usize,
        slot_dim: usize,
    },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel `{label}` is not a lowering eigenoperator at omega = {omega}: residual {residual:.3e}")]
    NotEigenoperator {
        label: String,
        omega: f64,
        residual: f64,
    },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("trace deviation {deviation:.3e} at t = {time} exceeds {tolerance:.1e} (step too coarse)")]
    TraceDrift {
        time: f64,
        deviation: f64,
        tolerance: f64,
    },

    #[error("top Fock level population {population:.3e} at t = {time} exceeds {threshold:.1e}")]
    FockLeakage {
        time: f64,
        population: f64,
        threshold: f64,
    },

    #[error("step-halving check failed: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    StepHalving { deviation: f64, tolerance: f64 },

    #[error("missing coefficient for multi-index {0}")]
    MissingCoefficient(String),

    #[error("order {requested} exceeds the supported maximum {limit}")]
    OrderTooLarge { requested: usize, limit: usize },

    #[error("no finite-difference stencil for total order {0} (supported: 1, 2)")]
    UnsupportedStencil(u32),

    #[error("Fock level {level} is not representable with fock_dim {fock_dim}")]
    FockOverflow { level: usize, fock_dim: usize },

    #[error("rate must be non-negative, got {0}")]
    NegativeRate(f64),
}
