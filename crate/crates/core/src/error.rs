//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix operations, circuit construction, transpilation
/// and the experiment engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Register sizes above four qubits are rejected; everything in this
    /// crate is sized for dense desk-scale simulation.
    #[error("register of {qubits} qubits exceeds the supported maximum of {max}")]
    RegisterTooLarge { qubits: usize, max: usize },

    /// A qubit index is outside the register.
    #[error("qubit index {qubit} out of range for {qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, qubits: usize },

    /// The same qubit appears twice in one gate or target list.
    #[error("duplicate qubit index {qubit}")]
    DuplicateQubit { qubit: usize },

    /// An empty target list where at least one qubit is required.
    #[error("empty qubit target list")]
    EmptyTargets,

    /// A gate was applied with the wrong number of qubit arguments.
    #[error("{gate} expects {expected} qubit(s), got {actual}")]
    GateArity {
        gate: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A matrix expected to be unitary fails the check.
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// A Kraus set fails the completeness relation.
    #[error("Kraus set violates completeness (max deviation {deviation:.3e})")]
    KrausIncomplete { deviation: f64 },

    /// A two-qubit gate touches a pair that is not an edge of the device
    /// topology.
    #[error("qubits {a} and {b} are not coupled on the device topology")]
    NotCoupled { a: usize, b: usize },

    /// A circuit that must contain only native gates contains something else.
    #[error("gate {gate} is not in the native set")]
    NotNative { gate: String },

    /// An angle or probability parameter is outside its valid range.
    #[error("invalid parameter {name}={value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// An expectation value came out with a non-negligible imaginary part,
    /// which means the state was corrupted upstream.
    #[error("expectation value has imaginary part {imaginary:.3e}; state is not Hermitian")]
    NotReal { imaginary: f64 },

    /// A confusion matrix is singular and cannot be inverted.
    #[error("confusion matrix for qubit {qubit} is singular")]
    SingularConfusion { qubit: usize },

    /// A noise-channel insertion references a gate position that does not
    /// exist in the base circuit.
    #[error("noise insertion references gate index {position}, circuit has {gates} gates")]
    InsertionOutOfRange { position: usize, gates: usize },

    /// A probability distribution has negative mass or does not normalize.
    #[error("invalid probability distribution: {reason}")]
    BadDistribution { reason: String },

    /// A fit dataset is structurally unusable.
    #[error("invalid fit dataset: {reason}")]
    BadDataset { reason: String },

    /// Parameter bounds are inverted or non-finite.
    #[error("invalid bounds for {name}: [{lo}, {hi}]")]
    BadBounds { name: &'static str, lo: f64, hi: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
