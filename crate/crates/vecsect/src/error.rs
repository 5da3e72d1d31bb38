use crate::geometry::KernelGeometry;

/// Errors shared across the kernel, driver, dispatch and I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no kernel geometry with {vector_bits}-bit vectors of {lane_bits}-bit lanes")]
    InvalidGeometry { vector_bits: u16, lane_bits: u16 },

    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch {
        left: KernelGeometry,
        right: KernelGeometry,
    },

    #[error("{kind} rotation amount {amount} out of range (must be < {limit})")]
    RotationOutOfRange {
        kind: &'static str,
        amount: usize,
        limit: usize,
    },

    #[error("expected {expected} lanes, got {got}")]
    LaneCountMismatch { expected: usize, got: usize },

    #[error("memory operand window has {got} lanes, expected {expected}")]
    WindowLengthMismatch { expected: usize, got: usize },

    #[error("lane value {value:#x} does not fit in {lane_bits} bits")]
    LaneValueOutOfRange { value: u64, lane_bits: u16 },

    #[error("mask bits {bits:#x} exceed the {lane_count}-lane geometry")]
    MaskOutOfRange { bits: u32, lane_count: usize },

    #[error("{operation} is not supported for geometry {geometry}")]
    UnsupportedGeometry {
        operation: &'static str,
        geometry: KernelGeometry,
    },

    #[error("{what} is not supported on this machine")]
    UnsupportedCapability { what: String },

    #[error("invalid kernel policy {value:?} (expected native, emulated or scalar)")]
    InvalidPolicy { value: String },

    #[error("lane width mismatch: expected {expected}-bit lanes, got {got}-bit")]
    LaneWidthMismatch { expected: u16, got: u16 },

    #[error("values are not strictly increasing at index {index}")]
    NotStrictlyIncreasing { index: usize },

    #[error("workload needs {needed} distinct values but the universe holds only {universe}")]
    InfeasibleWorkload { needed: u128, universe: u128 },

    #[error("invalid workload spec: {reason}")]
    InvalidWorkload { reason: String },

    #[error("malformed run file at byte offset {offset}: {reason}")]
    MalformedRunFile { offset: u64, reason: String },

    #[error("benchmark workload produced no block iterations; increase run lengths")]
    EmptyBenchWorkload,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
