//! Reversed tANS: a finite-state coder that turns a bitstream into a symbol
//! stream with a prescribed distribution, using the tANS decoder as the
//! sender and the tANS encoder as the receiver.
//!
//! Encoder-side states are `S ∈ 0..L`, decoder-side states `s = S + L`.

mod coder;
mod frame;
mod stationary;
mod tables;

pub use coder::{
    decode_raw, decode_step, decode_stream, encode_stream, BitBlock, EncodedStream, INITIAL_STATE,
};
pub(crate) use coder::decode_step_unchecked;
pub use frame::{Frame, FRAME_MAGIC};
pub use stationary::{stationary_distribution, StationaryDistribution};
pub use tables::{
    AnsTables, DecodingTables, EncodingEntry, EncodingTable, QuantizedDistribution, SpreadTable,
    MAX_PRECISION, MIN_PRECISION,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RtansError {
    #[error("precision R = {0} outside {MIN_PRECISION}..={MAX_PRECISION}")]
    InvalidPrecision(u32),
    #[error("{symbols} symbols of positive probability do not fit {states} states")]
    AlphabetTooLarge { symbols: usize, states: u32 },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("invalid spread: {0}")]
    InvalidSpread(String),
    #[error("state {state} outside the table of {states} states")]
    StateOutOfRange { state: u32, states: u32 },
    #[error("symbol {0} is not in the coder alphabet")]
    UnknownSymbol(usize),
    #[error("single-symbol alphabet cannot carry bits")]
    ZeroCapacity,
    #[error("corrupt stream: {0}")]
    Corrupt(#[from] Corruption),
    #[error("frame: {0}")]
    Frame(String),
}

/// Integrity failures found while decoding.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Corruption {
    #[error("decoding ended in state {got}, expected {expected}")]
    StateMismatch { expected: u32, got: u32 },
    #[error("decoded {got} bits for a {expected}-bit payload")]
    BitCount { expected: usize, got: usize },
    #[error("nonzero padding after the payload")]
    NonZeroPadding,
}
