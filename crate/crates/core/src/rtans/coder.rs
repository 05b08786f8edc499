//! Streaming encode (bits → symbols) and decode (symbols → bits).
//!
//! The sender walks the bitstream front to back; the receiver walks the
//! symbols back to front, starting from the sender's final state, and
//! prepends each emitted block. Bits inside one read or emitted block are
//! most-significant first.

use super::tables::{DecodingTables, EncodingTable};
use super::{Corruption, RtansError};

/// Encoder state every stream starts from (`S = 0`, i.e. `s = L`).
pub const INITIAL_STATE: u32 = 0;

/// Up to `R` bits, most-significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BitBlock {
    pub value: u32,
    pub len: u32,
}

impl BitBlock {
    /// Bit `i` counted from the most significant.
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.len);
        (self.value >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.bit(i))
    }
}

/// Result of [`encode_stream`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub symbols: Vec<usize>,
    /// Final encoder state `S ∈ 0..L`; the receiver starts from it.
    pub final_state: u32,
    /// Bits read including the zero padding of the last read.
    pub consumed_bits: usize,
}

impl EncodedStream {
    /// Zero bits appended to satisfy the last read.
    pub fn padding(&self, payload_bits: usize) -> usize {
        self.consumed_bits - payload_bits
    }
}

/// Runs the sender automaton from `initial_state` until every bit has been
/// read. A read that runs past the end is completed with zeros.
pub fn encode_stream(
    bits: &[bool],
    table: &EncodingTable,
    initial_state: u32,
) -> Result<EncodedStream, RtansError> {
    let l = table.states();
    if initial_state >= l {
        return Err(RtansError::StateOutOfRange {
            state: initial_state,
            states: l,
        });
    }
    let mut state = initial_state;
    let mut pos = 0;
    let mut symbols = Vec::new();
    if !bits.is_empty() && table.entries().iter().all(|e| e.nb_bits == 0) {
        return Err(RtansError::ZeroCapacity);
    }
    while pos < bits.len() {
        let entry = table.entry(state);
        symbols.push(entry.symbol);
        let mut read = 0u32;
        for _ in 0..entry.nb_bits {
            read = (read << 1) | bits.get(pos).copied().unwrap_or(false) as u32;
            pos += 1;
        }
        state = entry.new_state + read;
    }
    Ok(EncodedStream {
        symbols,
        final_state: state,
        consumed_bits: pos,
    })
}

/// One receiver step from state `s ∈ L..2L` on symbol `x`: the block of
/// low bits of `s` it releases and the preceding state.
pub fn decode_step(s: u32, x: usize, tables: &DecodingTables) -> Result<(u32, BitBlock), RtansError> {
    let l = tables.states();
    if !(l..2 * l).contains(&s) {
        return Err(RtansError::StateOutOfRange { state: s, states: l });
    }
    match tables.counts().get(x) {
        Some(&c) if c > 0 => {}
        _ => return Err(RtansError::UnknownSymbol(x)),
    }
    Ok(decode_step_unchecked(s, x, tables))
}

#[inline]
pub(crate) fn decode_step_unchecked(s: u32, x: usize, tables: &DecodingTables) -> (u32, BitBlock) {
    let nb_bits = ((s as i64 + tables.nb()[x]) >> tables.r()) as u32;
    let block = BitBlock {
        value: s & ((1u32 << nb_bits) - 1),
        len: nb_bits,
    };
    let index = tables.start()[x] + (s >> nb_bits) as i64;
    (tables.decoding_table()[index as usize], block)
}

/// Decodes `symbols` (in emission order) backwards from `final_state`
/// without any integrity check. Returns the reconstructed bits and the
/// encoder state (`S` convention) the walk ends in.
pub fn decode_raw(
    symbols: &[usize],
    tables: &DecodingTables,
    final_state: u32,
) -> Result<(Vec<bool>, u32), RtansError> {
    let l = tables.states();
    if final_state >= l {
        return Err(RtansError::StateOutOfRange {
            state: final_state,
            states: l,
        });
    }
    let mut s = final_state + l;
    let mut blocks = Vec::with_capacity(symbols.len());
    for &x in symbols.iter().rev() {
        let (prev, block) = decode_step(s, x, tables)?;
        blocks.push(block);
        s = prev;
    }
    let bits = blocks.iter().rev().flat_map(|b| b.bits()).collect();
    Ok((bits, s - l))
}

/// Inverse of [`encode_stream`]: recovers exactly `payload_bits` bits and
/// checks that the walk ends in `initial_state` and that only zero padding
/// (fewer than `R` bits) follows the payload.
pub fn decode_stream(
    symbols: &[usize],
    tables: &DecodingTables,
    final_state: u32,
    payload_bits: usize,
    initial_state: u32,
) -> Result<Vec<bool>, RtansError> {
    let (mut bits, end) = decode_raw(symbols, tables, final_state)?;
    if end != initial_state {
        return Err(RtansError::Corrupt(Corruption::StateMismatch {
            expected: initial_state,
            got: end,
        }));
    }
    let max_padding = tables.precision().saturating_sub(1) as usize;
    if bits.len() < payload_bits || bits.len() - payload_bits > max_padding {
        return Err(RtansError::Corrupt(Corruption::BitCount {
            expected: payload_bits,
            got: bits.len(),
        }));
    }
    if bits[payload_bits..].iter().any(|&b| b) {
        return Err(RtansError::Corrupt(Corruption::NonZeroPadding));
    }
    bits.truncate(payload_bits);
    Ok(bits)
}
