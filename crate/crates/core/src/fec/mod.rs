//! Error correction on top of the shaping coder.
//!
//! Redundancy is added by forcing known zeros into the bitstream before it
//! is shaped. The receiver then searches the tree of symbol hypotheses,
//! best first, for a path whose emitted bits honour every forced zero and
//! which ends in the encoder's initial state.

mod pipeline;
mod search;

pub use pipeline::{
    hard_decisions, receive, simulate_pipeline, transmit, PipelineConfig, PipelineSummary, Transmission,
    DEFAULT_BUDGET_PER_SYMBOL,
};
pub use search::{
    admissible_symbols, sequential_decode, weight_delta, Admissible, CorrectionNode, DecodeReport,
};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::constellation::ConstellationError;
use crate::rtans::RtansError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FecError {
    #[error("redundancy period must be at least 2 with offset below it, got period {period} offset {offset}")]
    InvalidScheme { period: usize, offset: usize },
    #[error("nonzero bit at constrained position {0}")]
    ConstraintViolated(usize),
    #[error("{0} bits is not a valid constrained stream length")]
    InvalidLength(usize),
    #[error("framed stream carries no terminator")]
    MissingTerminator,
    #[error("invalid decoder input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Rtans(#[from] RtansError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
}

/// Which stream positions are forced to zero: `i % period == offset`.
/// `period = None` forces nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedundancyScheme {
    period: Option<usize>,
    offset: usize,
}

impl RedundancyScheme {
    pub fn new(period: usize, offset: usize) -> Result<Self, FecError> {
        if period < 2 || offset >= period {
            return Err(FecError::InvalidScheme { period, offset });
        }
        Ok(Self {
            period: Some(period),
            offset,
        })
    }

    /// Rate `(period-1)/period` with the zero in the last slot of every
    /// period, so rate 1/2 keeps the message on even positions.
    pub fn with_period(period: usize) -> Result<Self, FecError> {
        Self::new(period, period.saturating_sub(1))
    }

    pub fn rate_half() -> Self {
        Self {
            period: Some(2),
            offset: 1,
        }
    }

    pub fn unconstrained() -> Self {
        Self {
            period: None,
            offset: 0,
        }
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn rate(&self) -> f64 {
        match self.period {
            Some(p) => (p - 1) as f64 / p as f64,
            None => 1.0,
        }
    }

    #[inline]
    pub fn is_constrained(&self, position: usize) -> bool {
        matches!(self.period, Some(p) if position % p == self.offset)
    }

    /// Constrained positions in `start..end`.
    pub fn constrained_in(&self, start: usize, end: usize) -> usize {
        match self.period {
            None => 0,
            Some(p) => {
                // Count of i < x with i % p == offset.
                let below = |x: usize| x / p + usize::from(x % p > self.offset);
                below(end) - below(start)
            }
        }
    }

    /// Length of the constrained stream carrying `message_len` bits:
    /// `⌈message_len · period / (period − 1)⌉`.
    pub fn constrained_len(&self, message_len: usize) -> usize {
        match self.period {
            None => message_len,
            Some(p) => (message_len * p).div_ceil(p - 1),
        }
    }

    /// Inverse of [`constrained_len`](Self::constrained_len); the map is
    /// strictly increasing, so at most one message length fits.
    pub fn message_len(&self, constrained_len: usize) -> Option<usize> {
        let p = match self.period {
            None => return Some(constrained_len),
            Some(p) => p,
        };
        let guess = constrained_len * (p - 1) / p;
        (guess.saturating_sub(1)..=guess + 1).find(|&m| self.constrained_len(m) == constrained_len)
    }
}

/// Places the message on the free positions in order and zeros on the
/// constrained ones, padding with zeros up to
/// [`constrained_len`](RedundancyScheme::constrained_len).
pub fn insert_redundancy(message: &[bool], scheme: &RedundancyScheme) -> Vec<bool> {
    let len = scheme.constrained_len(message.len());
    let mut out = Vec::with_capacity(len);
    let mut next = message.iter();
    for i in 0..len {
        let bit = if scheme.is_constrained(i) {
            false
        } else {
            next.next().copied().unwrap_or(false)
        };
        out.push(bit);
    }
    debug_assert!(next.next().is_none());
    out
}

/// Inverse of [`insert_redundancy`]. Every constrained position and the
/// trailing filler must be zero.
pub fn remove_redundancy(constrained: &[bool], scheme: &RedundancyScheme) -> Result<Vec<bool>, FecError> {
    let message_len = scheme
        .message_len(constrained.len())
        .ok_or(FecError::InvalidLength(constrained.len()))?;
    let mut message = Vec::with_capacity(message_len);
    for (i, &bit) in constrained.iter().enumerate() {
        if scheme.is_constrained(i) || message.len() == message_len {
            if bit {
                return Err(FecError::ConstraintViolated(i));
            }
        } else {
            message.push(bit);
        }
    }
    Ok(message)
}

/// Constrained stream for `message` with a `1` terminator appended, so a
/// receiver can find the message end under any amount of zero padding.
pub fn frame_message(message: &[bool], scheme: &RedundancyScheme) -> Vec<bool> {
    let mut terminated = Vec::with_capacity(message.len() + 1);
    terminated.extend_from_slice(message);
    terminated.push(true);
    insert_redundancy(&terminated, scheme)
}

/// Inverse of [`frame_message`] on a stream that may carry extra zero
/// padding: checks every constrained position, drops trailing zeros and
/// the terminator.
pub fn unframe_message(framed: &[bool], scheme: &RedundancyScheme) -> Result<Vec<bool>, FecError> {
    let mut free = Vec::with_capacity(framed.len());
    for (i, &bit) in framed.iter().enumerate() {
        if scheme.is_constrained(i) {
            if bit {
                return Err(FecError::ConstraintViolated(i));
            }
        } else {
            free.push(bit);
        }
    }
    let end = free.iter().rposition(|&b| b).ok_or(FecError::MissingTerminator)?;
    free.truncate(end);
    Ok(free)
}
