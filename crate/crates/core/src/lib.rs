//! Nonuniform probability modulation.
//!
//! Transmitting the zero-energy symbol more often than the others trades
//! throughput for bits per unit of transmit energy. This crate provides:
//!
//! - [`constellation`]: alphabets, zero-signal and Boltzmann distributions,
//!   noise-free entropy / energy / efficiency.
//! - [`channel`]: the complex AWGN channel, mutual information by
//!   quadrature, noisy efficiency and curve scans.
//! - [`rtans`]: a reversed tANS coder turning a bitstream into symbols with
//!   a chosen distribution, and back.
//! - [`fec`]: forced-zero redundancy, best-first sequential decoding and the
//!   end-to-end pipeline simulator.

pub mod bits;
pub mod channel;
pub mod constellation;
pub mod fec;
pub mod rng;
pub mod rtans;

pub use constellation::{Constellation, ConstellationKind, Efficiency, SymbolDistribution};
