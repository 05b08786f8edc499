//! End-to-end link: frame, shape, transmit, correct, unframe.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{frame_message, sequential_decode, unframe_message, DecodeReport, FecError, RedundancyScheme};
use crate::channel::NoiseModel;
use crate::constellation::{ConstellationKind, SymbolDistribution};
use crate::rng;
use crate::rtans::{decode_raw, decode_stream, encode_stream, AnsTables, INITIAL_STATE};

/// Node budget per received symbol when none is given.
pub const DEFAULT_BUDGET_PER_SYMBOL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub kind: ConstellationKind,
    pub p: f64,
    pub precision: u32,
    /// Noise variance per component; `0` bypasses the channel.
    pub noise: f64,
    pub scheme: RedundancyScheme,
    pub seed: u64,
    /// Expansions allowed; `None` means 64 per symbol.
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    /// `Σ |x|²` over the transmitted symbols.
    pub energy: f64,
    pub symbols: usize,
    /// Message bits delivered intact; zero unless the whole message is.
    pub bits: usize,
    pub ber_pre: f64,
    pub ber_post: f64,
    pub bits_per_energy: f64,
    pub nodes_expanded: usize,
    pub success: bool,
}

/// What the sender puts on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    /// Framed stream including the zero padding of the last read.
    pub framed: Vec<bool>,
    pub symbols: Vec<usize>,
    pub points: Vec<Complex64>,
    pub final_state: u32,
}

impl Transmission {
    pub fn energy(&self) -> f64 {
        self.points.iter().map(|x| x.norm_sqr()).sum()
    }
}

/// Frames `message` and shapes it with `tables`. The framed stream is
/// zero-padded so the sender stops exactly at a block boundary.
pub fn transmit(
    message: &[bool],
    dist: &SymbolDistribution,
    tables: &AnsTables,
    scheme: &RedundancyScheme,
) -> Result<Transmission, FecError> {
    let mut framed = frame_message(message, scheme);
    let out = encode_stream(&framed, &tables.encoding, INITIAL_STATE)?;
    framed.resize(out.consumed_bits, false);
    let constellation = dist.constellation().points();
    let points = out.symbols.iter().map(|&x| constellation[x]).collect();
    Ok(Transmission {
        framed,
        symbols: out.symbols,
        points,
        final_state: out.final_state,
    })
}

/// Per-symbol maximum a posteriori decisions, ignoring the code.
pub fn hard_decisions(received: &[Complex64], dist: &SymbolDistribution, model: &NoiseModel) -> Vec<usize> {
    let points = dist.constellation().points();
    received
        .iter()
        .map(|&y| {
            dist.probs()
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(x, &p)| (x, p.log2() + model.log2_density(y - points[x])))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(x, _)| x)
                .expect("distribution has positive mass")
        })
        .collect()
}

/// Fraction of `sent` bits not matched position by position; missing
/// positions count as errors.
fn bit_error_rate(sent: &[bool], got: &[bool]) -> f64 {
    if sent.is_empty() {
        return 0.0;
    }
    let errors = sent
        .iter()
        .enumerate()
        .filter(|&(i, &b)| got.get(i) != Some(&b))
        .count();
    errors as f64 / sent.len() as f64
}

/// Free-position bits of a possibly corrupt framed stream, for error
/// counting only.
fn free_bits(framed: &[bool], scheme: &RedundancyScheme) -> Vec<bool> {
    framed
        .iter()
        .enumerate()
        .filter(|&(i, _)| !scheme.is_constrained(i))
        .map(|(_, &b)| b)
        .collect()
}

/// Runs `message` through the whole link. Deterministic in `config.seed`.
pub fn simulate_pipeline(message: &[bool], config: &PipelineConfig) -> Result<PipelineSummary, FecError> {
    if !(config.noise >= 0.0 && config.noise.is_finite()) {
        return Err(crate::channel::ChannelError::InvalidNoise(config.noise).into());
    }
    let dist = SymbolDistribution::zero_signal_family(config.kind, config.p)?;
    let tables = AnsTables::for_distribution(&dist, config.precision)?;
    let sent = transmit(message, &dist, &tables, &config.scheme)?;
    let energy = sent.energy();
    let summary = |decoded: Option<Vec<bool>>, ber_pre: f64, nodes_expanded: usize| {
        let success = decoded.as_deref() == Some(message);
        let ber_post = decoded.as_deref().map_or(1.0, |d| bit_error_rate(message, d));
        let bits = if success { message.len() } else { 0 };
        PipelineSummary {
            energy,
            symbols: sent.symbols.len(),
            bits,
            ber_pre,
            ber_post,
            bits_per_energy: if energy > 0.0 { bits as f64 / energy } else { 0.0 },
            nodes_expanded,
            success,
        }
    };

    if config.noise == 0.0 {
        let framed = decode_stream(
            &sent.symbols,
            &tables.decoding,
            sent.final_state,
            sent.framed.len(),
            INITIAL_STATE,
        )?;
        let decoded = unframe_message(&framed, &config.scheme)?;
        return Ok(summary(Some(decoded), 0.0, 0));
    }

    let model = NoiseModel::new(config.noise)?;
    let mut received = sent.points.clone();
    model.add_noise(&mut rng::stream(config.seed, 1), &mut received);

    let hard = hard_decisions(&received, &dist, &model);
    let (raw, _) = decode_raw(&hard, &tables.decoding, sent.final_state)?;
    let ber_pre = bit_error_rate(message, &free_bits(&raw, &config.scheme));

    let budget = config
        .budget
        .unwrap_or(DEFAULT_BUDGET_PER_SYMBOL * received.len());
    let (decoded, report) = receive(
        &received,
        &tables,
        &dist,
        &model,
        &config.scheme,
        sent.final_state,
        sent.framed.len(),
        budget,
    )?;
    Ok(summary(decoded, ber_pre, report.nodes_expanded))
}

/// Corrects `received` (emission order) and unframes the result. The
/// message is `None` when the search gives up.
#[allow(clippy::too_many_arguments)]
pub fn receive(
    received: &[Complex64],
    tables: &AnsTables,
    dist: &SymbolDistribution,
    model: &NoiseModel,
    scheme: &RedundancyScheme,
    final_state: u32,
    framed_bits: usize,
    budget: usize,
) -> Result<(Option<Vec<bool>>, DecodeReport), FecError> {
    let reversed: Vec<Complex64> = received.iter().rev().copied().collect();
    let report = sequential_decode(
        &reversed,
        &tables.decoding,
        dist,
        model,
        scheme,
        final_state,
        framed_bits,
        budget,
    )?;
    let message = if report.success {
        Some(unframe_message(&report.bits, scheme)?)
    } else {
        None
    };
    Ok((message, report))
}
