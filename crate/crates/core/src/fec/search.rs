//! Best-first search over symbol hypotheses.
//!
//! The receiver walks the symbols in reverse emission order. Step `t`
//! releases the block of stream bits that ends where the previously
//! released blocks begin, so with `F` framed bits and `T` bits already
//! reconstructed the block covers positions `F-T-nb .. F-T`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{FecError, RedundancyScheme};
use crate::channel::NoiseModel;
use crate::constellation::SymbolDistribution;
use crate::rtans::{decode_step_unchecked, BitBlock, DecodingTables, INITIAL_STATE};

/// One symbol the receiver may assume at a given state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissible {
    pub symbol: usize,
    pub block: BitBlock,
    /// Preceding decoder state, in `L..2L`.
    pub next_state: u32,
    /// Forced-zero positions covered by the block.
    pub constrained_bits: usize,
}

#[inline]
fn block_respects(block: BitBlock, first: usize, scheme: &RedundancyScheme) -> bool {
    (0..block.len).all(|i| !(block.bit(i) && scheme.is_constrained(first + i as usize)))
}

fn push_admissible(
    s: u32,
    tables: &DecodingTables,
    end: usize,
    scheme: &RedundancyScheme,
    out: &mut Vec<Admissible>,
) {
    out.clear();
    for (x, &count) in tables.counts().iter().enumerate() {
        if count == 0 {
            continue;
        }
        let (next_state, block) = decode_step_unchecked(s, x, tables);
        let Some(first) = end.checked_sub(block.len as usize) else {
            continue;
        };
        if block_respects(block, first, scheme) {
            out.push(Admissible {
                symbol: x,
                block,
                next_state,
                constrained_bits: scheme.constrained_in(first, end),
            });
        }
    }
}

/// Symbols whose block, released from decoder state `s` and ending at
/// stream position `end`, fits before `end` and puts only zeros on
/// constrained positions.
pub fn admissible_symbols(
    s: u32,
    tables: &DecodingTables,
    end: usize,
    scheme: &RedundancyScheme,
) -> Result<Vec<Admissible>, FecError> {
    let l = tables.states();
    if !(l..2 * l).contains(&s) {
        return Err(FecError::InvalidInput(format!("decoder state {s} outside {l}..{}", 2 * l)));
    }
    let mut out = Vec::with_capacity(tables.alphabet_len());
    push_admissible(s, tables, end, scheme, &mut out);
    Ok(out)
}

/// Score increment for assuming symbol `x` when `y` was received:
/// `lg p_x + lg ρ_Z(y − x) + constrained_bits`.
pub fn weight_delta(
    x: usize,
    y: Complex64,
    dist: &SymbolDistribution,
    model: &NoiseModel,
    constrained_bits: usize,
) -> f64 {
    let point = dist.constellation().points()[x];
    dist.probs()[x].log2() + model.log2_density(y - point) + constrained_bits as f64
}

/// A node of the search tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionNode {
    /// Decoder state in `L..2L`.
    pub state: u32,
    /// Received symbols consumed.
    pub t: usize,
    /// Stream bits reconstructed.
    pub bits: usize,
    /// Cumulative score in bits.
    pub weight: f64,
    pub parent: Option<usize>,
    /// Symbol assumed on the edge from the parent and the block it released.
    pub symbol: Option<usize>,
    pub block: BitBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    /// The framed stream on success, empty otherwise.
    pub bits: Vec<bool>,
    pub success: bool,
    /// Score of the accepted path.
    pub weight: Option<f64>,
    pub nodes_expanded: usize,
    pub max_frontier: usize,
}

struct Entry {
    weight: f64,
    t: usize,
    seq: u64,
    node: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.t.cmp(&other.t))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

/// Recovers the framed stream from noisy symbols.
///
/// `received` is in decoder order (last emitted symbol first), `s_start`
/// is the sender's final state `S ∈ 0..L`, and `expected_bits` the framed
/// length `F`. Succeeds on the first leaf popped at depth `n` with all `F`
/// bits placed and the walk back at the initial state. Fails once
/// `node_budget` expansions have not produced such a leaf.
#[allow(clippy::too_many_arguments)]
pub fn sequential_decode(
    received: &[Complex64],
    tables: &DecodingTables,
    dist: &SymbolDistribution,
    model: &NoiseModel,
    scheme: &RedundancyScheme,
    s_start: u32,
    expected_bits: usize,
    node_budget: usize,
) -> Result<DecodeReport, FecError> {
    let l = tables.states();
    if dist.probs().len() != tables.alphabet_len() {
        return Err(FecError::InvalidInput(format!(
            "distribution over {} symbols, tables over {}",
            dist.probs().len(),
            tables.alphabet_len()
        )));
    }
    if s_start >= l {
        return Err(FecError::InvalidInput(format!("start state {s_start} outside 0..{l}")));
    }
    let n = received.len();
    if n == 0 {
        let success = expected_bits == 0 && s_start == INITIAL_STATE;
        return Ok(DecodeReport {
            bits: Vec::new(),
            success,
            weight: success.then_some(0.0),
            nodes_expanded: 0,
            max_frontier: 0,
        });
    }
    let r = tables.precision() as usize;
    let lg_p: Vec<f64> = dist.probs().iter().map(|p| p.log2()).collect();
    let points = dist.constellation().points();

    let mut nodes = vec![CorrectionNode {
        state: s_start + l,
        t: 0,
        bits: 0,
        weight: 0.0,
        parent: None,
        symbol: None,
        block: BitBlock::default(),
    }];
    let mut frontier = BinaryHeap::new();
    let mut seq = 0u64;
    frontier.push(Entry {
        weight: 0.0,
        t: 0,
        seq,
        node: 0,
    });
    let mut nodes_expanded = 0;
    let mut max_frontier = 1;
    let mut candidates = Vec::with_capacity(tables.alphabet_len());

    while let Some(entry) = frontier.pop() {
        let node = nodes[entry.node];
        if node.t == n {
            return Ok(DecodeReport {
                bits: reconstruct(&nodes, entry.node, expected_bits),
                success: true,
                weight: Some(node.weight),
                nodes_expanded,
                max_frontier,
            });
        }
        if nodes_expanded == node_budget {
            break;
        }
        nodes_expanded += 1;

        let y = received[node.t];
        let t = node.t + 1;
        push_admissible(node.state, tables, expected_bits - node.bits, scheme, &mut candidates);
        for c in &candidates {
            if lg_p[c.symbol] == f64::NEG_INFINITY {
                continue;
            }
            let bits = node.bits + c.block.len as usize;
            let remaining = expected_bits - bits;
            if remaining > (n - t) * r || (t == n && (remaining != 0 || c.next_state != l)) {
                continue;
            }
            let weight = node.weight
                + lg_p[c.symbol]
                + model.log2_density(y - points[c.symbol])
                + c.constrained_bits as f64;
            nodes.push(CorrectionNode {
                state: c.next_state,
                t,
                bits,
                weight,
                parent: Some(entry.node),
                symbol: Some(c.symbol),
                block: c.block,
            });
            seq += 1;
            frontier.push(Entry {
                weight,
                t,
                seq,
                node: nodes.len() - 1,
            });
        }
        max_frontier = max_frontier.max(frontier.len());
    }
    Ok(DecodeReport {
        bits: Vec::new(),
        success: false,
        weight: None,
        nodes_expanded,
        max_frontier,
    })
}

/// Blocks from leaf to root are in stream order.
fn reconstruct(nodes: &[CorrectionNode], leaf: usize, expected_bits: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(expected_bits);
    let mut cursor = Some(leaf);
    while let Some(i) = cursor {
        bits.extend(nodes[i].block.bits());
        cursor = nodes[i].parent;
    }
    debug_assert_eq!(bits.len(), expected_bits);
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{Constellation, ConstellationKind};
    use crate::rtans::{decode_step, AnsTables, QuantizedDistribution, SpreadTable};

    fn abaa() -> AnsTables {
        let q = QuantizedDistribution::from_counts(vec![3, 1], 2).unwrap();
        let spread = SpreadTable::explicit(&q, vec![0, 1, 0, 0]).unwrap();
        AnsTables::with_spread(q, spread)
    }

    #[test]
    fn abaa_admissibility_brute_force() {
        let t = abaa();
        let scheme = RedundancyScheme::rate_half();
        for end in 0..8 {
            for s in 4..8 {
                let got = admissible_symbols(s, &t.decoding, end, &scheme).unwrap();
                for x in 0..2 {
                    let (prev, block) = decode_step(s, x, &t.decoding).unwrap();
                    let bits: Vec<bool> = block.bits().collect();
                    let fits = bits.len() <= end;
                    let ok = fits
                        && bits
                            .iter()
                            .enumerate()
                            .all(|(i, &b)| !b || (end - bits.len() + i).is_multiple_of(2));
                    let entry = got.iter().find(|a| a.symbol == x);
                    assert_eq!(entry.is_some(), ok, "s={s} x={x} end={end}");
                    if let Some(a) = entry {
                        assert_eq!(a.next_state, prev);
                        let odd = (end - bits.len()..end).filter(|i| i % 2 == 1).count();
                        assert_eq!(a.constrained_bits, odd);
                    }
                }
            }
        }
    }

    #[test]
    fn odd_lsb_onto_constrained_slot_is_excluded() {
        let t = abaa();
        let scheme = RedundancyScheme::rate_half();
        // s = 7 on 'b' releases "11"; ending at 4 its last bit lands on 3.
        let got = admissible_symbols(7, &t.decoding, 4, &scheme).unwrap();
        assert!(got.iter().all(|a| a.symbol != 1));
        // s = 5 on 'a' releases nothing and is always admissible.
        let (_, block) = decode_step(5, 0, &t.decoding).unwrap();
        assert_eq!(block.len, 0);
        let got = admissible_symbols(5, &t.decoding, 3, &scheme).unwrap();
        let a = got.iter().find(|a| a.symbol == 0).unwrap();
        assert_eq!(a.constrained_bits, 0);
        assert!(admissible_symbols(3, &t.decoding, 3, &scheme).is_err());
    }

    #[test]
    fn weight_delta_examples() {
        let model = NoiseModel::new(0.1).unwrap();
        let dist = SymbolDistribution::zero_signal_family(ConstellationKind::Hexagonal, 0.9).unwrap();
        let x = dist.constellation().points()[3];
        let peak = dist.probs()[3].log2() + (1.0 / (2.0 * std::f64::consts::PI * 0.1)).log2();
        assert!((weight_delta(3, x, &dist, &model, 0) - peak).abs() < 1e-12);
        assert!((weight_delta(3, x, &dist, &model, 2) - peak - 2.0).abs() < 1e-12);

        // Midway between two outer points the likelihoods cancel.
        let binary = SymbolDistribution::new(Constellation::binary(), vec![0.7, 0.3]).unwrap();
        let y = Complex64::new(0.5, 0.2);
        let diff = weight_delta(0, y, &binary, &model, 1) - weight_delta(1, y, &binary, &model, 1);
        assert!((diff - (0.7f64 / 0.3).log2()).abs() < 1e-12);

        let y = Complex64::new(0.15, -0.1);
        let zero = weight_delta(0, y, &dist, &model, 0);
        for k in 1..7 {
            assert!(zero > weight_delta(k, y, &dist, &model, 0));
        }
    }
}
