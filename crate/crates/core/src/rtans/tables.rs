//! Quantization, symbol spread, and the encoder / decoder tables.

use super::RtansError;
use crate::constellation::SymbolDistribution;

/// Supported precision range for `L = 2^R` states. Counts and states are
/// carried in 16-bit frame fields.
pub const MIN_PRECISION: u32 = 1;
pub const MAX_PRECISION: u32 = 15;

/// `⌊lg v⌋` for `v ≥ 1`, from the bit length.
pub(crate) fn floor_log2(v: u32) -> u32 {
    debug_assert!(v > 0);
    31 - v.leading_zeros()
}

/// Integer counts `L_x` summing to `L = 2^R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedDistribution {
    precision: u32,
    counts: Vec<u32>,
}

impl QuantizedDistribution {
    /// Largest-remainder quantization of `probs` with a floor of one count
    /// for every symbol of positive probability. Zero-probability symbols
    /// keep a zero count and never appear in the coder.
    pub fn from_probs(probs: &[f64], precision: u32) -> Result<Self, RtansError> {
        check_precision(precision)?;
        let l = 1u64 << precision;
        let active = probs.iter().filter(|&&p| p > 0.0).count();
        if active == 0 {
            return Err(RtansError::InvalidCounts("no symbol has positive probability".into()));
        }
        if active as u64 > l {
            return Err(RtansError::AlphabetTooLarge {
                symbols: active,
                states: l as u32,
            });
        }
        let targets: Vec<f64> = probs.iter().map(|p| p * l as f64).collect();
        let mut counts: Vec<u64> = probs
            .iter()
            .zip(&targets)
            .map(|(&p, &t)| if p > 0.0 { (t.floor() as u64).max(1) } else { 0 })
            .collect();
        let mut total: u64 = counts.iter().sum();
        // Each unit goes where it most reduces Σ|L_x - p_x L|; ties go to the
        // lower index.
        while total < l {
            let x = (0..counts.len())
                .filter(|&i| probs[i] > 0.0)
                .max_by(|&a, &b| {
                    let (ra, rb) = (targets[a] - counts[a] as f64, targets[b] - counts[b] as f64);
                    ra.total_cmp(&rb).then(b.cmp(&a))
                })
                .expect("active symbol");
            counts[x] += 1;
            total += 1;
        }
        while total > l {
            let x = (0..counts.len())
                .filter(|&i| counts[i] > 1)
                .max_by(|&a, &b| {
                    let (ea, eb) = (counts[a] as f64 - targets[a], counts[b] as f64 - targets[b]);
                    ea.total_cmp(&eb).then(b.cmp(&a))
                })
                .expect("a count above one exists while total exceeds L");
            counts[x] -= 1;
            total -= 1;
        }
        Ok(Self {
            precision,
            counts: counts.into_iter().map(|c| c as u32).collect(),
        })
    }

    pub fn quantize(dist: &SymbolDistribution, precision: u32) -> Result<Self, RtansError> {
        Self::from_probs(dist.probs(), precision)
    }

    /// Counts given directly; they must sum to `2^precision`.
    pub fn from_counts(counts: Vec<u32>, precision: u32) -> Result<Self, RtansError> {
        check_precision(precision)?;
        let l = 1u64 << precision;
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total != l {
            return Err(RtansError::InvalidCounts(format!(
                "counts sum to {total}, expected {l}"
            )));
        }
        Ok(Self { precision, counts })
    }

    /// `R`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `L = 2^R`.
    pub fn states(&self) -> u32 {
        1 << self.precision
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    /// `L_x / L` for every symbol.
    pub fn probabilities(&self) -> Vec<f64> {
        let l = self.states() as f64;
        self.counts.iter().map(|&c| c as f64 / l).collect()
    }
}

fn check_precision(precision: u32) -> Result<(), RtansError> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(RtansError::InvalidPrecision(precision))
    }
}

/// `symbol[S]` for every encoder state `S ∈ 0..L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadTable {
    symbols: Vec<usize>,
}

impl SpreadTable {
    /// Deterministic step spread: positions `0, step, 2·step, … (mod L)`
    /// receive symbol 0 `L_0` times, then symbol 1, and so on, with
    /// `step = 5L/8 + 3`. `L` is a power of two, so an even step (which
    /// happens for `L ∈ {2, 8}`) is bumped by one to stay coprime.
    pub fn step_spread(q: &QuantizedDistribution) -> Self {
        let l = q.states() as usize;
        let mut step = ((5 * l) >> 3) + 3;
        if step.is_multiple_of(2) {
            step += 1;
        }
        let mut symbols = vec![0; l];
        let mut pos = 0;
        for (x, &count) in q.counts().iter().enumerate() {
            for _ in 0..count {
                symbols[pos] = x;
                pos = (pos + step) % l;
            }
        }
        debug_assert_eq!(pos, 0);
        Self { symbols }
    }

    /// A hand-chosen spread. Symbol `x` must appear exactly `L_x` times.
    pub fn explicit(q: &QuantizedDistribution, symbols: Vec<usize>) -> Result<Self, RtansError> {
        if symbols.len() != q.states() as usize {
            return Err(RtansError::InvalidSpread(format!(
                "spread has {} entries, expected {}",
                symbols.len(),
                q.states()
            )));
        }
        let mut seen = vec![0u32; q.alphabet_len()];
        for &x in &symbols {
            *seen.get_mut(x).ok_or(RtansError::UnknownSymbol(x))? += 1;
        }
        if seen != q.counts() {
            return Err(RtansError::InvalidSpread(format!(
                "symbol occurrences {seen:?} differ from counts {:?}",
                q.counts()
            )));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn symbol(&self, state: usize) -> usize {
        self.symbols[state]
    }
}

/// Sender-side transition for one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingEntry {
    pub symbol: usize,
    pub nb_bits: u32,
    pub new_state: u32,
}

/// Sender automaton: in state `S` emit `symbol`, then move to
/// `new_state + readBits(nb_bits)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingTable {
    precision: u32,
    alphabet_len: usize,
    entries: Vec<EncodingEntry>,
}

impl EncodingTable {
    pub fn build(q: &QuantizedDistribution, spread: &SpreadTable) -> Self {
        let precision = q.precision();
        let l = q.states();
        let mut next: Vec<u32> = q.counts().to_vec();
        let entries = spread
            .symbols()
            .iter()
            .map(|&symbol| {
                let s = next[symbol];
                next[symbol] += 1;
                let nb_bits = precision - floor_log2(s);
                EncodingEntry {
                    symbol,
                    nb_bits,
                    new_state: (s << nb_bits) - l,
                }
            })
            .collect();
        Self {
            precision,
            alphabet_len: q.alphabet_len(),
            entries,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn states(&self) -> u32 {
        1 << self.precision
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    pub fn entries(&self) -> &[EncodingEntry] {
        &self.entries
    }

    pub fn entry(&self, state: u32) -> &EncodingEntry {
        &self.entries[state as usize]
    }

    /// CSV dump with header `S,symbol,nbBits,newS`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("S,symbol,nbBits,newS\n");
        for (s, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{s},{},{},{}\n", e.symbol, e.nb_bits, e.new_state));
        }
        out
    }
}

/// Receiver tables. States use the `s ∈ L..2L` convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingTables {
    precision: u32,
    counts: Vec<u32>,
    /// `k[x] = R - ⌊lg L_x⌋`.
    k: Vec<u32>,
    /// `nb[x] = (k[x] << r) - (L_x << k[x])`, `r = R + 1`.
    nb: Vec<i64>,
    /// `start[x] = -L_x + Σ_{i<x} L_i`.
    start: Vec<i64>,
    table: Vec<u32>,
}

impl DecodingTables {
    pub fn build(q: &QuantizedDistribution, spread: &SpreadTable) -> Self {
        let precision = q.precision();
        let r = precision + 1;
        let l = q.states();
        let counts = q.counts().to_vec();
        let mut k = Vec::with_capacity(counts.len());
        let mut nb = Vec::with_capacity(counts.len());
        let mut start = Vec::with_capacity(counts.len());
        let mut cumulative: i64 = 0;
        for &lx in &counts {
            let kx = if lx > 0 { precision - floor_log2(lx) } else { 0 };
            k.push(kx);
            nb.push(((kx as i64) << r) - ((lx as i64) << kx));
            start.push(cumulative - lx as i64);
            cumulative += lx as i64;
        }
        let mut next: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
        let mut table = vec![0u32; l as usize];
        for s in l..2 * l {
            let x = spread.symbol((s - l) as usize);
            table[(start[x] + next[x]) as usize] = s;
            next[x] += 1;
        }
        Self {
            precision,
            counts,
            k,
            nb,
            start,
            table,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `r = R + 1`.
    pub fn r(&self) -> u32 {
        self.precision + 1
    }

    pub fn states(&self) -> u32 {
        1 << self.precision
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    pub fn nb(&self) -> &[i64] {
        &self.nb
    }

    pub fn start(&self) -> &[i64] {
        &self.start
    }

    pub fn decoding_table(&self) -> &[u32] {
        &self.table
    }
}

/// Everything both ends need, built from one quantized distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsTables {
    pub quantized: QuantizedDistribution,
    pub spread: SpreadTable,
    pub encoding: EncodingTable,
    pub decoding: DecodingTables,
}

impl AnsTables {
    /// Tables with the deterministic step spread.
    pub fn new(quantized: QuantizedDistribution) -> Self {
        let spread = SpreadTable::step_spread(&quantized);
        Self::with_spread(quantized, spread)
    }

    pub fn with_spread(quantized: QuantizedDistribution, spread: SpreadTable) -> Self {
        let encoding = EncodingTable::build(&quantized, &spread);
        let decoding = DecodingTables::build(&quantized, &spread);
        Self {
            quantized,
            spread,
            encoding,
            decoding,
        }
    }

    /// Tables shaped for `dist`; see [`for_probs`](Self::for_probs).
    pub fn for_distribution(dist: &SymbolDistribution, precision: u32) -> Result<Self, RtansError> {
        Self::for_probs(dist.probs(), precision)
    }

    /// Step-spread tables whose long-run symbol frequencies track `probs`.
    ///
    /// The step spread favours some symbols slightly, by up to a few `1/L`,
    /// which matters where the entropy is steep in `p`. Starting from the
    /// largest-remainder counts, one count at a time moves from the most
    /// over-represented symbol to the most under-represented one while that
    /// lowers `max |f_x − p_x|` over the stationary frequencies `f`.
    pub fn for_probs(probs: &[f64], precision: u32) -> Result<Self, RtansError> {
        let mut best = Self::new(QuantizedDistribution::from_probs(probs, precision)?);
        if probs.iter().filter(|&&p| p > 0.0).count() < 2 {
            return Ok(best);
        }
        let mut best_freq = symbol_frequencies(&best);
        let mut best_score = frequency_mismatch(&best_freq, probs);
        for _ in 0..MAX_TUNING_MOVES {
            let mut improved = false;
            for (from, to) in tuning_moves(&best.quantized, &best_freq, probs) {
                let mut counts = best.quantized.counts().to_vec();
                counts[from] -= 1;
                counts[to] += 1;
                let candidate = Self::new(QuantizedDistribution::from_counts(counts, precision)?);
                let freq = symbol_frequencies(&candidate);
                let score = frequency_mismatch(&freq, probs);
                if score < best_score {
                    (best, best_freq, best_score) = (candidate, freq, score);
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        Ok(best)
    }
}

const MAX_TUNING_MOVES: usize = 16;

fn symbol_frequencies(tables: &AnsTables) -> Vec<f64> {
    super::stationary_distribution(&tables.encoding).symbol_frequencies(&tables.encoding)
}

fn frequency_mismatch(freq: &[f64], probs: &[f64]) -> f64 {
    freq.iter().zip(probs).map(|(f, p)| (f - p).abs()).fold(0.0, f64::max)
}

/// Candidate single-count moves, most promising first: the two most
/// over-represented donors crossed with the two most under-represented
/// receivers.
fn tuning_moves(q: &QuantizedDistribution, freq: &[f64], probs: &[f64]) -> Vec<(usize, usize)> {
    let mut by_excess: Vec<usize> = (0..probs.len()).filter(|&x| probs[x] > 0.0).collect();
    by_excess.sort_by(|&a, &b| (freq[b] - probs[b]).total_cmp(&(freq[a] - probs[a])));
    let donors = by_excess.iter().copied().filter(|&x| q.counts()[x] > 1).take(2);
    let receivers: Vec<usize> = by_excess.iter().rev().copied().take(2).collect();
    let mut moves = Vec::with_capacity(4);
    for from in donors {
        for &to in &receivers {
            if from != to {
                moves.push((from, to));
            }
        }
    }
    moves
}
