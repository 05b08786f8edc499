//! Self-describing container for an encoded symbol stream.
//!
//! ```text
//! magic        u8      0xA5
//! R            u8
//! alphabet     u8      number of symbols m
//! counts       m × u16 big-endian L_x
//! payload bits u32     big-endian, bits before tail padding
//! final state  u16     big-endian encoder state S_final
//! body         n × u8  symbol indices in emission order
//! ```

use super::coder::{decode_stream, encode_stream, INITIAL_STATE};
use super::tables::{AnsTables, QuantizedDistribution};
use super::RtansError;

pub const FRAME_MAGIC: u8 = 0xA5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub precision: u8,
    pub counts: Vec<u16>,
    pub payload_bits: u32,
    pub final_state: u16,
    pub symbols: Vec<u8>,
}

impl Frame {
    /// Encodes `bits` with `tables` from the standard initial state.
    pub fn encode(bits: &[bool], tables: &AnsTables) -> Result<Self, RtansError> {
        if tables.quantized.alphabet_len() > u8::MAX as usize {
            return Err(RtansError::Frame(format!(
                "alphabet of {} symbols does not fit the frame",
                tables.quantized.alphabet_len()
            )));
        }
        let payload_bits = u32::try_from(bits.len())
            .map_err(|_| RtansError::Frame("payload longer than 2^32 - 1 bits".into()))?;
        let out = encode_stream(bits, &tables.encoding, INITIAL_STATE)?;
        Ok(Self {
            precision: tables.quantized.precision() as u8,
            counts: tables.quantized.counts().iter().map(|&c| c as u16).collect(),
            payload_bits,
            final_state: out.final_state as u16,
            symbols: out.symbols.into_iter().map(|x| x as u8).collect(),
        })
    }

    pub fn quantized(&self) -> Result<QuantizedDistribution, RtansError> {
        QuantizedDistribution::from_counts(
            self.counts.iter().map(|&c| c as u32).collect(),
            self.precision as u32,
        )
    }

    /// Tables rebuilt from the header with the step spread.
    pub fn tables(&self) -> Result<AnsTables, RtansError> {
        Ok(AnsTables::new(self.quantized()?))
    }

    pub fn symbol_indices(&self) -> Vec<usize> {
        self.symbols.iter().map(|&x| x as usize).collect()
    }

    /// Recovers the payload, checking the stream's integrity.
    pub fn decode(&self) -> Result<Vec<bool>, RtansError> {
        let tables = self.tables()?;
        decode_stream(
            &self.symbol_indices(),
            &tables.decoding,
            self.final_state as u32,
            self.payload_bits as usize,
            INITIAL_STATE,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 + 2 * self.counts.len() + 6 + self.symbols.len());
        out.push(FRAME_MAGIC);
        out.push(self.precision);
        out.push(self.counts.len() as u8);
        for c in &self.counts {
            out.extend_from_slice(&c.to_be_bytes());
        }
        out.extend_from_slice(&self.payload_bits.to_be_bytes());
        out.extend_from_slice(&self.final_state.to_be_bytes());
        out.extend_from_slice(&self.symbols);
        out
    }

    /// Parses and validates a frame: counts must sum to `2^R`, the state
    /// must be below `L`, and every body symbol must have a nonzero count.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RtansError> {
        let truncated = || RtansError::Frame("truncated header".into());
        let (&magic, rest) = bytes.split_first().ok_or_else(truncated)?;
        if magic != FRAME_MAGIC {
            return Err(RtansError::Frame(format!("bad magic byte {magic:#04x}")));
        }
        let (&precision, rest) = rest.split_first().ok_or_else(truncated)?;
        let (&alphabet, rest) = rest.split_first().ok_or_else(truncated)?;
        let counts_len = 2 * alphabet as usize;
        if rest.len() < counts_len + 6 {
            return Err(truncated());
        }
        let (count_bytes, rest) = rest.split_at(counts_len);
        let counts: Vec<u16> = count_bytes
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        let payload_bits = u32::from_be_bytes([rest[0], rest[1], rest[2], rest[3]]);
        let final_state = u16::from_be_bytes([rest[4], rest[5]]);
        let symbols = rest[6..].to_vec();
        let frame = Self {
            precision,
            counts,
            payload_bits,
            final_state,
            symbols,
        };
        let q = frame.quantized()?;
        if final_state as u32 >= q.states() {
            return Err(RtansError::StateOutOfRange {
                state: final_state as u32,
                states: q.states(),
            });
        }
        if let Some(&x) = frame
            .symbols
            .iter()
            .find(|&&x| frame.counts.get(x as usize).is_none_or(|&c| c == 0))
        {
            return Err(RtansError::UnknownSymbol(x as usize));
        }
        Ok(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn tables() -> AnsTables {
        AnsTables::new(QuantizedDistribution::from_probs(&[0.8, 0.1, 0.1], 6).unwrap())
    }

    #[test]
    fn header_layout() {
        let frame = Frame {
            precision: 2,
            counts: vec![3, 1],
            payload_bits: 4,
            final_state: 2,
            symbols: vec![0, 0, 1, 1],
        };
        assert_eq!(
            frame.to_bytes(),
            vec![0xA5, 2, 2, 0, 3, 0, 1, 0, 0, 0, 4, 0, 2, 0, 0, 1, 1]
        );
        assert_eq!(Frame::from_bytes(&frame.to_bytes()).unwrap(), frame);
    }

    #[test]
    fn encode_decode() {
        let bits = rng::random_bits(&mut rng::seeded(4), 1001);
        let frame = Frame::encode(&bits, &tables()).unwrap();
        let parsed = Frame::from_bytes(&frame.to_bytes()).unwrap();
        assert_eq!(parsed.decode().unwrap(), bits);
    }

    #[test]
    fn rejects_malformed() {
        let good = Frame::encode(&[true, false, true], &tables()).unwrap().to_bytes();
        let mut bad = good.clone();
        bad[0] = 0x00;
        assert!(Frame::from_bytes(&bad).is_err());
        assert!(Frame::from_bytes(&good[..5]).is_err());
        assert!(Frame::from_bytes(&[]).is_err());
        let mut bad = good.clone();
        bad[4] ^= 1; // count of symbol 0
        assert!(Frame::from_bytes(&bad).is_err());
        let mut bad = good.clone();
        bad.push(7); // symbol outside the alphabet
        assert!(Frame::from_bytes(&bad).is_err());
    }
}
