//! Word-to-sample conversion for digital tributaries.
//!
//! Each `B`-bit word `w` (MSB first, unsigned) becomes the offset-binary
//! midrise level `(2w + 1 - 2^B) / 2^B`, which lies strictly inside (-1, 1).
//! Decoding accepts samples within `2^-(B+1)` of a level and rejects
//! anything else as off-grid.

use std::fmt;
use std::str::FromStr;

use super::CodecError;
use crate::rate_plan::MAX_RESOLUTION;

/// A string of bits, most significant first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// Unpacks bytes, MSB of each byte first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Bits(bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| b >> i & 1 == 1)).collect())
    }

    /// Packs MSB first; a trailing partial byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &bit)| acc | (u8::from(bit) << (7 - i))))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Bits {
        Bits(self.0[range].to_vec())
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }
}

impl FromStr for Bits {
    type Err = CodecError;

    /// Parses `0`/`1` characters; whitespace and `_` are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CodecError::BadBitString(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn check_resolution(resolution: u32) -> Result<(), CodecError> {
    if resolution == 0 || resolution > MAX_RESOLUTION {
        return Err(CodecError::BadResolution(resolution));
    }
    Ok(())
}

/// Sample level of word `w` at resolution `B`.
pub fn word_level(word: u32, resolution: u32) -> f64 {
    let scale = (1u64 << resolution) as f64;
    (2.0 * word as f64 + 1.0) / scale - 1.0
}

/// Maps consecutive `B`-bit words to real samples.
pub fn quantize_words(bits: &Bits, resolution: u32) -> Result<Vec<f64>, CodecError> {
    check_resolution(resolution)?;
    let width = resolution as usize;
    if bits.len() % width != 0 {
        return Err(CodecError::BadLength { len: bits.len(), resolution });
    }
    Ok(bits
        .0
        .chunks(width)
        .map(|word| {
            let w = word.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
            word_level(w, resolution)
        })
        .collect())
}

/// Nearest-level decoding, the inverse of [`quantize_words`].
pub fn dequantize_samples(samples: &[f64], resolution: u32) -> Result<Bits, CodecError> {
    check_resolution(resolution)?;
    let scale = (1u64 << resolution) as f64;
    let guard = 0.5 / scale;
    let mut out = Vec::with_capacity(samples.len() * resolution as usize);
    for (index, &v) in samples.iter().enumerate() {
        let w = ((v * scale - 1.0 + scale) / 2.0).round();
        let off_grid = || CodecError::OffGrid { channel: None, index, value: v };
        if !(0.0..scale).contains(&w) {
            return Err(off_grid());
        }
        let w = w as u32;
        if !((v - word_level(w, resolution)).abs() <= guard) {
            return Err(off_grid());
        }
        out.extend((0..resolution).rev().map(|i| w >> i & 1 == 1));
    }
    Ok(Bits(out))
}
