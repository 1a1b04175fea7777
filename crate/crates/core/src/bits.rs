//! Bit-level helpers shared by every codec.
//!
//! A [`BitSeq`] holds one bit per byte (values 0 or 1). Packed forms are only
//! used at file boundaries.

pub type BitSeq = Vec<u8>;

/// Unpacks bytes MSB-first.
pub fn bytes_to_bits(bytes: &[u8]) -> BitSeq {
    let mut out = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for i in (0..8).rev() {
            out.push((b >> i) & 1);
        }
    }
    out
}

/// Packs bits MSB-first; a trailing partial byte is zero-padded.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))
        })
        .collect()
}

pub fn uint_to_bits(value: u64, width: usize) -> BitSeq {
    (0..width).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

pub fn bits_to_uint(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Splits a bit string into `width`-bit symbols, MSB-first. The final symbol is
/// zero-padded on the right when the length is not a multiple of `width`.
pub fn bits_to_symbols(bits: &[u8], width: usize) -> Vec<u16> {
    bits.chunks(width)
        .map(|c| {
            let mut v = bits_to_uint(c) as u16;
            v <<= width - c.len();
            v
        })
        .collect()
}

pub fn symbols_to_bits(symbols: &[u16], width: usize) -> BitSeq {
    symbols
        .iter()
        .flat_map(|&s| uint_to_bits(u64::from(s), width))
        .collect()
}

pub fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// Parses strings like `"1010 011"`; whitespace is ignored.
pub fn parse_bits(s: &str) -> Option<BitSeq> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

pub fn format_bits(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}
