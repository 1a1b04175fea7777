//! Davey–MacKay watermark inner code.
//!
//! Outer q-ary symbols are mapped to sparse n-bit words, XORed onto a
//! pseudo-random watermark and sent over an insertion/deletion/substitution
//! channel. The decoder runs forward–backward over the drift (insertions
//! minus deletions) and returns per-symbol likelihoods.

mod hmm;

pub use hmm::{
    emission_prob, forward_backward, likelihoods_to_bit_llrs, symbol_likelihoods, transition_prob, DriftLattice,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{uint_to_bits, BitSeq};
use crate::rng::rng_from_seed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WatermarkError {
    #[error("invalid IDS parameters: {0}")]
    BadParams(String),
    #[error("invalid watermark spec: {0}")]
    BadSpec(String),
    #[error("symbol {symbol} outside alphabet of size {q}")]
    SymbolOutOfRange { symbol: usize, q: usize },
    #[error("sparse stream of {got} bits exceeds watermark length {len}")]
    TooLong { got: usize, len: usize },
    #[error("received substring has {got} bits, transition needs {expected}")]
    SubstringLength { expected: usize, got: usize },
    #[error("terminal drift {drift} outside [-{max}, {max}]")]
    DriftOverflow { drift: i64, max: usize },
}

/// Per-slot IDS channel probabilities. P_t = 1 - P_i - P_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdsParams {
    pub p_i: f64,
    pub p_d: f64,
    pub p_s: f64,
}

impl IdsParams {
    pub fn new(p_i: f64, p_d: f64, p_s: f64) -> Result<Self, WatermarkError> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !(ok(p_i) && ok(p_d) && ok(p_s)) || p_i + p_d > 1.0 + 1e-12 || p_i >= 1.0 {
            return Err(WatermarkError::BadParams(format!("P_i={p_i} P_d={p_d} P_s={p_s}")));
        }
        Ok(Self { p_i, p_d, p_s })
    }

    pub fn p_t(&self) -> f64 {
        (1.0 - self.p_i - self.p_d).max(0.0)
    }

    /// Effective flip probability seen through a sparse stream of density f.
    pub fn effective_flip(&self, f: f64) -> f64 {
        f * (1.0 - self.p_s) + (1.0 - f) * self.p_s
    }
}

/// Fixed minimal-weight sparse codebook: the q lowest-weight n-bit words,
/// ties broken by numeric value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub words: Vec<u32>,
}

impl Codebook {
    pub fn minimal_weight(q: usize, n: usize) -> Result<Self, WatermarkError> {
        if n == 0 || n > 24 || q == 0 || q > 1 << n {
            return Err(WatermarkError::BadSpec(format!("cannot fit q={q} words in n={n} bits")));
        }
        let mut all: Vec<u32> = (0..1u32 << n).collect();
        all.sort_by_key(|&w| (w.count_ones(), w));
        all.truncate(q);
        Ok(Self { n, words: all })
    }

    pub fn q(&self) -> usize {
        self.words.len()
    }

    pub fn density(&self) -> f64 {
        let ones: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        ones as f64 / (self.q() * self.n) as f64
    }

    pub fn word_bits(&self, symbol: usize) -> BitSeq {
        uint_to_bits(self.words[symbol] as u64, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermarkSpec {
    pub watermark: BitSeq,
    pub codebook: Codebook,
    /// Largest insertion run per slot.
    pub insertion_limit: usize,
    /// Drift clamp; `None` picks max(8, ceil(5 sqrt(N P_i))) at decode time.
    pub max_drift: Option<usize>,
}

impl WatermarkSpec {
    /// Watermark of `num_symbols * n` bits drawn from `seed`.
    pub fn new(num_symbols: usize, q: usize, n: usize, seed: u64) -> Result<Self, WatermarkError> {
        let codebook = Codebook::minimal_weight(q, n)?;
        let mut rng = rng_from_seed(seed);
        let watermark = (0..num_symbols * n).map(|_| rng.random_range(0..2u8)).collect();
        Ok(Self { watermark, codebook, insertion_limit: 2, max_drift: None })
    }

    pub fn n(&self) -> usize {
        self.codebook.n
    }

    pub fn q(&self) -> usize {
        self.codebook.q()
    }

    pub fn sparsity(&self) -> f64 {
        self.codebook.density()
    }

    pub fn num_symbols(&self) -> usize {
        self.watermark.len() / self.n()
    }

    pub fn resolved_max_drift(&self, p: &IdsParams) -> usize {
        let auto = || ((5.0 * (self.watermark.len() as f64 * p.p_i).sqrt()).ceil() as usize).max(8);
        self.max_drift.unwrap_or_else(auto).max(self.insertion_limit)
    }
}

pub fn sparsify(symbol: usize, spec: &WatermarkSpec) -> Result<BitSeq, WatermarkError> {
    if symbol >= spec.q() {
        return Err(WatermarkError::SymbolOutOfRange { symbol, q: spec.q() });
    }
    Ok(spec.codebook.word_bits(symbol))
}

pub fn sparsify_all(symbols: &[usize], spec: &WatermarkSpec) -> Result<BitSeq, WatermarkError> {
    let mut out = Vec::with_capacity(symbols.len() * spec.n());
    for &s in symbols {
        out.extend(sparsify(s, spec)?);
    }
    Ok(out)
}

pub fn wm_encode(sparse: &[u8], spec: &WatermarkSpec) -> Result<BitSeq, WatermarkError> {
    if sparse.len() > spec.watermark.len() {
        return Err(WatermarkError::TooLong { got: sparse.len(), len: spec.watermark.len() });
    }
    Ok(sparse.iter().zip(&spec.watermark).map(|(a, b)| (a ^ b) & 1).collect())
}
