use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{chunk_padded, OligoFrame, PipelineError};
use crate::base_codec::{quaternary_decode, quaternary_encode};
use crate::bits::{bits_to_symbols, symbols_to_bits, BitSeq};
use crate::block_codes::{FieldSpec, RsCode, RsSpec};
use crate::rng::{derive_seed, rng_from_seed};

/// Product code over GF(2^m). Data fills a grid of `inner_k - 1` rows by
/// `outer_k` columns; each row gains `outer_n - outer_k` outer parity
/// columns on the left, each column gets an index symbol on top and inner
/// parity at the bottom, and every column becomes one oligo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RsRsSpec {
    pub m: u32,
    pub outer_n: usize,
    pub outer_k: usize,
    pub inner_n: usize,
    pub inner_k: usize,
    /// Seed for the random stand-in data put in missing columns.
    pub filler_seed: u64,
}

impl Default for RsRsSpec {
    fn default() -> Self {
        Self { m: 6, outer_n: 12, outer_k: 10, inner_n: 50, inner_k: 42, filler_seed: 0 }
    }
}

impl RsRsSpec {
    /// Larger configuration: outer (36,30), same inner code.
    pub fn large() -> Self {
        Self { outer_n: 36, outer_k: 30, ..Self::default() }
    }

    pub fn rows(&self) -> usize {
        self.inner_k - 1
    }

    pub fn data_bits_per_block(&self) -> usize {
        self.rows() * self.outer_k * self.m as usize
    }

    pub fn coded_bits_per_block(&self) -> usize {
        self.outer_n * self.inner_n * self.m as usize
    }

    pub fn oligo_len_nt(&self) -> usize {
        self.inner_n * self.m as usize / 2
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.m.is_multiple_of(2) {
            return Err(PipelineError::Config("symbol width must be even to render whole bases".into()));
        }
        if self.outer_n > 1 << self.m {
            return Err(PipelineError::Config(format!(
                "{} columns do not fit a one-symbol index over GF(2^{})",
                self.outer_n, self.m
            )));
        }
        if self.inner_k < 2 {
            return Err(PipelineError::Config("inner code must carry the index and data".into()));
        }
        let field = FieldSpec::standard(self.m)?;
        RsSpec::new(field, self.outer_n, self.outer_k)?;
        RsSpec::new(field, self.inner_n, self.inner_k)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RsRsDecodeReport {
    pub reads: usize,
    pub unreadable: usize,
    pub inner_failures: usize,
    /// Columns replaced by random filler, summed over blocks.
    pub missing_columns: usize,
    pub corrected_symbols: usize,
}

#[derive(Debug, Clone)]
pub struct RsRsCodec {
    spec: RsRsSpec,
    outer: RsCode,
    inner: RsCode,
}

impl RsRsCodec {
    pub fn new(spec: RsRsSpec) -> Result<Self, PipelineError> {
        spec.validate()?;
        let field = FieldSpec::standard(spec.m)?;
        let outer = RsCode::new(RsSpec::new(field, spec.outer_n, spec.outer_k)?)?;
        let inner = RsCode::new(RsSpec::new(field, spec.inner_n, spec.inner_k)?)?;
        Ok(Self { spec, outer, inner })
    }

    pub fn spec(&self) -> &RsRsSpec {
        &self.spec
    }

    fn parity_cols(&self) -> usize {
        self.spec.outer_n - self.spec.outer_k
    }

    /// Grid column of outer codeword position `p` (message first, parity
    /// last); parity columns come first in the grid.
    fn column_of(&self, p: usize) -> usize {
        if p < self.spec.outer_k {
            p + self.parity_cols()
        } else {
            p - self.spec.outer_k
        }
    }

    pub fn encode_block(&self, data: &[u8]) -> Result<Vec<OligoFrame>, PipelineError> {
        let s = &self.spec;
        let m = s.m as usize;
        if data.len() != s.data_bits_per_block() {
            return Err(PipelineError::Config(format!("block needs {} bits", s.data_bits_per_block())));
        }
        let symbols = bits_to_symbols(data, m);
        let mut grid = vec![vec![0u16; s.rows()]; s.outer_n];
        for r in 0..s.rows() {
            let cw = self.outer.encode(&symbols[r * s.outer_k..(r + 1) * s.outer_k])?;
            for (p, &v) in cw.iter().enumerate() {
                grid[self.column_of(p)][r] = v;
            }
        }
        grid.into_iter()
            .enumerate()
            .map(|(c, col)| {
                let mut msg = vec![c as u16];
                msg.extend(col);
                let cw = self.inner.encode(&msg)?;
                let bits = symbols_to_bits(&cw, m);
                Ok(OligoFrame {
                    index_or_seed: c as u64,
                    payload: symbols_to_bits(&cw[1..s.inner_k], m),
                    parity: symbols_to_bits(&cw[s.inner_k..], m),
                    rendered: quaternary_encode(&bits)?,
                })
            })
            .collect()
    }

    /// Splits `data` into zero-padded blocks and encodes each.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<Vec<OligoFrame>>, PipelineError> {
        chunk_padded(data, self.spec.data_bits_per_block()).iter().map(|b| self.encode_block(b)).collect()
    }

    /// Decodes one block from unordered reads. Columns that are missing or
    /// fail inner decoding get random filler and are passed to the outer
    /// decoder as erasures.
    pub fn decode_block(
        &self,
        block: usize,
        reads: &[&str],
        report: &mut RsRsDecodeReport,
    ) -> Result<BitSeq, PipelineError> {
        let (bits, missing, failed_rows) = self.decode_block_lossy(block, reads, report)?;
        let max = self.spec.outer_n - self.spec.outer_k;
        if missing > max {
            return Err(PipelineError::TooManyMissing { block, missing, max });
        }
        if let Some(&row) = failed_rows.first() {
            return Err(PipelineError::OuterRowFailure { block, row });
        }
        Ok(bits)
    }

    /// Best-effort decode: rows the outer code cannot fix keep their received
    /// systematic symbols. Returns (bits, missing columns, failed rows).
    pub fn decode_block_lossy(
        &self,
        block: usize,
        reads: &[&str],
        report: &mut RsRsDecodeReport,
    ) -> Result<(BitSeq, usize, Vec<usize>), PipelineError> {
        let s = &self.spec;
        let m = s.m as usize;
        let mut cols: Vec<Option<Vec<u16>>> = vec![None; s.outer_n];
        for read in reads {
            report.reads += 1;
            let bits = match quaternary_decode(read) {
                Ok(b) if read.len() == s.oligo_len_nt() => b,
                _ => {
                    report.unreadable += 1;
                    continue;
                }
            };
            let dec = self.inner.decode(&bits_to_symbols(&bits, m), &[])?;
            if !dec.status.is_ok() {
                report.inner_failures += 1;
                continue;
            }
            report.corrected_symbols += dec.errors();
            let idx = dec.codeword[0] as usize;
            if idx < s.outer_n && cols[idx].is_none() {
                cols[idx] = Some(dec.codeword[1..s.inner_k].to_vec());
            }
        }
        let missing: Vec<usize> = (0..s.outer_n).filter(|&c| cols[c].is_none()).collect();
        report.missing_columns += missing.len();
        let mut rng = rng_from_seed(derive_seed(s.filler_seed, &[block as u64]));
        let q = 1u16 << m;
        let grid: Vec<Vec<u16>> = cols
            .into_iter()
            .map(|c| c.unwrap_or_else(|| (0..s.rows()).map(|_| rng.random_range(0..q)).collect()))
            .collect();
        let erasures: Vec<usize> = (0..s.outer_n).filter(|&p| missing.contains(&self.column_of(p))).collect();
        let mut out = Vec::with_capacity(s.rows() * s.outer_k);
        let mut failed = Vec::new();
        for r in 0..s.rows() {
            let recv: Vec<u16> = (0..s.outer_n).map(|p| grid[self.column_of(p)][r]).collect();
            let dec = self.outer.decode(&recv, &erasures)?;
            if dec.status.is_ok() {
                out.extend_from_slice(dec.message(s.outer_k));
            } else {
                failed.push(r);
                out.extend_from_slice(&recv[..s.outer_k]);
            }
        }
        Ok((symbols_to_bits(&out, m), missing.len(), failed))
    }

    pub fn decode(&self, blocks: &[Vec<&str>], data_bits: usize) -> Result<(BitSeq, RsRsDecodeReport), PipelineError> {
        let mut report = RsRsDecodeReport::default();
        let mut bits = Vec::with_capacity(blocks.len() * self.spec.data_bits_per_block());
        for (b, reads) in blocks.iter().enumerate() {
            bits.extend(self.decode_block(b, reads, &mut report)?);
        }
        bits.truncate(data_bits);
        Ok((bits, report))
    }
}
