//! End-to-end archive codecs: LT droplets with RS protection and constraint
//! screening, the RS-RS product code with column indices, and the watermark
//! inner code under an LDPC or polar outer code.

mod lt_rs;
mod rs_rs;
mod wm_concat;

pub use lt_rs::{LtRsCodec, LtRsDecodeReport, LtRsSpec};
pub use rs_rs::{RsRsCodec, RsRsDecodeReport, RsRsSpec};
pub use wm_concat::{post_watermark_ber, FrameDecode, OuterCode, WmConcatCodec, WmConcatSpec};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::base_codec::{CodecError, FastaRecord};
use crate::bits::{bits_to_bytes, bytes_to_bits, BitSeq};
use crate::block_codes::BlockCodeError;
use crate::fountain::LtError;
use crate::ldpc::LdpcError;
use crate::polar::PolarError;
use crate::watermark::WatermarkError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("constraint screening accepts only {accepted} of {tried} candidate oligos")]
    ConstraintsTooTight { accepted: usize, tried: usize },
    #[error("seed space of {bits} bits exhausted")]
    SeedsExhausted { bits: usize },
    #[error("block {block}: {missing} columns missing or unreadable, outer code fills at most {max}")]
    TooManyMissing { block: usize, missing: usize, max: usize },
    #[error("block {block}: outer decode failed in row {row}")]
    OuterRowFailure { block: usize, row: usize },
    #[error("frame {frame}: drift overflow ({0})", .source)]
    DriftOverflow { frame: usize, source: WatermarkError },
    #[error("frame {frame}: outer decoder did not converge")]
    OuterNotConverged { frame: usize },
    #[error("frame {frame} missing from the read set")]
    MissingFrame { frame: usize },
    #[error("fountain decode recovered {recovered} of {k} source symbols")]
    FountainStalled { recovered: usize, k: usize },
    #[error("decoded data does not match the manifest digest")]
    DigestMismatch,
    #[error("bad read: {0}")]
    BadRead(String),
    #[error(transparent)]
    Lt(#[from] LtError),
    #[error(transparent)]
    Block(#[from] BlockCodeError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Watermark(#[from] WatermarkError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl PipelineError {
    /// True for failures caused by channel noise rather than bad input.
    pub fn is_decode_failure(&self) -> bool {
        matches!(
            self,
            Self::TooManyMissing { .. }
                | Self::OuterRowFailure { .. }
                | Self::DriftOverflow { .. }
                | Self::OuterNotConverged { .. }
                | Self::MissingFrame { .. }
                | Self::FountainStalled { .. }
                | Self::DigestMismatch
        )
    }
}

/// One synthesized strand. `index_or_seed` is the LT seed, RS-RS column
/// index or watermark frame number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OligoFrame {
    pub index_or_seed: u64,
    pub payload: BitSeq,
    pub parity: BitSeq,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum PipelineSpec {
    LtRs(LtRsSpec),
    RsRs(RsRsSpec),
    LdpcWm(WmConcatSpec),
    PolarWm(WmConcatSpec),
}

impl PipelineSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LtRs(_) => "lt_rs",
            Self::RsRs(_) => "rs_rs",
            Self::LdpcWm(_) => "ldpc_wm",
            Self::PolarWm(_) => "polar_wm",
        }
    }

    /// Default configuration for a scheme name.
    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "lt_rs" => Self::LtRs(LtRsSpec::default()),
            "rs_rs" => Self::RsRs(RsRsSpec::default()),
            "ldpc_wm" => Self::LdpcWm(WmConcatSpec::ldpc_default()),
            "polar_wm" => Self::PolarWm(WmConcatSpec::polar_default()),
            _ => return None,
        })
    }

    pub fn oligo_len_nt(&self) -> usize {
        match self {
            Self::LtRs(s) => s.oligo_len_nt(),
            Self::RsRs(s) => s.oligo_len_nt(),
            Self::LdpcWm(s) | Self::PolarWm(s) => s.oligo_len_nt(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        match self {
            Self::LtRs(s) => s.validate(),
            Self::RsRs(s) => s.validate(),
            Self::LdpcWm(s) => match s.outer {
                OuterCode::Ldpc { .. } => s.validate(),
                _ => Err(PipelineError::Config("ldpc_wm needs an ldpc outer code".into())),
            },
            Self::PolarWm(s) => match s.outer {
                OuterCode::Polar { .. } => s.validate(),
                _ => Err(PipelineError::Config("polar_wm needs a polar outer code".into())),
            },
        }
    }
}

/// Everything besides the reads that is needed to decode an archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveManifest {
    pub schema_version: u32,
    pub pipeline: PipelineSpec,
    pub data_bytes: usize,
    pub sha256: String,
    pub oligos: usize,
    /// LT source symbols, RS-RS blocks or watermark frames.
    pub units: usize,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Encodes a byte string into FASTA records plus the manifest to decode them.
pub fn encode_archive(data: &[u8], spec: &PipelineSpec) -> Result<(Vec<FastaRecord>, ArchiveManifest), PipelineError> {
    spec.validate()?;
    let bits = bytes_to_bits(data);
    let (records, units): (Vec<FastaRecord>, usize) = match spec {
        PipelineSpec::LtRs(s) => {
            let codec = LtRsCodec::new(s.clone())?;
            let enc = codec.encode(&bits)?;
            let recs = enc
                .frames
                .into_iter()
                .map(|f| FastaRecord { header: format!("seed={}", f.index_or_seed), seq: f.rendered })
                .collect();
            (recs, enc.k)
        }
        PipelineSpec::RsRs(s) => {
            let codec = RsRsCodec::new(s.clone())?;
            let blocks = codec.encode(&bits)?;
            let units = blocks.len();
            let recs = blocks
                .into_iter()
                .enumerate()
                .flat_map(|(b, frames)| {
                    frames.into_iter().map(move |f| FastaRecord {
                        header: format!("block={b} col={}", f.index_or_seed),
                        seq: f.rendered,
                    })
                })
                .collect();
            (recs, units)
        }
        PipelineSpec::LdpcWm(s) | PipelineSpec::PolarWm(s) => {
            let codec = WmConcatCodec::new(s.clone())?;
            let frames = codec.encode(&bits)?;
            let units = frames.len();
            let recs = frames
                .into_iter()
                .map(|f| FastaRecord { header: format!("frame={}", f.index_or_seed), seq: f.rendered })
                .collect();
            (recs, units)
        }
    };
    let manifest = ArchiveManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        pipeline: spec.clone(),
        data_bytes: data.len(),
        sha256: sha256_hex(data),
        oligos: records.len(),
        units,
    };
    Ok((records, manifest))
}

fn header_field(header: &str, key: &str) -> Option<usize> {
    header.split_whitespace().find_map(|t| t.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

/// Inverse of [`encode_archive`]; the digest in the manifest is checked.
pub fn decode_archive(records: &[FastaRecord], manifest: &ArchiveManifest) -> Result<Vec<u8>, PipelineError> {
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(PipelineError::Config(format!("manifest schema {}", manifest.schema_version)));
    }
    manifest.pipeline.validate()?;
    let nbits = manifest.data_bytes * 8;
    let bits = match &manifest.pipeline {
        PipelineSpec::LtRs(s) => {
            let reads: Vec<&str> = records.iter().map(|r| r.seq.as_str()).collect();
            LtRsCodec::new(s.clone())?.decode(&reads, manifest.units, nbits)?.0
        }
        PipelineSpec::RsRs(s) => {
            let mut blocks: Vec<Vec<&str>> = vec![Vec::new(); manifest.units];
            for r in records {
                let b = header_field(&r.header, "block")
                    .ok_or_else(|| PipelineError::BadRead(format!("no block= in header {:?}", r.header)))?;
                blocks
                    .get_mut(b)
                    .ok_or_else(|| PipelineError::BadRead(format!("block {b} out of range")))?
                    .push(&r.seq);
            }
            RsRsCodec::new(s.clone())?.decode(&blocks, nbits)?.0
        }
        PipelineSpec::LdpcWm(s) | PipelineSpec::PolarWm(s) => {
            let codec = WmConcatCodec::new(s.clone())?;
            let mut frames: Vec<Option<&str>> = vec![None; manifest.units];
            for r in records {
                if let Some(slot) = header_field(&r.header, "frame").and_then(|f| frames.get_mut(f)) {
                    slot.get_or_insert(&r.seq);
                }
            }
            codec.decode(&frames, nbits)?
        }
    };
    let bytes = bits_to_bytes(&bits);
    if sha256_hex(&bytes) != manifest.sha256 {
        return Err(PipelineError::DigestMismatch);
    }
    Ok(bytes)
}

/// Pads `bits` with zeros to a multiple of `unit` and splits it.
pub(crate) fn chunk_padded(bits: &[u8], unit: usize) -> Vec<BitSeq> {
    let count = bits.len().div_ceil(unit).max(1);
    (0..count)
        .map(|i| {
            let mut c: BitSeq = bits[(i * unit).min(bits.len())..((i + 1) * unit).min(bits.len())].to_vec();
            c.resize(unit, 0);
            c
        })
        .collect()
}
