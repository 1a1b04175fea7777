use std::collections::HashSet;

use rand::Rng;

use serde::{Deserialize, Serialize};

use super::{chunk_padded, OligoFrame, PipelineError};
use crate::base_codec::{constraints_check, quaternary_decode, quaternary_encode, ConstraintSpec};
use crate::bits::{bits_to_bytes, bytes_to_bits, BitSeq};
use crate::block_codes::{RsCode, RsSpec};
use crate::fountain::{Droplet, IncrementalPeeler, LtCode, LtSpec};
use crate::rng::{derive_seed, rng_from_seed};

/// Keystream XORed onto each payload so that structured data (long zero
/// runs, say) still yields screenable oligos.
fn whiten(payload: &mut [u8], seed: u64) {
    let mut rng = rng_from_seed(derive_seed(seed, &[0x5eed]));
    for b in payload {
        *b ^= rng.random_range(0..2u8);
    }
}

/// Droplet layout: seed, payload, then RS parity bytes over GF(256), all
/// rendered with the two-bits-per-base map. Defaults give 156 nt oligos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LtRsSpec {
    pub seed_bits: usize,
    pub payload_bits: usize,
    pub rs_parity_bytes: usize,
    /// ε: oligos emitted = ceil(K (1 + ε)).
    pub overhead: f64,
    pub rsd_c: f64,
    pub rsd_delta: f64,
    pub constraints: ConstraintSpec,
    /// Keep emitting valid droplets past the overhead target until the
    /// emitted set peels completely.
    pub ensure_decodable: bool,
    /// Seeds are drawn without repetition from a generator keyed by this.
    pub seed_stream: u64,
}

impl Default for LtRsSpec {
    fn default() -> Self {
        Self {
            seed_bits: 32,
            payload_bits: 248,
            rs_parity_bytes: 4,
            overhead: 0.4,
            rsd_c: 0.03,
            rsd_delta: 0.05,
            constraints: ConstraintSpec::default(),
            ensure_decodable: false,
            seed_stream: 1,
        }
    }
}

impl LtRsSpec {
    fn body_bytes(&self) -> usize {
        (self.seed_bits + self.payload_bits) / 8
    }

    pub fn oligo_len_nt(&self) -> usize {
        (self.body_bytes() + self.rs_parity_bytes) * 4
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.into()));
        if !(self.seed_bits + self.payload_bits).is_multiple_of(8) {
            return bad("seed_bits + payload_bits must be a whole number of bytes");
        }
        if self.seed_bits == 0 || self.seed_bits > 64 || self.payload_bits == 0 {
            return bad("need 1..=64 seed bits and a non-empty payload");
        }
        if self.rs_parity_bytes == 0 || !self.rs_parity_bytes.is_multiple_of(2) || self.body_bytes() + self.rs_parity_bytes > 255 {
            return bad("RS parity must be even, non-zero and fit a GF(256) codeword");
        }
        if !(self.overhead >= 0.0 && self.overhead.is_finite()) {
            return bad("overhead must be finite and non-negative");
        }
        self.constraints.validate()?;
        Ok(())
    }

    fn lt_spec(&self, k: usize) -> LtSpec {
        LtSpec { k, symbol_size: self.payload_bits, rsd_c: self.rsd_c, rsd_delta: self.rsd_delta, seed_width: self.seed_bits }
    }
}

#[derive(Debug, Clone)]
pub struct LtRsEncoded {
    pub frames: Vec<OligoFrame>,
    /// Source symbols K.
    pub k: usize,
    /// Candidate droplets generated, including screened-out ones.
    pub tried: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LtRsDecodeReport {
    pub reads: usize,
    pub wrong_length: usize,
    pub rs_failures: usize,
    pub unique_droplets: usize,
    pub recovered: usize,
}

#[derive(Debug, Clone)]
pub struct LtRsCodec {
    spec: LtRsSpec,
    rs: RsCode,
}

impl LtRsCodec {
    pub fn new(spec: LtRsSpec) -> Result<Self, PipelineError> {
        spec.validate()?;
        let n = spec.body_bytes() + spec.rs_parity_bytes;
        let rs = RsCode::new(RsSpec::standard(8, n, spec.body_bytes())?)?;
        Ok(Self { spec, rs })
    }

    pub fn spec(&self) -> &LtRsSpec {
        &self.spec
    }

    pub fn source_symbols(&self, data_bits: usize) -> usize {
        data_bits.div_ceil(self.spec.payload_bits).max(1)
    }

    fn render(&self, droplet: &Droplet) -> Result<OligoFrame, PipelineError> {
        let mut body = droplet.to_bits(self.spec.seed_bits)?;
        whiten(&mut body[self.spec.seed_bits..], droplet.seed);
        let msg: Vec<u16> = bits_to_bytes(&body).into_iter().map(u16::from).collect();
        let cw = self.rs.encode(&msg)?;
        let parity_bytes: Vec<u8> = cw[msg.len()..].iter().map(|&s| s as u8).collect();
        let parity = bytes_to_bits(&parity_bytes);
        let mut all = body;
        all.extend_from_slice(&parity);
        Ok(OligoFrame {
            index_or_seed: droplet.seed,
            payload: droplet.payload.clone(),
            parity,
            rendered: quaternary_encode(&all)?,
        })
    }

    /// Emits screened droplets for `data`, zero-padded to K payloads.
    pub fn encode(&self, data: &[u8]) -> Result<LtRsEncoded, PipelineError> {
        self.encode_with_stream(data, self.spec.seed_stream)
    }

    /// As [`encode`](Self::encode) with a different seed stream.
    pub fn encode_with_stream(&self, data: &[u8], stream: u64) -> Result<LtRsEncoded, PipelineError> {
        let src = chunk_padded(data, self.spec.payload_bits);
        let k = src.len();
        let lt = LtCode::new(self.spec.lt_spec(k))?;
        let target = (k as f64 * (1.0 + self.spec.overhead)).ceil() as usize;
        let space = 1u128 << self.spec.seed_bits;
        let mut seeds = rng_from_seed(stream);
        let mut used = HashSet::new();
        let mut peeler = IncrementalPeeler::new(k);
        let mut frames = Vec::with_capacity(target);
        let mut tried = 0usize;
        while frames.len() < target || (self.spec.ensure_decodable && !peeler.is_complete()) {
            if used.len() as u128 >= space {
                return Err(PipelineError::SeedsExhausted { bits: self.spec.seed_bits });
            }
            let seed = if self.spec.seed_bits == 64 { seeds.random() } else { seeds.random_range(0..space as u64) };
            if !used.insert(seed) {
                continue;
            }
            tried += 1;
            let frame = self.render(&lt.encode(&src, seed)?)?;
            if constraints_check(&frame.rendered, &self.spec.constraints).is_valid() {
                if self.spec.ensure_decodable {
                    peeler.add(&lt.neighbors(seed));
                }
                frames.push(frame);
            } else if tried >= 10_000 && frames.len() * 1000 < tried {
                return Err(PipelineError::ConstraintsTooTight { accepted: frames.len(), tried });
            }
        }
        Ok(LtRsEncoded { frames, k, tried })
    }

    /// Recovers droplets from reads, drops those RS cannot fix, and peels.
    /// Source symbols the peeler could not reach are `None`.
    pub fn decode_partial(&self, reads: &[&str], k: usize) -> Result<(Vec<Option<BitSeq>>, LtRsDecodeReport), PipelineError> {
        let lt_spec = self.spec.lt_spec(k);
        let lt = LtCode::new(lt_spec)?;
        let mut report = LtRsDecodeReport { reads: reads.len(), ..Default::default() };
        let mut seen = HashSet::new();
        let mut droplets = Vec::new();
        let nt = self.spec.oligo_len_nt();
        for read in reads {
            let bits = match quaternary_decode(read) {
                Ok(b) if read.len() == nt => b,
                _ => {
                    report.wrong_length += 1;
                    continue;
                }
            };
            let symbols: Vec<u16> = bits_to_bytes(&bits).into_iter().map(u16::from).collect();
            let dec = self.rs.decode(&symbols, &[])?;
            if !dec.status.is_ok() {
                report.rs_failures += 1;
                continue;
            }
            let body: Vec<u8> = dec.message(self.spec.body_bytes()).iter().map(|&s| s as u8).collect();
            let mut droplet = Droplet::from_bits(&bytes_to_bits(&body), &lt_spec)?;
            whiten(&mut droplet.payload, droplet.seed);
            if seen.insert(droplet.seed) {
                droplets.push(droplet);
            }
        }
        report.unique_droplets = droplets.len();
        let outcome = lt.decode(&droplets)?;
        report.recovered = outcome.recovered();
        Ok((outcome.symbols, report))
    }

    /// Returns the first `data_bits` bits of the recovered source.
    pub fn decode(&self, reads: &[&str], k: usize, data_bits: usize) -> Result<(BitSeq, LtRsDecodeReport), PipelineError> {
        let (symbols, report) = self.decode_partial(reads, k)?;
        if report.recovered < k {
            return Err(PipelineError::FountainStalled { recovered: report.recovered, k });
        }
        let mut bits: BitSeq = symbols.into_iter().flatten().flatten().collect();
        bits.truncate(data_bits);
        Ok((bits, report))
    }
}
