use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{chunk_padded, OligoFrame, PipelineError};
use crate::base_codec::{quaternary_decode, quaternary_encode};
use crate::bits::{bits_to_uint, BitSeq};
use crate::channel::{split_total_error, transmit, ChannelLevel, ChannelSpec};
use crate::ldpc::{gallager_construct, gauss_generator, minsum_decode, GallagerSpec, LdpcError, MinSumConfig, ParityMatrix, SystematicEncoder};
use crate::polar::{self, construct, scl_decode, ConstructionMethod, DesignChannel, PolarSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::watermark::{
    likelihoods_to_bit_llrs, sparsify_all, symbol_likelihoods, wm_encode, IdsParams, WatermarkError, WatermarkSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterCode {
    Polar {
        n: usize,
        k: usize,
        /// BSC crossover the code is designed for; `None` measures the
        /// post-watermark bit error rate under the assumed channel.
        design_p: Option<f64>,
        list: usize,
    },
    /// Gallager code shortened to `k` information bits.
    Ldpc { n: usize, column_weight: usize, row_weight: usize, k: usize, seed: u64, max_iters: usize },
}

impl OuterCode {
    pub fn n(&self) -> usize {
        match *self {
            Self::Polar { n, .. } | Self::Ldpc { n, .. } => n,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Self::Polar { k, .. } | Self::Ldpc { k, .. } => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WmConcatSpec {
    pub outer: OuterCode,
    /// Outer codeword bits per watermark symbol (q = 2^symbol_bits).
    pub symbol_bits: usize,
    /// Sparse bits per symbol.
    pub sparse_bits: usize,
    pub watermark_seed: u64,
    pub insertion_limit: usize,
    pub max_drift: Option<usize>,
    /// Random bit interleaver between the outer code and the watermark.
    pub interleave_seed: Option<u64>,
    /// Channel parameters handed to the watermark decoder.
    pub assumed_channel: IdsParams,
}

impl WmConcatSpec {
    fn base(outer: OuterCode) -> Self {
        let (p_i, p_d, p_s) = split_total_error(0.005);
        Self {
            outer,
            symbol_bits: 4,
            sparse_bits: 5,
            watermark_seed: 7,
            insertion_limit: 2,
            max_drift: None,
            interleave_seed: None,
            assumed_channel: IdsParams { p_i, p_d, p_s },
        }
    }

    pub fn polar_default() -> Self {
        Self::base(OuterCode::Polar { n: 256, k: 128, design_p: None, list: 8 })
    }

    pub fn ldpc_default() -> Self {
        Self::base(OuterCode::Ldpc { n: 256, column_weight: 4, row_weight: 8, k: 128, seed: 1, max_iters: 30 })
    }

    pub fn watermark_bits(&self) -> usize {
        self.outer.n() / self.symbol_bits * self.sparse_bits
    }

    pub fn oligo_len_nt(&self) -> usize {
        self.watermark_bits() / 2
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        let n = self.outer.n();
        if self.symbol_bits == 0 || self.symbol_bits > self.sparse_bits || !n.is_multiple_of(self.symbol_bits) {
            return bad(format!("{n} outer bits cannot be split into {}-bit symbols of {} sparse bits", self.symbol_bits, self.sparse_bits));
        }
        if !self.watermark_bits().is_multiple_of(2) {
            return bad("watermark length must be even to render whole bases".into());
        }
        if self.insertion_limit == 0 {
            return bad("insertion limit must be at least 1".into());
        }
        IdsParams::new(self.assumed_channel.p_i, self.assumed_channel.p_d, self.assumed_channel.p_s)?;
        match self.outer {
            OuterCode::Polar { n, k, list, design_p } => {
                if !n.is_power_of_two() || k == 0 || k > n || list == 0 {
                    return bad(format!("polar({n},{k}) with list {list}"));
                }
                if design_p.is_some_and(|p| !(p > 0.0 && p < 0.5)) {
                    return bad("design_p must lie in (0, 0.5)".into());
                }
            }
            OuterCode::Ldpc { n, column_weight, row_weight, k, max_iters, .. } => {
                if k == 0 || k >= n || max_iters == 0 || column_weight < 2 || row_weight <= column_weight {
                    return bad(format!("LDPC n={n} k={k} J={column_weight} K={row_weight}"));
                }
            }
        }
        Ok(())
    }

    fn watermark(&self) -> Result<WatermarkSpec, PipelineError> {
        let mut w = WatermarkSpec::new(self.outer.n() / self.symbol_bits, 1 << self.symbol_bits, self.sparse_bits, self.watermark_seed)?;
        w.insertion_limit = self.insertion_limit;
        w.max_drift = self.max_drift;
        Ok(w)
    }
}

#[derive(Debug, Clone)]
enum Outer {
    Polar { spec: PolarSpec, list: usize },
    Ldpc { h: ParityMatrix, enc: SystematicEncoder, shortened: usize, max_iters: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDecode {
    pub info: BitSeq,
    /// False when the LDPC decoder stopped without a valid codeword.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct WmConcatCodec {
    spec: WmConcatSpec,
    watermark: WatermarkSpec,
    outer: Outer,
    perm: Option<Vec<usize>>,
}

/// Hard-decision bit error rate of the watermark decoder's LLRs over
/// `frames` random frames, floored at 1e-4 so it can seed a code design.
pub fn post_watermark_ber(spec: &WmConcatSpec, p: &IdsParams, frames: usize, seed: u64) -> Result<f64, PipelineError> {
    let w = spec.watermark()?;
    let channel = ChannelSpec {
        p_i: p.p_i,
        p_d: p.p_d,
        p_s: p.p_s,
        insertion_cap: Some(spec.insertion_limit),
        ..ChannelSpec::clean(ChannelLevel::Bit)
    };
    let mut rng = rng_from_seed(seed);
    let (mut errors, mut total) = (0usize, 0usize);
    for _ in 0..frames {
        let bits: BitSeq = (0..spec.outer.n()).map(|_| rng.random_range(0..2)).collect();
        let symbols = to_symbols(&bits, spec.symbol_bits);
        let tx = wm_encode(&sparsify_all(&symbols, &w)?, &w)?;
        let (rx, _) = transmit(&tx, &channel, &mut rng).map_err(|e| PipelineError::Config(e.to_string()))?;
        let rows = match symbol_likelihoods(&rx, &w, p) {
            Ok(r) => r,
            Err(WatermarkError::DriftOverflow { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let llrs = likelihoods_to_bit_llrs(&rows, spec.symbol_bits);
        errors += llrs.iter().zip(&bits).filter(|(l, &b)| (**l < 0.0) != (b == 1)).count();
        total += bits.len();
    }
    Ok((errors as f64 / total.max(1) as f64).clamp(1e-4, 0.499))
}

fn to_symbols(bits: &[u8], width: usize) -> Vec<usize> {
    bits.chunks(width).map(|c| bits_to_uint(c) as usize).collect()
}

impl WmConcatCodec {
    pub fn new(spec: WmConcatSpec) -> Result<Self, PipelineError> {
        spec.validate()?;
        let watermark = spec.watermark()?;
        let outer = match spec.outer {
            OuterCode::Polar { n, k, design_p, list } => {
                let p = match design_p {
                    Some(p) => p,
                    None => post_watermark_ber(&spec, &spec.assumed_channel, 200, derive_seed(spec.watermark_seed, &[0xde5]))?,
                };
                let pspec = construct(n, k, p, DesignChannel::Bsc, ConstructionMethod::Bhattacharyya)?;
                Outer::Polar { spec: pspec, list }
            }
            OuterCode::Ldpc { n, column_weight, row_weight, k, seed, max_iters } => {
                let h = gallager_construct(GallagerSpec { n, j: column_weight, k: row_weight, seed })?;
                let enc = match gauss_generator(&h) {
                    Ok(e) => e,
                    Err(LdpcError::RankDeficient { reduced, .. }) => gauss_generator(&reduced)?,
                    Err(e) => return Err(e.into()),
                };
                if enc.k() < k {
                    return Err(PipelineError::Config(format!("LDPC code has only {} information bits", enc.k())));
                }
                let shortened = enc.k() - k;
                Outer::Ldpc { h, enc, shortened, max_iters }
            }
        };
        let perm = spec.interleave_seed.map(|s| {
            let mut p: Vec<usize> = (0..spec.outer.n()).collect();
            p.shuffle(&mut rng_from_seed(s));
            p
        });
        Ok(Self { spec, watermark, outer, perm })
    }

    pub fn spec(&self) -> &WmConcatSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.outer.k()
    }

    /// Design crossover of the polar outer code, if any.
    pub fn polar_design_p(&self) -> Option<f64> {
        match &self.outer {
            Outer::Polar { spec, .. } => Some(spec.design_param),
            Outer::Ldpc { .. } => None,
        }
    }

    pub fn watermark_spec(&self) -> &WatermarkSpec {
        &self.watermark
    }

    pub fn outer_encode(&self, info: &[u8]) -> Result<BitSeq, PipelineError> {
        if info.len() != self.k() {
            return Err(PipelineError::Config(format!("frame needs {} bits, got {}", self.k(), info.len())));
        }
        Ok(match &self.outer {
            Outer::Polar { spec, .. } => polar::encode(info, spec)?,
            Outer::Ldpc { enc, shortened, .. } => {
                let mut u = vec![0u8; *shortened];
                u.extend_from_slice(info);
                enc.encode(&u)?
            }
        })
    }

    /// Outer encode, interleave, sparsify and add the watermark.
    pub fn encode_frame(&self, info: &[u8]) -> Result<BitSeq, PipelineError> {
        let mut c = self.outer_encode(info)?;
        if let Some(perm) = &self.perm {
            c = perm.iter().map(|&i| c[i]).collect();
        }
        let symbols = to_symbols(&c, self.spec.symbol_bits);
        Ok(wm_encode(&sparsify_all(&symbols, &self.watermark)?, &self.watermark)?)
    }

    pub fn decode_frame(&self, recv: &[u8], p: &IdsParams, frame: usize) -> Result<FrameDecode, PipelineError> {
        let rows = symbol_likelihoods(recv, &self.watermark, p).map_err(|e| match e {
            WatermarkError::DriftOverflow { .. } => PipelineError::DriftOverflow { frame, source: e },
            e => e.into(),
        })?;
        let mut llrs = likelihoods_to_bit_llrs(&rows, self.spec.symbol_bits);
        if let Some(perm) = &self.perm {
            let mut out = vec![0.0; llrs.len()];
            for (i, &src) in perm.iter().enumerate() {
                out[src] = llrs[i];
            }
            llrs = out;
        }
        Ok(match &self.outer {
            Outer::Polar { spec, list } => FrameDecode { info: scl_decode(&llrs, spec, *list)?.info, converged: true },
            Outer::Ldpc { h, enc, shortened, max_iters } => {
                for &pos in &enc.info_positions()[..*shortened] {
                    llrs[pos] = 50.0;
                }
                let out = minsum_decode(h, &llrs, MinSumConfig { max_iters: *max_iters, scaling: None })?;
                FrameDecode { info: enc.extract(&out.word)[*shortened..].to_vec(), converged: out.converged }
            }
        })
    }

    pub fn encode(&self, data: &[u8]) -> Result<Vec<OligoFrame>, PipelineError> {
        chunk_padded(data, self.k())
            .into_iter()
            .enumerate()
            .map(|(i, info)| {
                let tx = self.encode_frame(&info)?;
                Ok(OligoFrame { index_or_seed: i as u64, payload: info, parity: Vec::new(), rendered: quaternary_encode(&tx)? })
            })
            .collect()
    }

    /// `frames[i]` is the read for frame i, if one survived.
    pub fn decode(&self, frames: &[Option<&str>], data_bits: usize) -> Result<BitSeq, PipelineError> {
        let mut bits = Vec::with_capacity(frames.len() * self.k());
        for (i, read) in frames.iter().enumerate() {
            let read = read.ok_or(PipelineError::MissingFrame { frame: i })?;
            let recv = quaternary_decode(read)?;
            let out = self.decode_frame(&recv, &self.spec.assumed_channel, i)?;
            if !out.converged {
                return Err(PipelineError::OuterNotConverged { frame: i });
            }
            bits.extend(out.info);
        }
        bits.truncate(data_bits);
        Ok(bits)
    }
}
