//! Experiment definitions: what one Monte Carlo trial does for each setup.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::base_codec::{base_index, pair_to_base, quaternary_decode, quaternary_encode};
use crate::bits::{hamming_distance, BitSeq};
use crate::channel::{
    preset_illumina, preset_nanopore, quaternary_bit_error_rate, soft_demap, split_total_error, transmit,
    ChannelLevel, ChannelSpec, SubstitutionModel,
};
use crate::fountain::{IncrementalPeeler, LtCode, LtSpec};
use crate::pipelines::{LtRsCodec, LtRsSpec, PipelineError, RsRsCodec, RsRsDecodeReport, RsRsSpec, WmConcatCodec, WmConcatSpec};
use crate::polar::{self, construct, construct_from_channel, genie_scores, scl_decode, ConstructionMethod, DesignChannel, PolarSpec};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::watermark::IdsParams;

/// Fraction of the total error that is substitution in the oligo-level
/// experiments; the remainder is whole-oligo loss.
pub const OLIGO_SUB_SHARE: f64 = 0.57;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Nanopore,
    Illumina,
}

impl Preset {
    pub fn matrix(self, param: f64) -> Result<[[f64; 4]; 4], HarnessError> {
        Ok(match self {
            Self::Nanopore => preset_nanopore(param)?,
            Self::Illumina => preset_illumina(param)?,
        })
    }
}

/// How the polar frozen set is chosen for a substitution preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PolarConstruction {
    /// Bhattacharyya recursion on a BSC with the preset's mean bit error rate.
    #[default]
    Bhattacharyya,
    /// Genie-aided simulation through the preset itself, which sees that
    /// the two bits of a base are not equally reliable.
    Genie { samples: usize, seed: u64 },
}

/// How received bases become decoder input for the polar experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demap {
    /// Base j carries code bits (2j, 2j+1); each bit gets its own LLR.
    #[default]
    Bicm,
    /// Base j carries (c_j, c_{j+N/2}). The first butterfly stage is
    /// resolved from the exact base likelihoods, so the two bits of a base
    /// are never treated as independent.
    Multilevel,
}

/// The setup being simulated. Each variant carries the value of its sweep
/// variable; [`Experiment::with_value`] overrides it per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// LT decoding from ceil(K(1+epsilon)) erasure-free droplets.
    LtErasure {
        k: usize,
        #[serde(default = "default_c")]
        rsd_c: f64,
        #[serde(default = "default_delta")]
        rsd_delta: f64,
        #[serde(default)]
        epsilon: f64,
    },
    /// LT-RS archive; total error split into base substitution and oligo loss.
    LtRs {
        #[serde(default)]
        spec: LtRsSpec,
        data_bits: usize,
        #[serde(default)]
        p_total: f64,
    },
    /// RS-RS archive under the same substitution/loss mix.
    RsRs {
        #[serde(default)]
        spec: RsRsSpec,
        data_bits: usize,
        #[serde(default)]
        p_total: f64,
    },
    /// Polar code over a quaternary substitution preset with soft demapping.
    PolarSubstitution {
        n: usize,
        k: usize,
        preset: Preset,
        #[serde(default)]
        param: f64,
        #[serde(default = "one")]
        list: usize,
        #[serde(default)]
        construction: PolarConstruction,
        #[serde(default)]
        demap: Demap,
    },
    /// One watermark-concatenated frame over the capped IDS channel.
    WmConcat {
        spec: WmConcatSpec,
        #[serde(default)]
        p_total: f64,
        /// Frames used to calibrate the polar design point at each P.
        #[serde(default = "default_calibration")]
        calibration_frames: usize,
    },
    /// Random bits mapped to bases, sent through a preset, demapped hard.
    UncodedQuaternary {
        bits: usize,
        preset: Preset,
        #[serde(default)]
        param: f64,
    },
    /// Frame error with probability p; audits the estimator itself.
    Bernoulli {
        #[serde(default)]
        p: f64,
    },
}

fn default_c() -> f64 {
    0.03
}
fn default_delta() -> f64 {
    0.05
}
fn one() -> usize {
    1
}
fn default_calibration() -> usize {
    200
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LtErasure { .. } => "lt_erasure",
            Self::LtRs { .. } => "lt_rs",
            Self::RsRs { .. } => "rs_rs",
            Self::PolarSubstitution { .. } => "polar_substitution",
            Self::WmConcat { spec, .. } => match spec.outer {
                crate::pipelines::OuterCode::Polar { .. } => "polar_wm",
                crate::pipelines::OuterCode::Ldpc { .. } => "ldpc_wm",
            },
            Self::UncodedQuaternary { .. } => "uncoded_quaternary",
            Self::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn sweep_names(&self) -> &'static [&'static str] {
        match self {
            Self::LtErasure { .. } => &["epsilon", "k"],
            Self::LtRs { .. } | Self::RsRs { .. } | Self::WmConcat { .. } => &["p_total"],
            Self::PolarSubstitution { .. } => &["param", "n"],
            Self::UncodedQuaternary { .. } => &["param"],
            Self::Bernoulli { .. } => &["p"],
        }
    }

    /// Copy with the sweep variable `name` set to `v`.
    pub fn with_value(&self, name: &str, v: f64) -> Result<Self, HarnessError> {
        if !self.sweep_names().contains(&name) {
            return Err(HarnessError::Config(format!(
                "{} cannot sweep '{name}' (allowed: {})",
                self.name(),
                self.sweep_names().join(", ")
            )));
        }
        let as_count = |v: f64| -> Result<usize, HarnessError> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(HarnessError::Config(format!("{name}={v} is not a positive integer")))
            }
        };
        let mut e = self.clone();
        match &mut e {
            Self::LtErasure { k, epsilon, .. } => match name {
                "k" => *k = as_count(v)?,
                _ => *epsilon = v,
            },
            Self::LtRs { p_total, .. } | Self::RsRs { p_total, .. } | Self::WmConcat { p_total, .. } => *p_total = v,
            Self::PolarSubstitution { n, k, param, .. } => match name {
                "n" => {
                    let new_n = as_count(v)?;
                    *k = ((*k as f64) * new_n as f64 / *n as f64).round() as usize;
                    *n = new_n;
                }
                _ => *param = v,
            },
            Self::UncodedQuaternary { param, .. } => *param = v,
            Self::Bernoulli { p } => *p = v,
        }
        Ok(e)
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
    pub bits: u64,
}

/// Bits missing from a failed decode are scored as zeros.
fn score(truth: &[u8], estimate: Option<&[u8]>) -> TrialOutcome {
    let bit_errors = match estimate {
        Some(e) if e.len() == truth.len() => hamming_distance(truth, e),
        _ => truth.iter().filter(|&&b| b == 1).count(),
    };
    TrialOutcome { frame_error: estimate.is_none() || bit_errors > 0, bit_errors: bit_errors as u64, bits: truth.len() as u64 }
}

fn random_bits(rng: &mut SimRng, n: usize) -> BitSeq {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn oligo_channel(p_total: f64) -> Result<ChannelSpec, HarnessError> {
    let spec = ChannelSpec {
        p_s: OLIGO_SUB_SHARE * p_total,
        p_l: (1.0 - OLIGO_SUB_SHARE) * p_total,
        ..ChannelSpec::clean(ChannelLevel::Base)
    };
    spec.validate()?;
    Ok(spec)
}

/// Per-point state built once and shared read-only by all trials.
pub(super) enum Prepared {
    LtErasure { code: LtCode, droplets: usize },
    LtRs { codec: LtRsCodec, data_bits: usize, channel: ChannelSpec },
    RsRs { codec: RsRsCodec, data_bits: usize, channel: ChannelSpec },
    Polar { spec: PolarSpec, list: usize, rows: [[f64; 4]; 4], channel: ChannelSpec, demap: Demap },
    Wm { codec: WmConcatCodec, ids: IdsParams, channel: ChannelSpec },
    Uncoded { bits: usize, channel: ChannelSpec },
    Bernoulli { p: f64 },
}

fn matrix_channel(rows: [[f64; 4]; 4]) -> Result<ChannelSpec, HarnessError> {
    let spec = ChannelSpec { substitution: SubstitutionModel::Matrix { rows }, ..ChannelSpec::clean(ChannelLevel::Base) };
    spec.validate()?;
    Ok(spec)
}

impl Prepared {
    pub(super) fn new(e: &Experiment) -> Result<Self, HarnessError> {
        Ok(match e {
            &Experiment::LtErasure { k, rsd_c, rsd_delta, epsilon } => {
                if !(0.0..=100.0).contains(&epsilon) {
                    return Err(HarnessError::Config(format!("epsilon={epsilon}")));
                }
                let code = LtCode::new(LtSpec { rsd_c, rsd_delta, ..LtSpec::new(k, 1) })?;
                Self::LtErasure { code, droplets: (k as f64 * (1.0 + epsilon)).ceil() as usize }
            }
            Experiment::LtRs { spec, data_bits, p_total } => {
                Self::LtRs { codec: LtRsCodec::new(spec.clone())?, data_bits: *data_bits, channel: oligo_channel(*p_total)? }
            }
            Experiment::RsRs { spec, data_bits, p_total } => {
                Self::RsRs { codec: RsRsCodec::new(spec.clone())?, data_bits: *data_bits, channel: oligo_channel(*p_total)? }
            }
            &Experiment::PolarSubstitution { n, k, preset, param, list, construction, demap } => {
                if n % 2 != 0 {
                    return Err(HarnessError::Config("polar length must be even to fill whole bases".into()));
                }
                let rows = preset.matrix(param)?;
                let p = quaternary_bit_error_rate(&rows).clamp(1e-6, 0.499);
                let channel = matrix_channel(rows)?;
                let spec = match (construction, demap) {
                    (PolarConstruction::Bhattacharyya, _) => {
                        construct(n, k, p, DesignChannel::Bsc, ConstructionMethod::Bhattacharyya)?
                    }
                    (PolarConstruction::Genie { samples, seed }, Demap::Bicm) => {
                        construct_from_channel(n, k, p, samples, seed, |c, rng| {
                            through_preset(c, &channel, &rows, rng).expect("code bits render as bases")
                        })?
                    }
                    (PolarConstruction::Genie { samples, seed }, Demap::Multilevel) => {
                        let h = n / 2;
                        // Left half sees x through the exact x-metric; right
                        // half sees y given the true x.
                        let left = genie_scores(h, samples, seed, |x, rng| {
                            let y: BitSeq = (0..h).map(|_| rng.random_range(0..2u8)).collect();
                            let lik = multilevel_channel(x, &y, &channel, &rows, rng);
                            lik.iter().map(x_llr).collect()
                        })?;
                        let right = genie_scores(h, samples, seed ^ 1, |y, rng| {
                            let x: BitSeq = (0..h).map(|_| rng.random_range(0..2u8)).collect();
                            let lik = multilevel_channel(&x, y, &channel, &rows, rng);
                            lik.iter().zip(&x).map(|(l, &xi)| y_llr(l, xi)).collect()
                        })?;
                        PolarSpec::from_scores(&[left, right].concat(), k, p)?
                    }
                };
                Self::Polar { spec, list, rows, channel, demap }
            }
            Experiment::WmConcat { spec, p_total, calibration_frames } => {
                let (p_i, p_d, p_s) = split_total_error(*p_total);
                let ids = IdsParams::new(p_i, p_d, p_s)?;
                let mut spec = WmConcatSpec { assumed_channel: ids, ..spec.clone() };
                if let crate::pipelines::OuterCode::Polar { n, design_p: None, .. } = spec.outer {
                    let seed = derive_seed(spec.watermark_seed, &[0xca1, p_total.to_bits()]);
                    let p = crate::pipelines::post_watermark_ber(&spec, &ids, *calibration_frames, seed)?;
                    if let crate::pipelines::OuterCode::Polar { design_p, .. } = &mut spec.outer {
                        *design_p = Some(p);
                    }
                    log::debug!("polar N={n} designed for p={p} at P={p_total}");
                }
                let channel = ChannelSpec {
                    p_i,
                    p_d,
                    p_s,
                    insertion_cap: Some(spec.insertion_limit),
                    ..ChannelSpec::clean(ChannelLevel::Bit)
                };
                channel.validate()?;
                Self::Wm { codec: WmConcatCodec::new(spec)?, ids, channel }
            }
            &Experiment::UncodedQuaternary { bits, preset, param } => {
                if bits == 0 || bits % 2 != 0 {
                    return Err(HarnessError::Config(format!("uncoded frame of {bits} bits must be even and non-empty")));
                }
                Self::Uncoded { bits, channel: matrix_channel(preset.matrix(param)?)? }
            }
            &Experiment::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(HarnessError::Config(format!("p={p}")));
                }
                Self::Bernoulli { p }
            }
        })
    }

    pub(super) fn trial(&self, seed: u64) -> Result<TrialOutcome, HarnessError> {
        let mut rng = rng_from_seed(seed);
        match self {
            Self::LtErasure { code, droplets } => {
                // Droplet i depends only on (seed, i), so a larger epsilon
                // sees a superset of the droplets a smaller one sees.
                let k = code.spec().k;
                let mut peeler = IncrementalPeeler::new(k);
                for i in 0..*droplets {
                    if peeler.is_complete() {
                        break;
                    }
                    peeler.add(&code.neighbors(derive_seed(seed, &[i as u64])));
                }
                let missing = (k - peeler.recovered()) as u64;
                Ok(TrialOutcome { frame_error: missing > 0, bit_errors: missing, bits: k as u64 })
            }
            Self::LtRs { codec, data_bits, channel } => {
                let data = random_bits(&mut rng, *data_bits);
                let enc = codec.encode_with_stream(&data, rng.random())?;
                let mut reads = Vec::with_capacity(enc.frames.len());
                for f in &enc.frames {
                    if let Some(r) = pass_oligo(&f.rendered, channel, &mut rng)? {
                        reads.push(r);
                    }
                }
                let refs: Vec<&str> = reads.iter().map(String::as_str).collect();
                let (symbols, report) = codec.decode_partial(&refs, enc.k)?;
                let mut est: BitSeq = symbols
                    .into_iter()
                    .flat_map(|s| s.unwrap_or_else(|| vec![0; codec.spec().payload_bits]))
                    .collect();
                est.truncate(*data_bits);
                let mut out = score(&data, Some(&est));
                out.frame_error |= report.recovered < enc.k;
                Ok(out)
            }
            Self::RsRs { codec, data_bits, channel } => {
                let data = random_bits(&mut rng, *data_bits);
                let blocks = codec.encode(&data)?;
                let mut est = Vec::with_capacity(blocks.len() * codec.spec().data_bits_per_block());
                let mut failed = false;
                let mut report = RsRsDecodeReport::default();
                for (b, block) in blocks.iter().enumerate() {
                    let mut reads = Vec::with_capacity(block.len());
                    for f in block {
                        if let Some(r) = pass_oligo(&f.rendered, channel, &mut rng)? {
                            reads.push(r);
                        }
                    }
                    let refs: Vec<&str> = reads.iter().map(String::as_str).collect();
                    let (bits, _, rows) = codec.decode_block_lossy(b, &refs, &mut report)?;
                    failed |= !rows.is_empty();
                    est.extend(bits);
                }
                est.truncate(*data_bits);
                let mut out = score(&data, Some(&est));
                out.frame_error |= failed;
                Ok(out)
            }
            Self::Polar { spec, list, rows, channel, demap: Demap::Bicm } => {
                let info = random_bits(&mut rng, spec.k);
                let c = polar::encode(&info, spec)?;
                let llrs = through_preset(&c, channel, rows, &mut rng)?;
                let dec = scl_decode(&llrs, spec, *list)?;
                Ok(score(&info, Some(&dec.info)))
            }
            Self::Polar { spec, list, rows, channel, demap: Demap::Multilevel } => {
                let info = random_bits(&mut rng, spec.k);
                let c = polar::encode(&info, spec)?;
                let h = spec.n / 2;
                let x: BitSeq = c[..h].iter().zip(&c[h..]).map(|(a, b)| a ^ b).collect();
                let lik = multilevel_channel(&x, &c[h..], channel, rows, &mut rng);
                let (left, right) = spec.halves()?;
                let dx = scl_decode(&lik.iter().map(x_llr).collect::<Vec<_>>(), &left, *list)?;
                let ly: Vec<f64> = lik.iter().zip(&dx.codeword).map(|(l, &xi)| y_llr(l, xi)).collect();
                let dy = scl_decode(&ly, &right, *list)?;
                Ok(score(&info, Some(&[dx.info, dy.info].concat())))
            }
            Self::Wm { codec, ids, channel } => {
                let info = random_bits(&mut rng, codec.k());
                let tx = codec.encode_frame(&info)?;
                let (rx, _) = transmit(&tx, channel, &mut rng)?;
                match codec.decode_frame(&rx, ids, 0) {
                    Ok(d) => {
                        let mut out = score(&info, Some(&d.info));
                        out.frame_error |= !d.converged;
                        Ok(out)
                    }
                    Err(PipelineError::DriftOverflow { .. }) => Ok(score(&info, None)),
                    Err(e) => Err(e.into()),
                }
            }
            Self::Uncoded { bits, channel } => {
                let data = random_bits(&mut rng, *bits);
                let tx = quaternary_encode(&data).map_err(PipelineError::from)?;
                let (rx, _) = transmit(tx.as_bytes(), channel, &mut rng)?;
                let rx = String::from_utf8(rx).map_err(|e| HarnessError::Config(e.to_string()))?;
                let est = quaternary_decode(&rx).map_err(PipelineError::from)?;
                Ok(score(&data, Some(&est)))
            }
            &Self::Bernoulli { p } => {
                let e = rng.random_bool(p);
                Ok(TrialOutcome { frame_error: e, bit_errors: e as u64, bits: 1 })
            }
        }
    }
}

/// Maps code bits to bases, applies the substitution matrix and returns
/// per-bit LLRs.
fn through_preset(c: &[u8], channel: &ChannelSpec, rows: &[[f64; 4]; 4], rng: &mut SimRng) -> Result<Vec<f64>, HarnessError> {
    let tx = quaternary_encode(c).map_err(PipelineError::from)?;
    let (rx, _) = transmit(tx.as_bytes(), channel, rng)?;
    Ok(soft_demap(&rx, rows)?)
}

/// Sends base j = (x_j xor y_j, y_j) through the preset and returns
/// P(received | b1, b2) per base.
fn multilevel_channel(x: &[u8], y: &[u8], channel: &ChannelSpec, rows: &[[f64; 4]; 4], rng: &mut SimRng) -> Vec<[[f64; 2]; 2]> {
    let tx: Vec<u8> = x.iter().zip(y).map(|(&a, &b)| pair_to_base(((a ^ b) << 1) | b)).collect();
    let (rx, _) = transmit(&tx, channel, rng).expect("bases are valid channel symbols");
    rx.iter()
        .map(|&r| {
            let col = base_index(r).expect("channel emits bases");
            let p = |v: u8| rows[base_index(pair_to_base(v)).unwrap()][col].max(1e-300);
            [[p(0b00), p(0b01)], [p(0b10), p(0b11)]]
        })
        .collect()
}

/// LLR of x = b1 xor b2.
fn x_llr(l: &[[f64; 2]; 2]) -> f64 {
    ((l[0][0] + l[1][1]).ln() - (l[1][0] + l[0][1]).ln()).clamp(-50.0, 50.0)
}

/// LLR of y = b2 given x.
fn y_llr(l: &[[f64; 2]; 2], x: u8) -> f64 {
    (l[(x & 1) as usize][0].ln() - l[(x & 1 ^ 1) as usize][1].ln()).clamp(-50.0, 50.0)
}

/// Loses the oligo with probability p_l, otherwise passes it through the
/// base-level channel once.
fn pass_oligo(oligo: &str, channel: &ChannelSpec, rng: &mut SimRng) -> Result<Option<String>, HarnessError> {
    if rng.random_bool(channel.p_l) {
        return Ok(None);
    }
    let (rx, _) = transmit(oligo.as_bytes(), channel, rng)?;
    Ok(Some(String::from_utf8(rx).map_err(|e| HarnessError::Config(e.to_string()))?))
}
