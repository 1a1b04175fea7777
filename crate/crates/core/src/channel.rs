//! DNA storage channel: per-slot insertions, deletions and substitutions on
//! bits or bases, sequencing substitution presets, oligo dropout and uneven
//! copy numbers. Every corruption returns an [`EventTrace`] that replays it.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::base_codec::{base_index, base_to_pair, BASES};

pub const CHANNEL_SCHEMA_VERSION: u32 = 1;

/// Share of insertions, deletions and substitutions in a total error rate.
pub const IDS_MIX: (f64, f64, f64) = (0.17, 0.40, 0.43);

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel spec: {0}")]
    BadSpec(String),
    #[error("preset parameter {value} outside (0, {max})")]
    PresetRange { value: f64, max: f64 },
    #[error("symbol {0} not in the channel alphabet")]
    BadSymbol(u8),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

pub fn split_total_error(p: f64) -> (f64, f64, f64) {
    (IDS_MIX.0 * p, IDS_MIX.1 * p, IDS_MIX.2 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelLevel {
    Bit,
    Base,
}

/// How a surviving symbol is substituted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubstitutionModel {
    /// With probability P_s replace by a uniformly chosen other symbol.
    Uniform,
    /// Row-stochastic 4x4 matrix over A, C, G, T applied to every surviving
    /// base; P_s is ignored.
    Matrix { rows: [[f64; 4]; 4] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CopyDist {
    Fixed { copies: usize },
    Poisson { mean: f64 },
    /// Gamma–Poisson mixture with the given mean and shape r.
    NegativeBinomial { mean: f64, dispersion: f64 },
}

impl CopyDist {
    pub fn mean(&self) -> f64 {
        match *self {
            CopyDist::Fixed { copies } => copies as f64,
            CopyDist::Poisson { mean } | CopyDist::NegativeBinomial { mean, .. } => mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let poisson = |lambda: f64, rng: &mut R| {
            if lambda <= 0.0 {
                0
            } else {
                Poisson::new(lambda).expect("positive rate").sample(rng) as usize
            }
        };
        match *self {
            CopyDist::Fixed { copies } => copies,
            CopyDist::Poisson { mean } => poisson(mean, rng),
            CopyDist::NegativeBinomial { mean, dispersion } => {
                let lambda = Gamma::new(dispersion, mean / dispersion).expect("validated").sample(rng);
                poisson(lambda, rng)
            }
        }
    }
}

impl Default for CopyDist {
    fn default() -> Self {
        CopyDist::NegativeBinomial { mean: 5.0, dispersion: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub schema_version: u32,
    pub level: ChannelLevel,
    pub p_i: f64,
    pub p_d: f64,
    pub p_s: f64,
    pub substitution: SubstitutionModel,
    /// Longest insertion run per slot; `None` is the free-running geometric.
    pub insertion_cap: Option<usize>,
    /// Probability an oligo is lost entirely.
    pub p_l: f64,
    pub copy_dist: CopyDist,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn clean(level: ChannelLevel) -> Self {
        Self {
            schema_version: CHANNEL_SCHEMA_VERSION,
            level,
            p_i: 0.0,
            p_d: 0.0,
            p_s: 0.0,
            substitution: SubstitutionModel::Uniform,
            insertion_cap: None,
            p_l: 0.0,
            copy_dist: CopyDist::Fixed { copies: 1 },
            seed: 0,
        }
    }

    /// Total IDS error probability split with [`IDS_MIX`].
    pub fn with_total_error(mut self, p: f64) -> Self {
        (self.p_i, self.p_d, self.p_s) = split_total_error(p);
        self
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.schema_version != CHANNEL_SCHEMA_VERSION {
            return Err(ChannelError::Schema(self.schema_version));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.p_i) && unit(self.p_d) && unit(self.p_s) && unit(self.p_l)) {
            return Err(ChannelError::BadSpec("rates must lie in [0, 1]".into()));
        }
        if self.p_i >= 1.0 || self.p_i + self.p_d > 1.0 + 1e-12 {
            return Err(ChannelError::BadSpec("need P_i < 1 and P_i + P_d <= 1".into()));
        }
        if let SubstitutionModel::Matrix { rows } = &self.substitution {
            if self.level == ChannelLevel::Bit {
                return Err(ChannelError::BadSpec("matrix substitution needs base level".into()));
            }
            for r in rows {
                if r.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(ChannelError::BadSpec(format!("row {r:?} is not stochastic")));
                }
            }
        }
        match self.copy_dist {
            CopyDist::Poisson { mean } if !(mean >= 0.0) => Err(ChannelError::BadSpec("negative mean".into())),
            CopyDist::NegativeBinomial { mean, dispersion } if !(mean > 0.0 && dispersion > 0.0) => {
                Err(ChannelError::BadSpec("negative binomial needs mean, dispersion > 0".into()))
            }
            _ => Ok(()),
        }
    }

    fn alphabet(&self) -> usize {
        match self.level {
            ChannelLevel::Bit => 2,
            ChannelLevel::Base => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    Transmit,
    Substitute(u8),
    Delete,
}

/// What happened at one input slot: inserted symbols first, then the fate
/// of the slot's own symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotEvent {
    pub inserted: Vec<u8>,
    pub fate: Fate,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTrace {
    pub slots: Vec<SlotEvent>,
}

impl EventTrace {
    pub fn replay(&self, input: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(input.len());
        for (ev, &x) in self.slots.iter().zip(input) {
            out.extend_from_slice(&ev.inserted);
            match ev.fate {
                Fate::Transmit => out.push(x),
                Fate::Substitute(y) => out.push(y),
                Fate::Delete => {}
            }
        }
        out
    }

    /// x_j = insertions minus deletions before slot j, for j = 0..=N.
    pub fn drift(&self) -> Vec<i64> {
        let mut acc = 0i64;
        let mut out = vec![0];
        for ev in &self.slots {
            acc += ev.inserted.len() as i64 - (ev.fate == Fate::Delete) as i64;
            out.push(acc);
        }
        out
    }

    pub fn is_clean(&self) -> bool {
        self.slots.iter().all(|e| e.inserted.is_empty() && e.fate == Fate::Transmit)
    }

    pub fn counts(&self) -> EventCounts {
        let mut c = EventCounts::default();
        for e in &self.slots {
            c.insertions += e.inserted.len();
            match e.fate {
                Fate::Transmit => {}
                Fate::Substitute(_) => c.substitutions += 1,
                Fate::Delete => c.deletions += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

/// Symbols are bits (0/1) at bit level and ASCII A/C/G/T at base level.
pub fn transmit<R: Rng + ?Sized>(
    seq: &[u8],
    spec: &ChannelSpec,
    rng: &mut R,
) -> Result<(Vec<u8>, EventTrace), ChannelError> {
    let q = spec.alphabet();
    let to_idx = |s: u8| -> Result<usize, ChannelError> {
        match spec.level {
            ChannelLevel::Bit if s < 2 => Ok(s as usize),
            ChannelLevel::Base => base_index(s).ok_or(ChannelError::BadSymbol(s)),
            _ => Err(ChannelError::BadSymbol(s)),
        }
    };
    let from_idx = |i: usize| -> u8 {
        match spec.level {
            ChannelLevel::Bit => i as u8,
            ChannelLevel::Base => BASES[i],
        }
    };
    let keep = 1.0 - spec.p_i;
    let p_del = if keep > 0.0 { spec.p_d / keep } else { 0.0 };
    // Capped runs: P(k) = c_k (1 - P_i) with c_0 = 1, c_k = P_i^k / (1 - P_i^cap).
    let capped: Option<Vec<f64>> = spec.insertion_cap.map(|cap| {
        let alpha = 1.0 / (1.0 - spec.p_i.powi(cap as i32));
        let mut acc = 0.0;
        (0..=cap)
            .map(|k| {
                let ck = if k == 0 { 1.0 } else { alpha * spec.p_i.powi(k as i32) };
                acc += ck * keep;
                acc
            })
            .collect()
    });
    let mut out = Vec::with_capacity(seq.len() + 8);
    let mut slots = Vec::with_capacity(seq.len());
    for &s in seq {
        let x = to_idx(s)?;
        let runs = match &capped {
            Some(cdf) => {
                let u: f64 = rng.random();
                cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
            }
            None => {
                let mut k = 0;
                while spec.p_i > 0.0 && rng.random_bool(spec.p_i) {
                    k += 1;
                }
                k
            }
        };
        let inserted: Vec<u8> = (0..runs).map(|_| from_idx(rng.random_range(0..q))).collect();
        out.extend_from_slice(&inserted);
        let fate = if p_del > 0.0 && rng.random_bool(p_del.min(1.0)) {
            Fate::Delete
        } else {
            let y = match &spec.substitution {
                SubstitutionModel::Uniform => {
                    if spec.p_s > 0.0 && rng.random_bool(spec.p_s) {
                        let shift = rng.random_range(1..q);
                        (x + shift) % q
                    } else {
                        x
                    }
                }
                SubstitutionModel::Matrix { rows } => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = x;
                    for (j, &p) in rows[x].iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = j;
                            break;
                        }
                    }
                    pick
                }
            };
            if y == x {
                out.push(s);
                Fate::Transmit
            } else {
                out.push(from_idx(y));
                Fate::Substitute(from_idx(y))
            }
        };
        slots.push(SlotEvent { inserted, fate });
    }
    Ok((out, EventTrace { slots }))
}

/// Substitution graph: each edge weight is `coef * param + constant` for its
/// class, and the diagonal absorbs the rest of the row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionPreset {
    pub param_max: f64,
    pub classes: HashMap<String, (f64, f64)>,
    pub edges: Vec<(char, char, String)>,
}

impl SubstitutionPreset {
    /// Looks up `name` in a JSON object of presets.
    pub fn from_json(json: &str, name: &str) -> Result<Self, ChannelError> {
        let mut all: HashMap<String, serde_json::Value> =
            serde_json::from_str(json).map_err(|e| ChannelError::BadSpec(e.to_string()))?;
        let v = all.remove(name).ok_or_else(|| ChannelError::BadSpec(format!("no preset {name}")))?;
        let preset: Self = serde_json::from_value(v).map_err(|e| ChannelError::BadSpec(e.to_string()))?;
        for (a, b, class) in &preset.edges {
            if base_index(*a as u8).is_none() || base_index(*b as u8).is_none() || a == b {
                return Err(ChannelError::BadSpec(format!("bad edge {a}->{b}")));
            }
            if !preset.classes.contains_key(class) {
                return Err(ChannelError::BadSpec(format!("unknown class {class}")));
            }
        }
        Ok(preset)
    }

    pub fn bundled(name: &str) -> Result<Self, ChannelError> {
        Self::from_json(BUNDLED_PRESETS, name)
    }

    pub fn matrix(&self, param: f64) -> Result<[[f64; 4]; 4], ChannelError> {
        if !(param > 0.0 && param < self.param_max) {
            return Err(ChannelError::PresetRange { value: param, max: self.param_max });
        }
        let mut m = [[0.0; 4]; 4];
        for (from, to, class) in &self.edges {
            let (a, b) = (base_index(*from as u8).unwrap(), base_index(*to as u8).unwrap());
            let (coef, constant) = self.classes[class];
            m[a][b] += coef * param + constant;
        }
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0 - row.iter().sum::<f64>();
            if row[i] < 0.0 {
                return Err(ChannelError::PresetRange { value: param, max: self.param_max });
            }
        }
        Ok(m)
    }
}

pub const BUNDLED_PRESETS: &str = include_str!("../data/substitution_presets.json");

/// Nanopore substitution matrix: p1 = 4α, p2 = α, p3 = 0.01, p4 = 0.
pub fn preset_nanopore(alpha: f64) -> Result<[[f64; 4]; 4], ChannelError> {
    SubstitutionPreset::bundled("nanopore")?.matrix(alpha)
}

/// Illumina substitution matrix: p_a = 1.5β, p_b = β.
pub fn preset_illumina(beta: f64) -> Result<[[f64; 4]; 4], ChannelError> {
    SubstitutionPreset::bundled("illumina")?.matrix(beta)
}

/// Per-bit LLRs for received bases under a substitution matrix with uniform
/// inputs and the 00/01/10/11 -> A/T/C/G map.
pub fn soft_demap(received: &[u8], rows: &[[f64; 4]; 4]) -> Result<Vec<f64>, ChannelError> {
    let mut out = Vec::with_capacity(received.len() * 2);
    for &r in received {
        let y = base_index(r).ok_or(ChannelError::BadSymbol(r))?;
        for bit in 0..2 {
            let (mut p0, mut p1) = (0.0, 0.0);
            for (x, &base) in BASES.iter().enumerate() {
                let pair = base_to_pair(base).unwrap();
                let b = if bit == 0 { pair >> 1 } else { pair & 1 };
                if b == 0 {
                    p0 += rows[x][y];
                } else {
                    p1 += rows[x][y];
                }
            }
            out.push((p0.max(1e-300).ln() - p1.max(1e-300).ln()).clamp(-50.0, 50.0));
        }
    }
    Ok(out)
}

/// Expected fraction of wrong bits per base for uniform inputs.
pub fn quaternary_bit_error_rate(rows: &[[f64; 4]; 4]) -> f64 {
    let mut e = 0.0;
    for (x, row) in rows.iter().enumerate() {
        let px = base_to_pair(BASES[x]).unwrap();
        for (y, &p) in row.iter().enumerate() {
            let py = base_to_pair(BASES[y]).unwrap();
            e += 0.25 * p * (px ^ py).count_ones() as f64 / 2.0;
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    pub source: usize,
    pub seq: Vec<u8>,
    pub trace: EventTrace,
}

/// Dropout, copy sampling and per-copy corruption of an oligo pool.
pub fn pool_sample<R: Rng + ?Sized>(
    oligos: &[Vec<u8>],
    spec: &ChannelSpec,
    rng: &mut R,
) -> Result<Vec<Read>, ChannelError> {
    let mut reads = Vec::new();
    for (i, o) in oligos.iter().enumerate() {
        if spec.p_l > 0.0 && rng.random_bool(spec.p_l) {
            continue;
        }
        for _ in 0..spec.copy_dist.sample(rng) {
            let (seq, trace) = transmit(o, spec, rng)?;
            reads.push(Read { source: i, seq, trace });
        }
    }
    Ok(reads)
}

/// Per-position majority over the reads sharing the most common length.
/// Ties go to the earliest read's symbol.
pub fn consensus(reads: &[&[u8]]) -> Option<Vec<u8>> {
    let mut by_len: HashMap<usize, usize> = HashMap::new();
    for r in reads {
        *by_len.entry(r.len()).or_default() += 1;
    }
    let (&len, _) = by_len.iter().max_by_key(|&(&l, &c)| (c, std::cmp::Reverse(l)))?;
    let group: Vec<&[u8]> = reads.iter().copied().filter(|r| r.len() == len).collect();
    Some(
        (0..len)
            .map(|p| {
                let mut counts: Vec<(u8, usize)> = Vec::new();
                for r in &group {
                    match counts.iter_mut().find(|(s, _)| *s == r[p]) {
                        Some(e) => e.1 += 1,
                        None => counts.push((r[p], 1)),
                    }
                }
                let best = counts.iter().map(|c| c.1).max().unwrap();
                counts.iter().find(|c| c.1 == best).unwrap().0
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn split() {
        let (i, d, s) = split_total_error(0.01);
        assert!((i - 0.0017).abs() < 1e-15 && (d - 0.004).abs() < 1e-15 && (s - 0.0043).abs() < 1e-15);
        assert_eq!(split_total_error(0.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn identity_and_total_deletion() {
        let mut rng = rng_from_seed(1);
        let spec = ChannelSpec::clean(ChannelLevel::Base);
        let (out, trace) = transmit(b"ACGTTGCA", &spec, &mut rng).unwrap();
        assert_eq!(out, b"ACGTTGCA");
        assert!(trace.is_clean());
        let spec = ChannelSpec { p_d: 1.0, ..ChannelSpec::clean(ChannelLevel::Bit) };
        assert!(transmit(&[0, 1, 1], &spec, &mut rng).unwrap().0.is_empty());
    }

    #[test]
    fn consensus_majority() {
        let reads: Vec<&[u8]> = vec![b"ACGT", b"ACGA", b"TCGT", b"ACG"];
        assert_eq!(consensus(&reads).unwrap(), b"ACGT");
        assert_eq!(consensus(&[]), None);
    }

    #[test]
    fn validation() {
        let mut s = ChannelSpec::clean(ChannelLevel::Bit);
        s.p_i = 0.7;
        s.p_d = 0.5;
        assert!(s.validate().is_err());
        let s = ChannelSpec {
            substitution: SubstitutionModel::Matrix { rows: [[0.25; 4]; 4] },
            ..ChannelSpec::clean(ChannelLevel::Bit)
        };
        assert!(s.validate().is_err());
    }
}
