//! LT fountain code with the Robust Soliton degree distribution.
//!
//! A droplet is fully described by its seed: the seed drives a ChaCha8
//! stream that first draws the degree and then the neighbours by partial
//! Fisher–Yates, so the decoder can rebuild the equation from the droplet
//! alone.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_uint, uint_to_bits, xor_into, BitSeq};
use crate::rng::rng_from_seed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LtError {
    #[error("invalid LT spec: {0}")]
    BadSpec(String),
    #[error("expected {expected} source symbols of {bits} bits")]
    BadSource { expected: usize, bits: usize },
    #[error("droplet payload has {got} bits, expected {expected}")]
    BadPayload { expected: usize, got: usize },
    #[error("seed {seed} does not fit in {width} bits")]
    SeedTooWide { seed: u64, width: usize },
    #[error("peeling stalled with {recovered} of {k} symbols recovered")]
    DecodeStalled { recovered: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtSpec {
    pub k: usize,
    pub symbol_size: usize,
    pub rsd_c: f64,
    pub rsd_delta: f64,
    pub seed_width: usize,
}

impl LtSpec {
    pub fn new(k: usize, symbol_size: usize) -> Self {
        Self { k, symbol_size, rsd_c: 0.03, rsd_delta: 0.05, seed_width: 32 }
    }

    pub fn validate(&self) -> Result<(), LtError> {
        if self.k == 0 {
            return Err(LtError::BadSpec("K must be at least 1".into()));
        }
        if !(self.rsd_delta > 0.0 && self.rsd_delta < 1.0) || self.rsd_c.is_nan() || self.rsd_c <= 0.0 {
            return Err(LtError::BadSpec(format!("c={} delta={}", self.rsd_c, self.rsd_delta)));
        }
        if self.seed_width == 0 || self.seed_width > 64 {
            return Err(LtError::BadSpec(format!("seed width {}", self.seed_width)));
        }
        Ok(())
    }

    /// Position of the robust spike, min(ceil(K/R), K).
    pub fn spike(&self) -> usize {
        let r = self.ripple();
        ((self.k as f64 / r).ceil() as usize).clamp(1, self.k)
    }

    /// R = c ln(K/δ) √K.
    pub fn ripple(&self) -> f64 {
        let k = self.k as f64;
        self.rsd_c * (k / self.rsd_delta).ln() * k.sqrt()
    }
}

/// Probabilities of degrees 1..=K (index d-1).
pub fn rsd(spec: &LtSpec) -> Vec<f64> {
    let k = spec.k;
    let r = spec.ripple();
    let pivot = spec.spike();
    let mut p = vec![0.0; k];
    p[0] = 1.0 / k as f64;
    for d in 2..=k {
        p[d - 1] = 1.0 / (d * (d - 1)) as f64;
    }
    for d in 1..pivot {
        p[d - 1] += r / (d as f64 * k as f64);
    }
    p[pivot - 1] += r * (r / spec.rsd_delta).ln().max(0.0) / k as f64;
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Droplet {
    pub seed: u64,
    pub payload: BitSeq,
}

impl Droplet {
    /// Seed as `seed_width` big-endian bits followed by the payload.
    pub fn to_bits(&self, seed_width: usize) -> Result<BitSeq, LtError> {
        if seed_width < 64 && self.seed >> seed_width != 0 {
            return Err(LtError::SeedTooWide { seed: self.seed, width: seed_width });
        }
        let mut out = uint_to_bits(self.seed, seed_width);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn from_bits(bits: &[u8], spec: &LtSpec) -> Result<Self, LtError> {
        let expected = spec.seed_width + spec.symbol_size;
        if bits.len() != expected {
            return Err(LtError::BadPayload { expected, got: bits.len() });
        }
        Ok(Self { seed: bits_to_uint(&bits[..spec.seed_width]), payload: bits[spec.seed_width..].to_vec() })
    }
}

/// Encoder/decoder with a cached degree CDF.
#[derive(Debug, Clone)]
pub struct LtCode {
    spec: LtSpec,
    cdf: Vec<f64>,
}

impl LtCode {
    pub fn new(spec: LtSpec) -> Result<Self, LtError> {
        spec.validate()?;
        let mut acc = 0.0;
        let cdf = rsd(&spec)
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { spec, cdf })
    }

    pub fn spec(&self) -> &LtSpec {
        &self.spec
    }

    /// Neighbour set of the droplet with this seed; its length is the degree.
    pub fn neighbors(&self, seed: u64) -> Vec<usize> {
        let mut rng = rng_from_seed(seed);
        let u: f64 = rng.random();
        let d = self.cdf.partition_point(|&c| c < u).min(self.spec.k - 1) + 1;
        let k = self.spec.k;
        if d * d >= k {
            let mut pool: Vec<usize> = (0..k).collect();
            for i in 0..d {
                let j = rng.random_range(i..k);
                pool.swap(i, j);
            }
            pool.truncate(d);
            return pool;
        }
        // Same partial Fisher-Yates, storing only displaced entries.
        let mut moved: Vec<(usize, usize)> = Vec::with_capacity(d);
        let lookup = |moved: &[(usize, usize)], x: usize| moved.iter().rev().find(|m| m.0 == x).map_or(x, |m| m.1);
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let j = rng.random_range(i..k);
            let at_j = lookup(&moved, j);
            let at_i = lookup(&moved, i);
            moved.push((j, at_i));
            out.push(at_j);
        }
        out
    }

    pub fn encode(&self, src: &[BitSeq], seed: u64) -> Result<Droplet, LtError> {
        self.check_source(src)?;
        let mut payload = vec![0u8; self.spec.symbol_size];
        for n in self.neighbors(seed) {
            xor_into(&mut payload, &src[n]);
        }
        Ok(Droplet { seed, payload })
    }

    fn check_source(&self, src: &[BitSeq]) -> Result<(), LtError> {
        if src.len() != self.spec.k || src.iter().any(|s| s.len() != self.spec.symbol_size) {
            return Err(LtError::BadSource { expected: self.spec.k, bits: self.spec.symbol_size });
        }
        Ok(())
    }

    pub fn decode(&self, droplets: &[Droplet]) -> Result<PeelOutcome, LtError> {
        let mut eqs = Vec::with_capacity(droplets.len());
        for d in droplets {
            if d.payload.len() != self.spec.symbol_size {
                return Err(LtError::BadPayload { expected: self.spec.symbol_size, got: d.payload.len() });
            }
            eqs.push((self.neighbors(d.seed), d.payload.clone()));
        }
        Ok(peel(self.spec.k, eqs))
    }
}

pub fn lt_encode(src: &[BitSeq], seed: u64, spec: &LtSpec) -> Result<Droplet, LtError> {
    LtCode::new(*spec)?.encode(src, seed)
}

pub fn bp_decode(droplets: &[Droplet], spec: &LtSpec) -> Result<PeelOutcome, LtError> {
    LtCode::new(*spec)?.decode(droplets)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelOutcome {
    pub symbols: Vec<Option<BitSeq>>,
    /// Source indices in the order they were resolved.
    pub order: Vec<usize>,
}

impl PeelOutcome {
    pub fn recovered(&self) -> usize {
        self.order.len()
    }

    pub fn is_complete(&self) -> bool {
        self.order.len() == self.symbols.len()
    }

    pub fn into_result(self) -> Result<Vec<BitSeq>, LtError> {
        let k = self.symbols.len();
        let recovered = self.order.len();
        if recovered < k {
            return Err(LtError::DecodeStalled { recovered, k });
        }
        Ok(self.symbols.into_iter().map(|s| s.expect("complete")).collect())
    }
}

/// Peeling decoder over explicit (neighbours, value) equations, processing
/// degree-one equations first-in first-out.
pub fn peel(k: usize, equations: Vec<(Vec<usize>, BitSeq)>) -> PeelOutcome {
    let mut symbols: Vec<Option<BitSeq>> = vec![None; k];
    let mut order = Vec::new();
    let m = equations.len();
    // Each equation keeps its remaining degree and the XOR of its remaining
    // neighbour indices, which names the last neighbour once degree hits 1.
    let mut degree = vec![0usize; m];
    let mut index_xor = vec![0usize; m];
    let mut values = Vec::with_capacity(m);
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut ripple = VecDeque::new();
    for (e, (mut n, v)) in equations.into_iter().enumerate() {
        // Repeated neighbours cancel.
        n.sort_unstable();
        let mut kept: Vec<usize> = Vec::with_capacity(n.len());
        for x in n {
            if kept.last() == Some(&x) {
                kept.pop();
            } else {
                kept.push(x);
            }
        }
        for &s in &kept {
            touching[s].push(e);
            index_xor[e] ^= s;
        }
        degree[e] = kept.len();
        if degree[e] == 1 {
            ripple.push_back(e);
        }
        values.push(v);
    }
    while let Some(e) = ripple.pop_front() {
        if degree[e] != 1 {
            continue;
        }
        let s = index_xor[e];
        if symbols[s].is_some() {
            continue;
        }
        let value = values[e].clone();
        for &f in &touching[s] {
            degree[f] -= 1;
            index_xor[f] ^= s;
            xor_into(&mut values[f], &value);
            if degree[f] == 1 {
                ripple.push_back(f);
            }
        }
        symbols[s] = Some(value);
        order.push(s);
    }
    PeelOutcome { symbols, order }
}

/// Peeling that accepts equations one at a time, for locating the exact
/// number of droplets a decode needs. Payloads are not tracked.
#[derive(Debug, Clone)]
pub struct IncrementalPeeler {
    known: Vec<bool>,
    recovered: usize,
    degree: Vec<usize>,
    index_xor: Vec<usize>,
    touching: Vec<Vec<usize>>,
}

impl IncrementalPeeler {
    pub fn new(k: usize) -> Self {
        Self { known: vec![false; k], recovered: 0, degree: Vec::new(), index_xor: Vec::new(), touching: vec![Vec::new(); k] }
    }

    pub fn recovered(&self) -> usize {
        self.recovered
    }

    pub fn is_complete(&self) -> bool {
        self.recovered == self.known.len()
    }

    /// `neighbors` must be distinct.
    pub fn add(&mut self, neighbors: &[usize]) {
        let e = self.degree.len();
        let mut deg = 0;
        let mut x = 0;
        for &s in neighbors {
            if !self.known[s] {
                deg += 1;
                x ^= s;
                self.touching[s].push(e);
            }
        }
        self.degree.push(deg);
        self.index_xor.push(x);
        if deg != 1 {
            return;
        }
        let mut ripple = VecDeque::from([e]);
        while let Some(e) = ripple.pop_front() {
            if self.degree[e] != 1 {
                continue;
            }
            let s = self.index_xor[e];
            if self.known[s] {
                continue;
            }
            self.known[s] = true;
            self.recovered += 1;
            for &f in &self.touching[s] {
                if self.degree[f] > 0 {
                    self.degree[f] -= 1;
                    self.index_xor[f] ^= s;
                    if self.degree[f] == 1 {
                        ripple.push_back(f);
                    }
                }
            }
        }
    }
}
