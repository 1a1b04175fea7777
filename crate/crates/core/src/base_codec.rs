//! Bit/nucleotide mappings and biochemical screening.

use serde::{Deserialize, Serialize};

use crate::bits::BitSeq;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodecError {
    #[error("odd bit length {0}")]
    OddLength(usize),
    #[error("invalid base {0:?} at {1}")]
    InvalidBase(char, usize),
    #[error("invalid trit {0} at {1}")]
    InvalidTrit(u8, usize),
    #[error("base {base} repeats the previous base at {pos}")]
    Repeat { base: char, pos: usize },
    #[error("invalid constraint spec: {0}")]
    BadConstraints(String),
    #[error("malformed FASTA at line {0}")]
    Fasta(usize),
}

/// Bases in matrix order.
pub const BASES: [u8; 4] = *b"ACGT";

/// Index into [`BASES`].
pub fn base_index(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// 00 -> A, 01 -> T, 10 -> C, 11 -> G.
const QUAT: [u8; 4] = *b"ATCG";

pub fn base_to_pair(b: u8) -> Option<u8> {
    QUAT.iter().position(|&q| q == b).map(|p| p as u8)
}

pub fn pair_to_base(v: u8) -> u8 {
    QUAT[(v & 3) as usize]
}

pub fn quaternary_encode(bits: &[u8]) -> Result<String, CodecError> {
    if !bits.len().is_multiple_of(2) {
        return Err(CodecError::OddLength(bits.len()));
    }
    Ok(bits
        .chunks(2)
        .map(|p| pair_to_base((p[0] & 1) << 1 | (p[1] & 1)) as char)
        .collect())
}

pub fn quaternary_decode(seq: &str) -> Result<BitSeq, CodecError> {
    let mut out = Vec::with_capacity(seq.len() * 2);
    for (i, c) in seq.bytes().enumerate() {
        let v = base_to_pair(c).ok_or(CodecError::InvalidBase(c as char, i))?;
        out.push(v >> 1);
        out.push(v & 1);
    }
    Ok(out)
}

/// Goldman-style rotation: trit t after base b emits BASES[(idx(b) + 1 + t) % 4].
pub fn ternary_rotate_encode(trits: &[u8], start: u8) -> Result<String, CodecError> {
    let mut prev = base_index(start).ok_or(CodecError::InvalidBase(start as char, 0))?;
    let mut out = String::with_capacity(trits.len());
    for (i, &t) in trits.iter().enumerate() {
        if t > 2 {
            return Err(CodecError::InvalidTrit(t, i));
        }
        prev = (prev + 1 + t as usize) % 4;
        out.push(BASES[prev] as char);
    }
    Ok(out)
}

pub fn ternary_rotate_decode(seq: &str, start: u8) -> Result<Vec<u8>, CodecError> {
    let mut prev = base_index(start).ok_or(CodecError::InvalidBase(start as char, 0))?;
    let mut out = Vec::with_capacity(seq.len());
    for (i, c) in seq.bytes().enumerate() {
        let cur = base_index(c).ok_or(CodecError::InvalidBase(c as char, i))?;
        if cur == prev {
            return Err(CodecError::Repeat { base: c as char, pos: i });
        }
        out.push(((cur + 4 - prev - 1) % 4) as u8);
        prev = cur;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub gc_min: f64,
    pub gc_max: f64,
    pub max_homopolymer: usize,
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        Self { gc_min: 0.45, gc_max: 0.55, max_homopolymer: 3 }
    }
}

impl ConstraintSpec {
    pub fn validate(&self) -> Result<(), CodecError> {
        if !(0.0 <= self.gc_min && self.gc_min <= self.gc_max && self.gc_max <= 1.0) || self.max_homopolymer == 0 {
            return Err(CodecError::BadConstraints(format!("{self:?}")));
        }
        Ok(())
    }

    fn gc_ok(&self, gc: usize, len: usize) -> bool {
        if len == 0 {
            return true;
        }
        // Small tolerance so bounds like 0.45 * 20 = 9 are inclusive.
        let f = gc as f64 / len as f64;
        f >= self.gc_min - 1e-12 && f <= self.gc_max + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    GcLow,
    GcHigh,
    Homopolymer { run: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub gc_fraction: f64,
    pub max_run: usize,
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn gc_count(seq: &[u8]) -> usize {
    seq.iter().filter(|&&b| b == b'G' || b == b'C').count()
}

pub fn max_run(seq: &[u8]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for (i, &b) in seq.iter().enumerate() {
        run = if i > 0 && seq[i - 1] == b { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

pub fn constraints_check(seq: &str, c: &ConstraintSpec) -> ConstraintReport {
    let s = seq.as_bytes();
    let gc = gc_count(s);
    let run = max_run(s);
    let gc_fraction = if s.is_empty() { 0.0 } else { gc as f64 / s.len() as f64 };
    let mut violations = Vec::new();
    if !c.gc_ok(gc, s.len()) {
        violations.push(if gc_fraction < c.gc_min { Violation::GcLow } else { Violation::GcHigh });
    }
    if run > c.max_homopolymer {
        violations.push(Violation::Homopolymer { run });
    }
    ConstraintReport { gc_fraction, max_run: run, violations }
}

/// Fraction of all 4^n sequences passing `c`, by dynamic programming over
/// (GC count, last base class, run length).
pub fn acceptance_rate(n: usize, c: &ConstraintSpec) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let h = c.max_homopolymer;
    // state[gc][base][run-1] holds probability mass.
    let mut state = vec![vec![vec![0.0f64; h]; 4]; n + 1];
    for (b, &base) in BASES.iter().enumerate() {
        let g = (base == b'G' || base == b'C') as usize;
        state[g][b][0] += 0.25;
    }
    for _ in 1..n {
        let mut next = vec![vec![vec![0.0f64; h]; 4]; n + 1];
        for gc in 0..=n {
            for b in 0..4 {
                for r in 0..h {
                    let p = state[gc][b][r];
                    if p == 0.0 {
                        continue;
                    }
                    for (nb, &base) in BASES.iter().enumerate() {
                        let g = gc + (base == b'G' || base == b'C') as usize;
                        if nb == b {
                            if r + 1 < h {
                                next[g][nb][r + 1] += p * 0.25;
                            }
                        } else {
                            next[g][nb][0] += p * 0.25;
                        }
                    }
                }
            }
        }
        state = next;
    }
    (0..=n)
        .filter(|&gc| c.gc_ok(gc, n))
        .map(|gc| state[gc].iter().flatten().sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub header: String,
    pub seq: String,
}

pub fn write_fasta(records: &[FastaRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('>');
        out.push_str(&r.header);
        out.push('\n');
        out.push_str(&r.seq);
        out.push('\n');
    }
    out
}

/// Accepts multi-line bodies and blank lines.
pub fn parse_fasta(text: &str) -> Result<Vec<FastaRecord>, CodecError> {
    let mut out: Vec<FastaRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if let Some(h) = line.strip_prefix('>') {
            out.push(FastaRecord { header: h.trim().to_string(), seq: String::new() });
        } else if !line.is_empty() {
            let rec = out.last_mut().ok_or(CodecError::Fasta(i + 1))?;
            if let Some((p, c)) = line.char_indices().find(|(_, c)| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
                return Err(CodecError::InvalidBase(c, p));
            }
            rec.seq.push_str(line);
        }
    }
    Ok(out)
}
