use std::collections::BTreeSet;

use super::algebraic::{berlekamp_massey, chien_search, syndromes};
use super::gf::{FieldSpec, GaloisField};
use super::poly::Polynomial;
use super::{BlockCodeError, DecodeStatus, FailureReason};
use crate::bits::BitSeq;

/// Parameters of a primitive narrow-sense binary BCH code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BchSpec {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub field: FieldSpec,
}

/// Binary BCH codec with a precomputed generator polynomial.
#[derive(Debug, Clone)]
pub struct BchCode {
    spec: BchSpec,
    field: GaloisField,
    /// Binary generator, lowest degree first.
    generator: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct BchDecoding {
    pub codeword: BitSeq,
    pub status: DecodeStatus,
    /// S_1..S_2t of the received word.
    pub syndromes: Vec<u16>,
    /// σ(x) from Berlekamp–Massey.
    pub locator: Polynomial,
    /// Error locators as exponents: an error at x^e is reported as e.
    pub error_powers: Vec<u32>,
    /// Flipped indices into the codeword.
    pub error_positions: Vec<usize>,
}

impl BchDecoding {
    pub fn message(&self, k: usize) -> &[u8] {
        &self.codeword[..k]
    }
}

fn cyclotomic_coset(i: usize, n: usize) -> Vec<usize> {
    let mut coset = vec![i % n];
    let mut j = (2 * i) % n;
    while j != i % n {
        coset.push(j);
        j = (2 * j) % n;
    }
    coset
}

/// Minimal polynomial of α^i over GF(2), lowest degree first.
pub fn minimal_polynomial(f: &GaloisField, i: usize) -> Vec<u8> {
    let n = f.group_order();
    let p = cyclotomic_coset(i, n).iter().fold(Polynomial::one(), |acc, &j| {
        acc.mul(f, &Polynomial::new(vec![f.alpha_pow(j as i64), 1]))
    });
    p.coeffs.iter().map(|&c| c as u8).collect()
}

impl BchCode {
    /// Length-(2^m - 1) code correcting `t` errors over the standard field.
    pub fn new(m: u32, t: usize) -> Result<Self, BlockCodeError> {
        Self::with_field(FieldSpec::standard(m)?, t)
    }

    pub fn with_field(field_spec: FieldSpec, t: usize) -> Result<Self, BlockCodeError> {
        let field = GaloisField::new(field_spec)?;
        let n = field.group_order();
        if t == 0 || 2 * t >= n {
            return Err(BlockCodeError::InvalidParameters(format!(
                "t={t} invalid for n={n}"
            )));
        }
        // LCM of m_1, m_3, ..., m_{2t-1} is the product over the union of
        // their cyclotomic cosets.
        let roots: BTreeSet<usize> = (1..2 * t)
            .step_by(2)
            .flat_map(|i| cyclotomic_coset(i, n))
            .collect();
        let g = roots.iter().fold(Polynomial::one(), |acc, &j| {
            acc.mul(&field, &Polynomial::new(vec![field.alpha_pow(j as i64), 1]))
        });
        debug_assert!(g.coeffs.iter().all(|&c| c <= 1));
        let generator: Vec<u8> = g.coeffs.iter().map(|&c| c as u8).collect();
        let k = n - (generator.len() - 1);
        if k == 0 {
            return Err(BlockCodeError::InvalidParameters(format!(
                "t={t} leaves no information bits for n={n}"
            )));
        }
        Ok(Self {
            spec: BchSpec {
                n,
                k,
                t,
                field: field_spec,
            },
            field,
            generator,
        })
    }

    pub fn spec(&self) -> BchSpec {
        self.spec
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// g(x), binary coefficients lowest degree first; deg g = n - k.
    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    pub fn encode(&self, msg: &[u8]) -> Result<BitSeq, BlockCodeError> {
        let BchSpec { n, k, .. } = self.spec;
        if msg.len() != k {
            return Err(BlockCodeError::WrongLength {
                expected: k,
                got: msg.len(),
            });
        }
        let r = n - k;
        let mut buf = vec![0u8; n];
        buf[..k].copy_from_slice(msg);
        // Long division of x^(n-k) m(x) by g(x), high degree first.
        for i in 0..k {
            if buf[i] & 1 == 1 {
                for j in 1..=r {
                    buf[i + j] ^= self.generator[r - j];
                }
            }
        }
        let mut out = msg.to_vec();
        out.extend_from_slice(&buf[k..]);
        Ok(out)
    }

    /// Remainder of the received polynomial modulo g(x); all-zero for
    /// codewords.
    pub fn remainder(&self, word: &[u8]) -> Vec<u8> {
        let r = self.generator.len() - 1;
        let mut buf = word.to_vec();
        for i in 0..word.len().saturating_sub(r) {
            if buf[i] & 1 == 1 {
                for j in 0..=r {
                    buf[i + j] ^= self.generator[r - j];
                }
            }
        }
        buf[word.len().saturating_sub(r)..].to_vec()
    }

    pub fn decode(&self, recv: &[u8]) -> Result<BchDecoding, BlockCodeError> {
        let BchSpec { n, t, .. } = self.spec;
        if recv.len() != n {
            return Err(BlockCodeError::WrongLength {
                expected: n,
                got: recv.len(),
            });
        }
        let f = &self.field;
        let word: Vec<u16> = recv.iter().map(|&b| u16::from(b & 1)).collect();
        let synd = syndromes(f, &word, 2 * t);
        let mut out = BchDecoding {
            codeword: recv.to_vec(),
            status: DecodeStatus::Clean,
            syndromes: synd.clone(),
            locator: Polynomial::one(),
            error_powers: Vec::new(),
            error_positions: Vec::new(),
        };
        if synd.iter().all(|&s| s == 0) {
            return Ok(out);
        }
        let (locator, l) = berlekamp_massey(f, &synd, &Polynomial::one(), 0);
        out.locator = locator.clone();
        if l > t || locator.degree() != l {
            out.status = DecodeStatus::Failed(FailureReason::TooManyErrata);
            return Ok(out);
        }
        let powers = chien_search(f, &locator, n);
        if powers.len() != locator.degree() {
            out.status = DecodeStatus::Failed(FailureReason::RootCountMismatch {
                degree: locator.degree(),
                roots: powers.len(),
            });
            return Ok(out);
        }
        let mut corrected = recv.to_vec();
        let mut positions: Vec<usize> = powers.iter().map(|&e| n - 1 - e as usize).collect();
        for &p in &positions {
            corrected[p] ^= 1;
        }
        let check: Vec<u16> = corrected.iter().map(|&b| u16::from(b)).collect();
        if syndromes(f, &check, 2 * t).iter().any(|&s| s != 0) {
            out.status = DecodeStatus::Failed(FailureReason::ResidualSyndrome);
            return Ok(out);
        }
        positions.sort_unstable();
        let mut powers = powers;
        powers.sort_unstable_by(|a, b| b.cmp(a));
        out.codeword = corrected;
        out.error_powers = powers;
        out.error_positions = positions;
        out.status = DecodeStatus::Corrected;
        Ok(out)
    }
}
