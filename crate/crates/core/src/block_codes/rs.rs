use std::collections::BTreeSet;

use super::algebraic::{berlekamp_massey, chien_search, forney, locator_from_powers, syndromes};
use super::gf::{FieldSpec, GaloisField};
use super::poly::Polynomial;
use super::{BlockCodeError, DecodeStatus, FailureReason};

/// Reed–Solomon parameters, in symbols. `shorten_by` leading zero symbols
/// of the natural-length code are never transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RsSpec {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub field: FieldSpec,
    pub shorten_by: usize,
}

impl RsSpec {
    /// RS(n, k) over `field`, shortened if n < 2^m - 1.
    pub fn new(field: FieldSpec, n: usize, k: usize) -> Result<Self, BlockCodeError> {
        let natural = field.order() - 1;
        if n > natural || k == 0 || k >= n || !(n - k).is_multiple_of(2) {
            return Err(BlockCodeError::InvalidParameters(format!(
                "RS({n},{k}) over GF(2^{}) needs k < n <= {natural} and even n-k",
                field.m
            )));
        }
        Ok(Self {
            n,
            k,
            t: (n - k) / 2,
            field,
            shorten_by: natural - n,
        })
    }

    pub fn standard(m: u32, n: usize, k: usize) -> Result<Self, BlockCodeError> {
        Self::new(FieldSpec::standard(m)?, n, k)
    }
}

#[derive(Debug, Clone)]
pub struct RsCode {
    spec: RsSpec,
    field: GaloisField,
    generator: Polynomial,
}

#[derive(Debug, Clone)]
pub struct RsDecoding {
    pub codeword: Vec<u16>,
    pub status: DecodeStatus,
    pub syndromes: Vec<u16>,
    /// Errata locator Λ(x) (erasures and errors).
    pub locator: Polynomial,
    /// Corrected indices into the codeword, with their error values.
    pub error_positions: Vec<usize>,
    pub error_values: Vec<u16>,
    pub erasures: usize,
}

impl RsDecoding {
    pub fn message(&self, k: usize) -> &[u16] {
        &self.codeword[..k]
    }

    /// Positions that held errors not flagged as erasures.
    pub fn errors(&self) -> usize {
        self.error_positions.len().saturating_sub(self.erasures)
    }
}

impl RsCode {
    pub fn new(spec: RsSpec) -> Result<Self, BlockCodeError> {
        let field = GaloisField::new(spec.field)?;
        let generator = (1..=2 * spec.t as i64).fold(Polynomial::one(), |acc, i| {
            acc.mul(&field, &Polynomial::new(vec![field.alpha_pow(i), 1]))
        });
        Ok(Self {
            spec,
            field,
            generator,
        })
    }

    pub fn spec(&self) -> RsSpec {
        self.spec
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// g(x) = Π_{i=1..2t} (x - α^i).
    pub fn generator(&self) -> &Polynomial {
        &self.generator
    }

    fn check_symbols(&self, s: &[u16]) -> Result<(), BlockCodeError> {
        match s.iter().find(|&&v| usize::from(v) >= self.field.order()) {
            Some(&v) => Err(BlockCodeError::SymbolOutOfRange {
                value: v,
                m: self.spec.field.m,
            }),
            None => Ok(()),
        }
    }

    pub fn encode(&self, msg: &[u16]) -> Result<Vec<u16>, BlockCodeError> {
        let RsSpec { n, k, t, .. } = self.spec;
        if msg.len() != k {
            return Err(BlockCodeError::WrongLength {
                expected: k,
                got: msg.len(),
            });
        }
        self.check_symbols(msg)?;
        let f = &self.field;
        let r = 2 * t;
        let mut buf = vec![0u16; n];
        buf[..k].copy_from_slice(msg);
        for i in 0..k {
            let coef = buf[i];
            if coef != 0 {
                for j in 1..=r {
                    buf[i + j] ^= f.mul(coef, self.generator.coeff(r - j));
                }
            }
        }
        let mut out = msg.to_vec();
        out.extend_from_slice(&buf[k..]);
        Ok(out)
    }

    /// Errors-and-erasures decoding: succeeds when 2e + s <= 2t.
    pub fn decode(&self, recv: &[u16], erasures: &[usize]) -> Result<RsDecoding, BlockCodeError> {
        let RsSpec { n, t, .. } = self.spec;
        if recv.len() != n {
            return Err(BlockCodeError::WrongLength {
                expected: n,
                got: recv.len(),
            });
        }
        self.check_symbols(recv)?;
        let erasure_set: BTreeSet<usize> = erasures.iter().copied().collect();
        if let Some(&p) = erasure_set.iter().find(|&&p| p >= n) {
            return Err(BlockCodeError::ErasureOutOfRange(p));
        }
        let f = &self.field;
        let synd = syndromes(f, recv, 2 * t);
        let mut out = RsDecoding {
            codeword: recv.to_vec(),
            status: DecodeStatus::Clean,
            syndromes: synd.clone(),
            locator: Polynomial::one(),
            error_positions: Vec::new(),
            error_values: Vec::new(),
            erasures: erasure_set.len(),
        };
        if synd.iter().all(|&s| s == 0) {
            return Ok(out);
        }
        let s = erasure_set.len();
        if s > 2 * t {
            out.status = DecodeStatus::Failed(FailureReason::TooManyErrata);
            return Ok(out);
        }
        let erasure_powers: Vec<u32> = erasure_set.iter().map(|&p| (n - 1 - p) as u32).collect();
        let gamma = locator_from_powers(f, &erasure_powers);
        let (locator, l) = berlekamp_massey(f, &synd, &gamma, s);
        out.locator = locator.clone();
        if l < s || 2 * l - s > 2 * t || locator.degree() != l {
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
        let Some(values) = forney(f, &synd, &locator, &powers) else {
            out.status = DecodeStatus::Failed(FailureReason::DegenerateLocator);
            return Ok(out);
        };
        let mut corrected = recv.to_vec();
        let mut fixes: Vec<(usize, u16)> = powers
            .iter()
            .zip(&values)
            .map(|(&e, &v)| (n - 1 - e as usize, v))
            .collect();
        fixes.sort_unstable();
        for &(p, v) in &fixes {
            corrected[p] ^= v;
        }
        if syndromes(f, &corrected, 2 * t).iter().any(|&x| x != 0) {
            out.status = DecodeStatus::Failed(FailureReason::ResidualSyndrome);
            return Ok(out);
        }
        out.codeword = corrected;
        out.error_positions = fixes.iter().map(|&(p, _)| p).collect();
        out.error_values = fixes.iter().map(|&(_, v)| v).collect();
        out.status = DecodeStatus::Corrected;
        Ok(out)
    }
}
