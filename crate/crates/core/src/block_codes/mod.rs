//! GF(2^m) arithmetic with binary BCH and Reed–Solomon codecs.
//!
//! Codewords are written highest degree first: index `p` of a length-`n`
//! word holds the coefficient of x^(n-1-p). Both codes are systematic, so
//! the message occupies the leading positions.

pub mod algebraic;
mod bch;
mod gf;
mod poly;
mod rs;

pub use bch::{minimal_polynomial, BchCode, BchDecoding, BchSpec};
pub use gf::{FieldElem, FieldSpec, GaloisField};
pub use poly::Polynomial;
pub use rs::{RsCode, RsDecoding, RsSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockCodeError {
    #[error("unsupported field degree m={0} (need 1..=16)")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("element {value} is outside GF(2^{m})")]
    SymbolOutOfRange { value: u16, m: u32 },
    #[error("field mismatch: expected GF(2^{expected}), got GF(2^{got})")]
    FieldMismatch { expected: u32, got: u32 },
    #[error("wrong length: expected {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("erasure position {0} out of range")]
    ErasureOutOfRange(usize),
}

/// Why a decode attempt gave up. Decoders never panic or error on noisy
/// input; they report one of these instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// More errata than the code can handle.
    TooManyErrata,
    /// Chien search found a different number of roots than deg Λ.
    RootCountMismatch { degree: usize, roots: usize },
    /// Λ' vanished at a root.
    DegenerateLocator,
    /// Corrections applied but syndromes still nonzero.
    ResidualSyndrome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    /// All syndromes zero; nothing changed.
    Clean,
    Corrected,
    Failed(FailureReason),
}

impl DecodeStatus {
    pub fn is_ok(&self) -> bool {
        !matches!(self, DecodeStatus::Failed(_))
    }
}
