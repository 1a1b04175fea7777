//! Polar codes in natural (non bit-reversed) order: c = u · G_N with
//! G_N = [[G_{N/2}, 0], [G_{N/2}, G_{N/2}]], so the first half of c is
//! x ⊕ y and the second half is y, where x and y encode the two halves of u.

mod construct;
mod decode;

pub use construct::{
    bec_capacities, bhattacharyya, construct, construct_from_channel, genie_scores, reliability, ConstructionMethod, DesignChannel, PolarSpec,
    ReliabilityOrder,
};
pub use decode::{sc_decode, sc_decode_with, scl_decode, scl_decode_with, FKernel, PolarDecoding};

use crate::bits::BitSeq;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PolarError {
    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("k={k} exceeds N={n}")]
    TooManyInfoBits { k: usize, n: usize },
    #[error("expected length {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite LLR at {0}")]
    NonFiniteLlr(usize),
    #[error("design parameter {0} outside [0, 1]")]
    BadDesignParam(f64),
    #[error("invalid frozen mask: {0}")]
    BadMask(String),
    #[error("list size must be at least 1")]
    BadListSize,
}

/// In-place butterfly computing u · G_N.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                bits[i] ^= bits[i + half];
            }
        }
        half *= 2;
    }
}

/// Places `u_info` on the information positions, zeros elsewhere, and
/// applies the transform.
pub fn encode(u_info: &[u8], spec: &PolarSpec) -> Result<BitSeq, PolarError> {
    let u = spec.expand(u_info)?;
    let mut c = u;
    polar_transform(&mut c);
    Ok(c)
}
