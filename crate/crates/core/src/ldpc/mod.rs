//! Low-density parity-check codes: Gallager construction, a Gaussian
//! elimination encoder, an approximate-lower-triangular encoder, and
//! bit-flip / min-sum decoders.

mod alt;
mod bitflip;
mod gallager;
mod gauss;
mod matrix;
mod minsum;

pub use alt::AltForm;
pub use bitflip::{bitflip_decode, BitFlipOutcome};
pub use gallager::{gallager_construct, gallager_construct_with, GallagerReport, GallagerSpec};
pub use gauss::{gauss_generator, SystematicEncoder};
pub use matrix::ParityMatrix;
pub use minsum::{minsum_decode, MinSumConfig, MinSumOutcome};

pub(crate) use matrix::BitRow;

#[derive(Debug, thiserror::Error)]
pub enum LdpcError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid Gallager spec: {0}")]
    InvalidSpec(String),
    #[error("expected length {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("parity-check matrix has rank {rank} < {rows} rows")]
    RankDeficient {
        rank: usize,
        rows: usize,
        /// Linearly independent subset of the original rows.
        reduced: Box<ParityMatrix>,
    },
    #[error("LLR input contains a non-finite value at {0}")]
    NonFiniteLlr(usize),
    #[error("alist parse error: {0}")]
    Parse(String),
}

/// The 6x12 (J=3, K=6) example matrix shipped with the crate.
pub fn example_matrix() -> ParityMatrix {
    ParityMatrix::from_alist(include_str!("../../data/ldpc_12_3_6.alist"))
        .expect("bundled alist is well formed")
}
