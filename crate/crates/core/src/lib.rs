//! Channel coding for DNA data storage.
//!
//! The crate covers the codes used to protect oligo pools (LT fountain,
//! watermark, BCH, Reed–Solomon, LDPC, polar), the DNA storage channel
//! (insertions, deletions, substitutions, dropout, uneven copies), base
//! mapping with biochemical constraints, concatenated archive pipelines and
//! a Monte Carlo harness for FER/BER curves.

pub mod base_codec;
pub mod bits;
pub mod block_codes;
pub mod channel;
pub mod fountain;
pub mod harness;
pub mod ldpc;
pub mod pipelines;
pub mod polar;
pub mod rng;
pub mod watermark;
