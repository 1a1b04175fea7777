use super::{LdpcError, ParityMatrix};
use crate::bits::BitSeq;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFlipOutcome {
    pub word: BitSeq,
    pub converged: bool,
    pub iterations: usize,
    /// Failed-check count per bit on the first iteration (empty if clean).
    pub first_counts: Vec<usize>,
}

/// Hard-decision bit flipping. With `threshold = Some(d)` every bit with more
/// than `d` failed checks flips; with `None` every bit at the maximum count
/// flips.
pub fn bitflip_decode(
    h: &ParityMatrix,
    v: &[u8],
    max_iters: usize,
    threshold: Option<usize>,
) -> Result<BitFlipOutcome, LdpcError> {
    if v.len() != h.cols() {
        return Err(LdpcError::WrongLength { expected: h.cols(), got: v.len() });
    }
    let mut word: BitSeq = v.iter().map(|b| b & 1).collect();
    let mut first_counts = Vec::new();
    for iter in 0..=max_iters {
        let syn = h.syndrome(&word);
        if syn.iter().all(|&s| s == 0) {
            return Ok(BitFlipOutcome { word, converged: true, iterations: iter, first_counts });
        }
        if iter == max_iters {
            break;
        }
        let counts: Vec<usize> = (0..h.cols())
            .map(|j| h.col(j).iter().filter(|&&r| syn[r] == 1).count())
            .collect();
        let cut = match threshold {
            Some(d) => d + 1,
            None => counts.iter().copied().max().unwrap_or(0).max(1),
        };
        let mut flipped = false;
        for (b, &f) in word.iter_mut().zip(&counts) {
            if f >= cut {
                *b ^= 1;
                flipped = true;
            }
        }
        if iter == 0 {
            first_counts = counts;
        }
        if !flipped {
            return Ok(BitFlipOutcome { word, converged: false, iterations: iter, first_counts });
        }
    }
    Ok(BitFlipOutcome { word, converged: false, iterations: max_iters, first_counts })
}
