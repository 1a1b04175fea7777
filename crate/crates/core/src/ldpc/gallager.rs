use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LdpcError, ParityMatrix};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GallagerSpec {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GallagerReport {
    pub attempts: usize,
    pub four_cycles: usize,
}

/// Builds H = [H1; H2; ...; HJ] where H1 row i covers columns iK..(i+1)K and
/// each further block is a seeded column permutation of H1. At most
/// `max_attempts` permutation draws are spent removing 4-cycles.
pub fn gallager_construct_with(
    spec: GallagerSpec,
    max_attempts: usize,
) -> Result<(ParityMatrix, GallagerReport), LdpcError> {
    let GallagerSpec { n, j, k, seed } = spec;
    if k == 0 || n == 0 || n % k != 0 {
        return Err(LdpcError::InvalidSpec(format!("K={k} must divide N={n}")));
    }
    if j < 2 {
        return Err(LdpcError::InvalidSpec(format!("J={j} must be at least 2")));
    }
    let band = n / k;
    let h1: Vec<Vec<usize>> = (0..band).map(|i| (i * k..(i + 1) * k).collect()).collect();
    let mut rng = rng_from_seed(seed);
    let mut rows = h1.clone();
    let mut attempts = 0;
    // Each permuted block starts from a random shuffle and is repaired by
    // random transpositions that do not increase the 4-cycle count.
    for _ in 1..j {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let build = |perm: &[usize]| -> Result<(Vec<Vec<usize>>, usize), LdpcError> {
            let mut cand = rows.clone();
            cand.extend(h1.iter().map(|r| r.iter().map(|&c| perm[c]).collect::<Vec<_>>()));
            let cycles = ParityMatrix::from_row_lists(n, cand.clone())?.four_cycles();
            Ok((cand, cycles))
        };
        let (mut cand, mut cycles) = build(&perm)?;
        attempts += 1;
        while cycles > 0 && attempts < max_attempts {
            attempts += 1;
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            perm.swap(a, b);
            let (next, c) = build(&perm)?;
            if c <= cycles {
                cand = next;
                cycles = c;
            } else {
                perm.swap(a, b);
            }
        }
        rows = cand;
    }
    let h = ParityMatrix::from_row_lists(n, rows)?;
    let four_cycles = h.four_cycles();
    log::debug!("gallager N={n} J={j} K={k}: {attempts} attempts, {four_cycles} four-cycles");
    Ok((h, GallagerReport { attempts, four_cycles }))
}

pub fn gallager_construct(spec: GallagerSpec) -> Result<ParityMatrix, LdpcError> {
    gallager_construct_with(spec, 200).map(|(h, _)| h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_degrees() {
        let h = gallager_construct(GallagerSpec { n: 12, j: 3, k: 6, seed: 1 }).unwrap();
        assert_eq!((h.rows(), h.cols()), (6, 12));
        assert_eq!(h.row(0), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(h.row(1), &[6, 7, 8, 9, 10, 11]);
        assert!(h.row_weights().iter().all(|&w| w == 6));
        assert!(h.col_weights().iter().all(|&w| w == 3));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gallager_construct(GallagerSpec { n: 10, j: 3, k: 4, seed: 0 }).is_err());
        assert!(gallager_construct(GallagerSpec { n: 12, j: 1, k: 6, seed: 0 }).is_err());
    }

    #[test]
    fn retries_reduce_cycles() {
        let spec = GallagerSpec { n: 96, j: 3, k: 6, seed: 5 };
        let (_, one) = gallager_construct_with(spec, 1).unwrap();
        let (_, many) = gallager_construct_with(spec, 40).unwrap();
        assert!(many.four_cycles <= one.four_cycles);
    }
}
