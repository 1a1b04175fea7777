use super::{BitRow, LdpcError, ParityMatrix};
use crate::bits::BitSeq;

/// Systematic encoder from Gaussian elimination of H.
///
/// After reduction every row has a pivot column; the remaining columns carry
/// the message. With columns reordered as [info | pivots] this is H_s = [P | I]
/// and the generator is G_s = [I | P^T].
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Row i: which info bits feed parity bit `parity_positions[i]`.
    p_rows: Vec<BitRow>,
}

pub fn gauss_generator(h: &ParityMatrix) -> Result<SystematicEncoder, LdpcError> {
    let n = h.cols();
    let m = h.rows();
    let mut work: Vec<BitRow> = (0..m).map(|i| BitRow::from_indices(n, h.row(i))).collect();

    // Independent original rows, found by incremental insertion.
    let mut basis: Vec<BitRow> = Vec::new();
    let mut kept = Vec::new();
    for (i, r) in work.iter().enumerate() {
        let mut v = r.clone();
        for b in &basis {
            if v.get(b.leading().unwrap()) {
                v.xor_assign(b);
            }
        }
        if !v.is_zero() {
            let lead = v.leading().unwrap();
            for b in basis.iter_mut() {
                if b.get(lead) {
                    b.xor_assign(&v);
                }
            }
            basis.push(v);
            kept.push(i);
        }
    }
    if kept.len() < m {
        return Err(LdpcError::RankDeficient {
            rank: kept.len(),
            rows: m,
            reduced: Box::new(h.select_rows(&kept)),
        });
    }

    // Reduced row echelon form, pivots searched from the last column down.
    let mut pivots = Vec::with_capacity(m);
    let mut next = 0;
    for col in (0..n).rev() {
        if next == m {
            break;
        }
        let Some(p) = (next..m).find(|&r| work[r].get(col)) else { continue };
        work.swap(next, p);
        let pivot = work[next].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        next += 1;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let k = info_positions.len();
    let p_rows = work
        .iter()
        .map(|row| {
            let idx: Vec<usize> = info_positions
                .iter()
                .enumerate()
                .filter(|(_, &c)| row.get(c))
                .map(|(i, _)| i)
                .collect();
            BitRow::from_indices(k, &idx)
        })
        .collect();
    Ok(SystematicEncoder { n, info_positions, parity_positions: pivots, p_rows })
}

impl SystematicEncoder {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    /// Codeword columns that carry the message bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    pub fn encode(&self, u: &[u8]) -> Result<BitSeq, LdpcError> {
        if u.len() != self.k() {
            return Err(LdpcError::WrongLength { expected: self.k(), got: u.len() });
        }
        let mut c = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(u) {
            c[pos] = b & 1;
        }
        for (row, &pos) in self.p_rows.iter().zip(&self.parity_positions) {
            c[pos] = u.iter().enumerate().fold(0, |acc, (i, &b)| acc ^ (b & row.get(i) as u8));
        }
        Ok(c)
    }

    pub fn extract(&self, c: &[u8]) -> BitSeq {
        self.info_positions.iter().map(|&p| c[p]).collect()
    }

    /// G_s = [I | P^T] in the [info | parity] column order.
    pub fn systematic_generator(&self) -> Vec<Vec<u8>> {
        let k = self.k();
        let r = self.parity_positions.len();
        (0..k)
            .map(|i| {
                let mut g = vec![0u8; k + r];
                g[i] = 1;
                for (j, row) in self.p_rows.iter().enumerate() {
                    g[k + j] = row.get(i) as u8;
                }
                g
            })
            .collect()
    }

    /// Column order mapping systematic position -> original column.
    pub fn column_order(&self) -> Vec<usize> {
        self.info_positions.iter().chain(&self.parity_positions).copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_deficient_reports_reduced_rows() {
        let h = ParityMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![1, 0, 1, 0]]).unwrap();
        match gauss_generator(&h) {
            Err(LdpcError::RankDeficient { rank, reduced, .. }) => {
                assert_eq!(rank, 2);
                assert_eq!(reduced.rows(), 2);
                assert!(gauss_generator(&reduced).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn systematic_identity_block() {
        let enc = gauss_generator(&super::super::example_matrix()).unwrap();
        let g = enc.systematic_generator();
        for (i, row) in g.iter().enumerate() {
            for j in 0..enc.k() {
                assert_eq!(row[j], (i == j) as u8);
            }
        }
    }
}
