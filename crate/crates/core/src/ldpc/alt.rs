use super::{BitRow, LdpcError, ParityMatrix};
use crate::bits::BitSeq;

/// H with rows and columns permuted into approximate lower triangular form
///
/// ```text
///        k     g    m-g
///     [  A  |  B  |  T  ]   m-g
///     [  C  |  D  |  E  ]   g
/// ```
///
/// with T lower triangular and unit diagonal. Codewords are c = [u, p1, p2]
/// in the permuted order.
#[derive(Debug, Clone)]
pub struct AltForm {
    permuted: ParityMatrix,
    k: usize,
    gap: usize,
    /// Permuted column position -> original column.
    col_order: Vec<usize>,
    /// Permuted row position -> original row.
    row_order: Vec<usize>,
    /// (-D + E T^-1 B)^-1 over GF(2), g x g.
    phi_inv: Vec<BitRow>,
}

impl AltForm {
    /// Greedy triangulation: repeatedly take the column touching the fewest
    /// remaining rows (ties to the highest index), use its lowest row as the
    /// next diagonal entry and push its other rows to the gap.
    pub fn new(h: &ParityMatrix) -> Result<Self, LdpcError> {
        let (m, n) = (h.rows(), h.cols());
        let mut row_live = vec![true; m];
        let mut col_live = vec![true; n];
        let mut live_rows = m;
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut gap_rows: Vec<usize> = Vec::new();
        while live_rows > 0 {
            let mut best: Option<(usize, usize)> = None;
            for j in 0..n {
                if !col_live[j] {
                    continue;
                }
                let d = h.col(j).iter().filter(|&&r| row_live[r]).count();
                if d >= 1 && best.is_none_or(|(bd, _)| d <= bd) {
                    best = Some((d, j));
                }
            }
            let Some((_, j)) = best else {
                gap_rows.extend((0..m).filter(|&r| row_live[r]));
                break;
            };
            let mut rs: Vec<usize> = h.col(j).iter().copied().filter(|&r| row_live[r]).collect();
            rs.sort_unstable();
            pairs.push((rs[0], j));
            gap_rows.extend_from_slice(&rs[1..]);
            for r in rs {
                row_live[r] = false;
                live_rows -= 1;
            }
            col_live[j] = false;
        }
        pairs.reverse();
        let t = pairs.len();
        let g = gap_rows.len();
        let t_rows: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let t_cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();

        let dense: Vec<BitRow> = (0..m).map(|i| BitRow::from_indices(n, h.row(i))).collect();
        let solve_t = |rhs: &[u8]| -> Vec<u8> {
            let mut x = vec![0u8; t];
            for i in 0..t {
                let mut s = rhs[i];
                for kk in 0..i {
                    if x[kk] == 1 && dense[t_rows[i]].get(t_cols[kk]) {
                        s ^= 1;
                    }
                }
                x[i] = s;
            }
            x
        };
        // Effective gap-row contribution of a non-T column: C_j + E T^-1 A_j.
        let effective = |j: usize| -> BitRow {
            let top: Vec<u8> = t_rows.iter().map(|&r| dense[r].get(j) as u8).collect();
            let x = solve_t(&top);
            let mut out = BitRow::zeros(g);
            for (gi, &gr) in gap_rows.iter().enumerate() {
                let mut s = dense[gr].get(j) as u8;
                for kk in 0..t {
                    if x[kk] == 1 && dense[gr].get(t_cols[kk]) {
                        s ^= 1;
                    }
                }
                if s == 1 {
                    out.flip(gi);
                }
            }
            out
        };

        let mut is_t = vec![false; n];
        for &c in &t_cols {
            is_t[c] = true;
        }
        let mut p1: Vec<usize> = Vec::new();
        let mut p1_vecs: Vec<BitRow> = Vec::new();
        let mut basis: Vec<BitRow> = Vec::new();
        for j in (0..n).rev().filter(|&j| !is_t[j]) {
            if p1.len() == g {
                break;
            }
            let v = effective(j);
            let mut w = v.clone();
            for b in &basis {
                if w.get(b.leading().unwrap()) {
                    w.xor_assign(b);
                }
            }
            if !w.is_zero() {
                let lead = w.leading().unwrap();
                for b in basis.iter_mut() {
                    if b.get(lead) {
                        b.xor_assign(&w);
                    }
                }
                basis.push(w);
                p1.push(j);
                p1_vecs.push(v);
            }
        }
        if p1.len() < g {
            let rank = m - g + p1.len();
            let enc = super::gauss_generator(h);
            let reduced = match enc {
                Err(LdpcError::RankDeficient { reduced, .. }) => reduced,
                _ => Box::new(h.clone()),
            };
            return Err(LdpcError::RankDeficient { rank, rows: m, reduced });
        }
        let mut is_p1 = vec![false; n];
        for &c in &p1 {
            is_p1[c] = true;
        }
        let info: Vec<usize> = (0..n).filter(|&j| !is_t[j] && !is_p1[j]).collect();
        let k = info.len();

        let phi_inv = invert(&p1_vecs, g).expect("p1 columns chosen independent");
        let col_order: Vec<usize> = info.iter().chain(&p1).chain(&t_cols).copied().collect();
        let row_order: Vec<usize> = t_rows.iter().chain(&gap_rows).copied().collect();
        let permuted = h.select_rows(&row_order).permute_columns(&col_order);
        Ok(Self { permuted, k, gap: g, col_order, row_order, phi_inv })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gap(&self) -> usize {
        self.gap
    }

    pub fn n(&self) -> usize {
        self.permuted.cols()
    }

    pub fn permuted(&self) -> &ParityMatrix {
        &self.permuted
    }

    pub fn col_order(&self) -> &[usize] {
        &self.col_order
    }

    pub fn row_order(&self) -> &[usize] {
        &self.row_order
    }

    /// Original columns that carry u, in the order u is consumed.
    pub fn info_positions(&self) -> &[usize] {
        &self.col_order[..self.k]
    }

    fn t_len(&self) -> usize {
        self.permuted.rows() - self.gap
    }

    /// Returns [u, p1, p2] in permuted column order.
    pub fn encode_permuted(&self, u: &[u8]) -> Result<BitSeq, LdpcError> {
        if u.len() != self.k {
            return Err(LdpcError::WrongLength { expected: self.k, got: u.len() });
        }
        let (k, g, t) = (self.k, self.gap, self.t_len());
        let h = &self.permuted;
        let t0 = k + g;
        let partial = |row: usize, lo: usize, hi: usize, x: &[u8]| -> u8 {
            h.row(row)
                .iter()
                .filter(|&&c| c >= lo && c < hi)
                .fold(0, |acc, &c| acc ^ x[c - lo])
        };
        // Forward substitution through the unit lower triangular T.
        let solve_t = |rhs: Vec<u8>| -> Vec<u8> {
            let mut x = rhs;
            for i in 0..t {
                let s = h
                    .row(i)
                    .iter()
                    .filter(|&&c| c >= t0 && c < t0 + i)
                    .fold(0, |acc, &c| acc ^ x[c - t0]);
                x[i] ^= s;
            }
            x
        };
        let s_top: Vec<u8> = (0..t).map(|i| partial(i, 0, k, u)).collect();
        let s_bot: Vec<u8> = (0..g).map(|i| partial(t + i, 0, k, u)).collect();
        let y = solve_t(s_top.clone());
        let rhs: Vec<u8> = (0..g).map(|i| s_bot[i] ^ partial(t + i, t0, t0 + t, &y)).collect();
        let p1: Vec<u8> = self
            .phi_inv
            .iter()
            .map(|row| (0..g).fold(0, |acc, j| acc ^ (rhs[j] & row.get(j) as u8)))
            .collect();
        let top2: Vec<u8> = (0..t).map(|i| s_top[i] ^ partial(i, k, k + g, &p1)).collect();
        let p2 = solve_t(top2);
        let mut c = u.iter().map(|b| b & 1).collect::<Vec<_>>();
        c.extend(p1);
        c.extend(p2);
        Ok(c)
    }

    /// Codeword in the original column order of H.
    pub fn encode(&self, u: &[u8]) -> Result<BitSeq, LdpcError> {
        let cp = self.encode_permuted(u)?;
        let mut c = vec![0u8; cp.len()];
        for (p, &orig) in self.col_order.iter().enumerate() {
            c[orig] = cp[p];
        }
        Ok(c)
    }

    pub fn extract(&self, c: &[u8]) -> BitSeq {
        self.info_positions().iter().map(|&p| c[p]).collect()
    }
}

/// Inverse of the matrix whose columns are `cols` (each of length g).
fn invert(cols: &[BitRow], g: usize) -> Option<Vec<BitRow>> {
    // Row-major augmented [M | I].
    let mut rows: Vec<(BitRow, BitRow)> = (0..g)
        .map(|i| {
            let idx: Vec<usize> = (0..g).filter(|&j| cols[j].get(i)).collect();
            (BitRow::from_indices(g, &idx), BitRow::from_indices(g, &[i]))
        })
        .collect();
    for col in 0..g {
        let p = (col..g).find(|&r| rows[r].0.get(col))?;
        rows.swap(col, p);
        let pivot = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && row.0.get(col) {
                row.0.xor_assign(&pivot.0);
                row.1.xor_assign(&pivot.1);
            }
        }
    }
    Some(rows.into_iter().map(|(_, inv)| inv).collect())
}
