use super::LdpcError;

/// Sparse binary parity-check matrix kept as both row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl ParityMatrix {
    /// Builds from per-row column lists. Duplicate entries cancel (GF(2)).
    pub fn from_row_lists(cols: usize, rows: Vec<Vec<usize>>) -> Result<Self, LdpcError> {
        let mut row_adj = Vec::with_capacity(rows.len());
        for r in rows {
            let mut r = r;
            r.sort_unstable();
            let mut dedup: Vec<usize> = Vec::with_capacity(r.len());
            for c in r {
                if c >= cols {
                    return Err(LdpcError::InvalidMatrix(format!("column {c} >= {cols}")));
                }
                if dedup.last() == Some(&c) {
                    dedup.pop();
                } else {
                    dedup.push(c);
                }
            }
            row_adj.push(dedup);
        }
        let mut col_adj = vec![Vec::new(); cols];
        for (i, r) in row_adj.iter().enumerate() {
            for &c in r {
                col_adj[c].push(i);
            }
        }
        Ok(Self {
            rows: row_adj.len(),
            cols,
            row_adj,
            col_adj,
        })
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self, LdpcError> {
        let cols = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != cols) {
            return Err(LdpcError::InvalidMatrix("ragged rows".into()));
        }
        Self::from_row_lists(
            cols,
            dense
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &b)| b & 1 == 1).map(|(j, _)| j).collect())
                .collect(),
        )
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.row_adj
            .iter()
            .map(|r| {
                let mut d = vec![0u8; self.cols];
                for &c in r {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_adj[i]
    }

    pub fn col(&self, j: usize) -> &[usize] {
        &self.col_adj[j]
    }

    pub fn row_adj_iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.row_adj.iter().cloned()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row_adj[i].binary_search(&j).is_ok()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_adj.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.col_adj.iter().map(Vec::len).collect()
    }

    /// H·c^T over GF(2).
    pub fn syndrome(&self, c: &[u8]) -> Vec<u8> {
        self.row_adj
            .iter()
            .map(|r| r.iter().fold(0u8, |acc, &j| acc ^ (c[j] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.cols && self.syndrome(c).iter().all(|&s| s == 0)
    }

    /// Row view and column view describe the same entries.
    pub fn is_consistent(&self) -> bool {
        let mut count = 0;
        for (i, r) in self.row_adj.iter().enumerate() {
            for &c in r {
                if !self.col_adj[c].contains(&i) {
                    return false;
                }
                count += 1;
            }
        }
        count == self.col_adj.iter().map(Vec::len).sum::<usize>()
    }

    /// Number of length-4 cycles in the Tanner graph.
    pub fn four_cycles(&self) -> usize {
        let mut total = 0;
        for a in 0..self.rows {
            for b in a + 1..self.rows {
                let shared = intersect_count(&self.row_adj[a], &self.row_adj[b]);
                total += shared * shared.saturating_sub(1) / 2;
            }
        }
        total
    }

    /// New matrix whose column `p` is column `order[p]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        let mut inv = vec![0; self.cols];
        for (p, &c) in order.iter().enumerate() {
            inv[c] = p;
        }
        Self::from_row_lists(
            self.cols,
            self.row_adj.iter().map(|r| r.iter().map(|&c| inv[c]).collect()).collect(),
        )
        .expect("permutation keeps indices in range")
    }

    pub fn select_rows(&self, keep: &[usize]) -> Self {
        Self::from_row_lists(self.cols, keep.iter().map(|&i| self.row_adj[i].clone()).collect())
            .expect("rows already valid")
    }

    /// Serializes in MacKay's alist layout (1-based, zero padded).
    pub fn to_alist(&self) -> String {
        let cw = self.col_weights();
        let rw = self.row_weights();
        let max_c = cw.iter().copied().max().unwrap_or(0);
        let max_r = rw.iter().copied().max().unwrap_or(0);
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = format!("{} {}\n{} {}\n{}\n{}\n", self.cols, self.rows, max_c, max_r, join(&cw), join(&rw));
        for c in &self.col_adj {
            let mut l: Vec<usize> = c.iter().map(|&x| x + 1).collect();
            l.resize(max_c, 0);
            s.push_str(&join(&l));
            s.push('\n');
        }
        for r in &self.row_adj {
            let mut l: Vec<usize> = r.iter().map(|&x| x + 1).collect();
            l.resize(max_r, 0);
            s.push_str(&join(&l));
            s.push('\n');
        }
        s
    }

    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| LdpcError::Parse(format!("not an integer: {t:?}")))
        });
        let mut next = || nums.next().unwrap_or(Err(LdpcError::Parse("unexpected end of alist".into())));
        let cols = next()?;
        let rows = next()?;
        let max_c = next()?;
        let max_r = next()?;
        let cw: Vec<usize> = (0..cols).map(|_| next()).collect::<Result<_, _>>()?;
        let rw: Vec<usize> = (0..rows).map(|_| next()).collect::<Result<_, _>>()?;
        let mut col_lists = Vec::with_capacity(cols);
        for &w in &cw {
            let entries: Vec<usize> = (0..max_c).map(|_| next()).collect::<Result<_, _>>()?;
            col_lists.push(entries.into_iter().filter(|&x| x > 0).map(|x| x - 1).collect::<Vec<_>>());
            if col_lists.last().unwrap().len() != w {
                return Err(LdpcError::Parse("column degree mismatch".into()));
            }
        }
        let mut row_lists = Vec::with_capacity(rows);
        for &w in &rw {
            let entries: Vec<usize> = (0..max_r).map(|_| next()).collect::<Result<_, _>>()?;
            let r: Vec<usize> = entries.into_iter().filter(|&x| x > 0).map(|x| x - 1).collect();
            if r.len() != w {
                return Err(LdpcError::Parse("row degree mismatch".into()));
            }
            row_lists.push(r);
        }
        let h = Self::from_row_lists(cols, row_lists)?;
        for (j, c) in col_lists.iter().enumerate() {
            let mut c = c.clone();
            c.sort_unstable();
            if c != h.col_adj[j] {
                return Err(LdpcError::Parse(format!("column {} disagrees with rows", j + 1)));
            }
        }
        Ok(h)
    }
}

fn intersect_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Dense GF(2) row packed into u64 words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow(pub Vec<u64>);

impl BitRow {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut r = Self::zeros(n);
        for &i in idx {
            r.flip(i);
        }
        r
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Highest set bit below `n`.
    pub fn leading(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}
