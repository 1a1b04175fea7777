//! Brute-force oracle for the watermark decoder: walks every per-slot event
//! (insertion run length, then delete or transmit) consistent with the
//! received string and sums path probabilities straight from the channel's
//! generative description.
#![allow(dead_code)]

pub struct PathSum {
    /// P(recv).
    pub evidence: f64,
    /// joint[j][x + n] = P(x_j = x, recv) for drifts -n..=n+|recv|.
    pub joint: Vec<Vec<f64>>,
    pub offset: usize,
    pub paths: u64,
}

pub struct SlotModel<'a> {
    pub expected: &'a [u8],
    pub flip: &'a [f64],
    pub p_i: f64,
    pub p_d: f64,
    pub cap: usize,
}

impl SlotModel<'_> {
    fn run_prob(&self, k: usize) -> f64 {
        if k == 0 {
            1.0 - self.p_i
        } else {
            self.p_i.powi(k as i32) * (1.0 - self.p_i) / (1.0 - self.p_i.powi(self.cap as i32))
        }
    }
}

pub fn path_sum(recv: &[u8], model: &SlotModel, with_marginals: bool) -> PathSum {
    let n = model.expected.len();
    let offset = n;
    let width = 2 * n + recv.len() + 1;
    let mut out = PathSum {
        evidence: 0.0,
        joint: if with_marginals { vec![vec![0.0; width]; n + 1] } else { Vec::new() },
        offset,
        paths: 0,
    };
    let mut positions = vec![0usize; n + 1];
    walk(recv, model, 0, 0, 1.0, &mut positions, &mut out);
    out
}

fn walk(recv: &[u8], m: &SlotModel, j: usize, pos: usize, prob: f64, positions: &mut [usize], out: &mut PathSum) {
    let n = m.expected.len();
    positions[j] = pos;
    if j == n {
        if pos == recv.len() {
            out.evidence += prob;
            out.paths += 1;
            if !out.joint.is_empty() {
                for (jj, &p) in positions.iter().enumerate() {
                    out.joint[jj][p + out.offset - jj] += prob;
                }
            }
        }
        return;
    }
    if pos > recv.len() || recv.len() - pos > (m.cap + 1) * (n - j) {
        return;
    }
    let p_del = m.p_d / (1.0 - m.p_i);
    for k in 0..=m.cap {
        if pos + k > recv.len() {
            break;
        }
        let base = prob * m.run_prob(k) * 0.5f64.powi(k as i32);
        if base == 0.0 {
            continue;
        }
        walk(recv, m, j + 1, pos + k, base * p_del, positions, out);
        if pos + k < recv.len() {
            let hit = recv[pos + k] == m.expected[j];
            let e = if hit { 1.0 - m.flip[j] } else { m.flip[j] };
            walk(recv, m, j + 1, pos + k + 1, base * (1.0 - p_del) * e, positions, out);
        }
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
