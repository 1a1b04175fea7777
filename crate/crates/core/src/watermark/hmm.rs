use super::{IdsParams, WatermarkError, WatermarkSpec};

/// Insertion-run weights c_0 = 1, c_k = α_I P_i^k (k = 1..=I), so that
/// a run of k insertions followed by deletion has probability c_k P_d and
/// followed by transmission c_k P_t.
fn run_weights(p: &IdsParams, limit: usize) -> Vec<f64> {
    let alpha = 1.0 / (1.0 - p.p_i.powi(limit as i32));
    let mut c = vec![1.0; limit + 1];
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        *ck = alpha * p.p_i.powi(k as i32);
    }
    c
}

/// P(x_{i+1} = b | x_i = a).
pub fn transition_prob(a: i64, b: i64, p: &IdsParams, limit: usize) -> f64 {
    let c = run_weights(p, limit);
    let m = b - a;
    del_weight(&c, m, p) + trans_weight(&c, m, p)
}

#[inline]
fn del_weight(c: &[f64], m: i64, p: &IdsParams) -> f64 {
    usize::try_from(m + 1).ok().and_then(|k| c.get(k)).map_or(0.0, |ck| ck * p.p_d)
}

#[inline]
fn trans_weight(c: &[f64], m: i64, p: &IdsParams) -> f64 {
    usize::try_from(m).ok().and_then(|k| c.get(k)).map_or(0.0, |ck| ck * p.p_t())
}

/// Q_ab(s): probability of emitting `s` given the transition a -> b, where
/// the slot's expected bit is `w_bit` and a surviving bit flips with
/// probability `flip`.
pub fn emission_prob(
    a: i64,
    b: i64,
    s: &[u8],
    w_bit: u8,
    p: &IdsParams,
    flip: f64,
    limit: usize,
) -> Result<f64, WatermarkError> {
    let m = b - a;
    let expected = usize::try_from(m + 1).unwrap_or(0);
    if s.len() != expected {
        return Err(WatermarkError::SubstringLength { expected, got: s.len() });
    }
    let c = run_weights(p, limit);
    let pab = del_weight(&c, m, p) + trans_weight(&c, m, p);
    if pab == 0.0 {
        return Ok(0.0);
    }
    Ok(joint_weight(&c, m, p, s.last().copied(), w_bit, flip) / pab)
}

/// P_ab · Q_ab(s) using only the last received bit of s.
#[inline]
fn joint_weight(c: &[f64], m: i64, p: &IdsParams, last: Option<u8>, w_bit: u8, flip: f64) -> f64 {
    let mut v = del_weight(c, m, p) * 0.5f64.powi((m + 1) as i32);
    if m >= 0 {
        let hit = last.expect("transmission consumes a bit") == w_bit;
        v += trans_weight(c, m, p) * if hit { 1.0 - flip } else { flip } * 0.5f64.powi(m as i32);
    }
    v
}

/// Rescaled forward/backward tables over slots 0..=N and drifts -M..=M.
#[derive(Debug, Clone)]
pub struct DriftLattice {
    pub max_drift: usize,
    pub slots: usize,
    pub recv_len: usize,
    /// forward[j][y + M], normalized to sum 1 per j.
    pub forward: Vec<Vec<f64>>,
    pub backward: Vec<Vec<f64>>,
    /// Cumulative ln of the normalizers removed from forward[j].
    pub forward_log_scale: Vec<f64>,
    pub backward_log_scale: Vec<f64>,
    limit: usize,
    weights: Vec<f64>,
}

struct Stepper<'a> {
    recv: &'a [u8],
    /// del[m + 1] = c_{m+1} P_d / 2^{m+1} and trans[m] = c_m P_t / 2^m for
    /// a drift jump of m.
    del: Vec<f64>,
    trans: Vec<f64>,
    limit: i64,
    m: i64,
}

impl<'a> Stepper<'a> {
    fn new(recv: &'a [u8], p: &IdsParams, c: &[f64], limit: usize, m: usize) -> Self {
        let del = (0..=limit + 1).map(|k| del_weight(c, k as i64 - 1, p) * 0.5f64.powi(k as i32)).collect();
        let trans = (0..=limit).map(|k| trans_weight(c, k as i64, p) * 0.5f64.powi(k as i32)).collect();
        Self { recv, del, trans, limit: limit as i64, m: m as i64 }
    }
}

impl Stepper<'_> {
    /// One slot of the forward recursion applied to `v`, written to `out`.
    fn forward_into(&self, j: usize, v: &[f64], w_bit: u8, flip: f64, out: &mut [f64]) {
        let m = self.m;
        out.fill(0.0);
        for (ai, &fa) in v.iter().enumerate() {
            if fa == 0.0 {
                continue;
            }
            let a = ai as i64 - m;
            for b in (a - 1).max(-m)..=(a + self.limit).min(m) {
                if let Some(w) = self.weight(j, a, b, w_bit, flip) {
                    out[(b + m) as usize] += fa * w;
                }
            }
        }
    }

    fn forward(&self, j: usize, v: &[f64], w_bit: u8, flip: f64) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.forward_into(j, v, w_bit, flip, &mut out);
        out
    }

    fn backward(&self, j: usize, next: &[f64], w_bit: u8, flip: f64) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; next.len()];
        for (ai, o) in out.iter_mut().enumerate() {
            let a = ai as i64 - m;
            let mut s = 0.0;
            for b in (a - 1).max(-m)..=(a + self.limit).min(m) {
                let nb = next[(b + m) as usize];
                if nb != 0.0 {
                    if let Some(w) = self.weight(j, a, b, w_bit, flip) {
                        s += w * nb;
                    }
                }
            }
            *o = s;
        }
        out
    }

    #[inline]
    fn weight(&self, j: usize, a: i64, b: i64, w_bit: u8, flip: f64) -> Option<f64> {
        let start = j as i64 + a;
        let end = j as i64 + b + 1;
        if start < 0 || end > self.recv.len() as i64 {
            return None;
        }
        let jump = b - a;
        let mut v = self.del[(jump + 1) as usize];
        if jump >= 0 {
            let hit = self.recv[(j as i64 + b) as usize] == w_bit;
            v += self.trans[jump as usize] * if hit { 1.0 - flip } else { flip };
        }
        Some(v)
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

pub fn forward_backward(recv: &[u8], spec: &WatermarkSpec, p: &IdsParams) -> Result<DriftLattice, WatermarkError> {
    let n_slots = spec.watermark.len();
    let m = spec.resolved_max_drift(p);
    let limit = spec.insertion_limit;
    if limit == 0 {
        return Err(WatermarkError::BadSpec("insertion limit must be at least 1".into()));
    }
    let terminal = recv.len() as i64 - n_slots as i64;
    if terminal.unsigned_abs() as usize > m {
        return Err(WatermarkError::DriftOverflow { drift: terminal, max: m });
    }
    let flip = p.effective_flip(spec.sparsity());
    let st = Stepper::new(recv, p, &run_weights(p, limit), limit, m);
    let width = 2 * m + 1;

    let mut forward = Vec::with_capacity(n_slots + 1);
    let mut fscale = Vec::with_capacity(n_slots + 1);
    let mut f0 = vec![0.0; width];
    f0[m] = 1.0;
    forward.push(f0);
    fscale.push(0.0);
    for j in 0..n_slots {
        let mut next = st.forward(j, &forward[j], spec.watermark[j], flip);
        let s = normalize(&mut next);
        if s == 0.0 {
            return Err(WatermarkError::DriftOverflow { drift: terminal, max: m });
        }
        fscale.push(fscale[j] + s.ln());
        forward.push(next);
    }

    let mut backward = vec![Vec::new(); n_slots + 1];
    let mut bscale = vec![0.0; n_slots + 1];
    let mut bn = vec![0.0; width];
    bn[(terminal + m as i64) as usize] = 1.0;
    backward[n_slots] = bn;
    for j in (0..n_slots).rev() {
        let mut prev = st.backward(j, &backward[j + 1], spec.watermark[j], flip);
        let s = normalize(&mut prev);
        if s == 0.0 {
            return Err(WatermarkError::DriftOverflow { drift: terminal, max: m });
        }
        bscale[j] = bscale[j + 1] + s.ln();
        backward[j] = prev;
    }
    Ok(DriftLattice {
        max_drift: m,
        slots: n_slots,
        recv_len: recv.len(),
        forward,
        backward,
        forward_log_scale: fscale,
        backward_log_scale: bscale,
        limit,
        weights: run_weights(p, limit),
    })
}

impl DriftLattice {
    /// ln P(recv) evaluated through slot j; the same for every j.
    pub fn log_evidence_at(&self, j: usize) -> f64 {
        let dot: f64 = self.forward[j].iter().zip(&self.backward[j]).map(|(f, b)| f * b).sum();
        dot.ln() + self.forward_log_scale[j] + self.backward_log_scale[j]
    }

    pub fn log_evidence(&self) -> f64 {
        self.log_evidence_at(self.slots)
    }

    /// P(x_j = y | recv) for y = -M..=M.
    pub fn drift_posterior(&self, j: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.forward[j].iter().zip(&self.backward[j]).map(|(f, b)| f * b).collect();
        normalize(&mut v);
        v
    }

    /// Row i is proportional to P(recv | d_i = d) for each symbol d,
    /// normalized to sum 1. Inside the symbol the expected bit becomes
    /// w ⊕ sparse(d) and the flip probability P_s.
    pub fn symbol_likelihoods(
        &self,
        recv: &[u8],
        spec: &WatermarkSpec,
        p: &IdsParams,
    ) -> Vec<Vec<f64>> {
        let n = spec.n();
        let st = Stepper::new(recv, p, &self.weights, self.limit, self.max_drift);
        let words: Vec<Vec<u8>> = (0..spec.q()).map(|d| spec.codebook.word_bits(d)).collect();
        let (mut cur, mut next) = (vec![0.0; 2 * self.max_drift + 1], vec![0.0; 2 * self.max_drift + 1]);
        (0..spec.num_symbols())
            .map(|i| {
                let j0 = i * n;
                let mut row: Vec<f64> = words
                    .iter()
                    .map(|word| {
                        cur.copy_from_slice(&self.forward[j0]);
                        for t in 0..n {
                            st.forward_into(j0 + t, &cur, spec.watermark[j0 + t] ^ word[t], p.p_s, &mut next);
                            std::mem::swap(&mut cur, &mut next);
                        }
                        cur.iter().zip(&self.backward[j0 + n]).map(|(a, b)| a * b).sum()
                    })
                    .collect();
                if normalize(&mut row) == 0.0 {
                    row = vec![1.0 / spec.q() as f64; spec.q()];
                }
                row
            })
            .collect()
    }
}

pub fn symbol_likelihoods(recv: &[u8], spec: &WatermarkSpec, p: &IdsParams) -> Result<Vec<Vec<f64>>, WatermarkError> {
    Ok(forward_backward(recv, spec, p)?.symbol_likelihoods(recv, spec, p))
}

/// Bitwise marginalization of q-ary rows (q = 2^bits, MSB first) into
/// LLRs ln P(bit = 0) / P(bit = 1), clamped to ±50.
pub fn likelihoods_to_bit_llrs(rows: &[Vec<f64>], bits: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.len() * bits);
    for row in rows {
        for b in 0..bits {
            let shift = bits - 1 - b;
            let (mut p0, mut p1) = (0.0, 0.0);
            for (d, &pr) in row.iter().enumerate() {
                if d >> shift & 1 == 0 {
                    p0 += pr;
                } else {
                    p1 += pr;
                }
            }
            out.push((p0.ln() - p1.ln()).clamp(-50.0, 50.0));
        }
    }
    out
}
