use serde::{Deserialize, Serialize};

use super::{LdpcError, ParityMatrix};
use crate::bits::BitSeq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinSumConfig {
    pub max_iters: usize,
    /// Normalization factor applied to check messages; `None` is plain min-sum.
    pub scaling: Option<f64>,
}

impl Default for MinSumConfig {
    fn default() -> Self {
        Self { max_iters: 30, scaling: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSumOutcome {
    pub word: BitSeq,
    pub converged: bool,
    pub iterations: usize,
    pub posterior: Vec<f64>,
}

/// Flooding min-sum. Positive LLR means bit 0.
pub fn minsum_decode(h: &ParityMatrix, llrs: &[f64], cfg: MinSumConfig) -> Result<MinSumOutcome, LdpcError> {
    let n = h.cols();
    if llrs.len() != n {
        return Err(LdpcError::WrongLength { expected: n, got: llrs.len() });
    }
    if let Some(i) = llrs.iter().position(|x| !x.is_finite()) {
        return Err(LdpcError::NonFiniteLlr(i));
    }
    let scale = cfg.scaling.unwrap_or(1.0);
    // Edges enumerated row by row.
    let mut edge_var = Vec::new();
    let mut row_start = vec![0];
    for r in 0..h.rows() {
        edge_var.extend_from_slice(h.row(r));
        row_start.push(edge_var.len());
    }
    let mut q: Vec<f64> = edge_var.iter().map(|&v| llrs[v]).collect();
    let mut rmsg = vec![0.0; edge_var.len()];
    let mut post = llrs.to_vec();
    let decide = |p: &[f64]| -> BitSeq { p.iter().map(|&x| (x < 0.0) as u8).collect() };
    let mut word = decide(&post);
    if h.is_codeword(&word) {
        return Ok(MinSumOutcome { word, converged: true, iterations: 0, posterior: post });
    }
    for iter in 1..=cfg.max_iters {
        for r in 0..h.rows() {
            let (lo, hi) = (row_start[r], row_start[r + 1]);
            let mut sign = 1.0;
            let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
            for e in lo..hi {
                let x = q[e];
                if x < 0.0 {
                    sign = -sign;
                }
                let a = x.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in lo..hi {
                let s = if q[e] < 0.0 { -sign } else { sign };
                let mag = if e == arg { min2 } else { min1 };
                rmsg[e] = s * mag * scale;
            }
        }
        post.copy_from_slice(llrs);
        for (e, &v) in edge_var.iter().enumerate() {
            post[v] += rmsg[e];
        }
        for (e, &v) in edge_var.iter().enumerate() {
            q[e] = post[v] - rmsg[e];
        }
        word = decide(&post);
        if h.is_codeword(&word) {
            return Ok(MinSumOutcome { word, converged: true, iterations: iter, posterior: post });
        }
    }
    Ok(MinSumOutcome { word, converged: false, iterations: cfg.max_iters, posterior: post })
}
