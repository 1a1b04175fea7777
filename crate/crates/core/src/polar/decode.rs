use serde::{Deserialize, Serialize};

use super::{PolarError, PolarSpec};
use crate::bits::BitSeq;

/// Check-node update used on the upper branch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FKernel {
    /// sign(a) sign(b) min(|a|, |b|)
    #[default]
    MinSum,
    /// 2 atanh(tanh(a/2) tanh(b/2))
    Exact,
}

impl FKernel {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            FKernel::MinSum => f_minsum(a, b),
            FKernel::Exact => f_exact(a, b),
        }
    }
}

#[inline]
fn f_minsum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

#[inline]
pub(crate) fn f_exact(a: f64, b: f64) -> f64 {
    f_minsum(a, b) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
fn g(a: f64, b: f64, x: u8) -> f64 {
    if x == 0 {
        b + a
    } else {
        b - a
    }
}

/// ln(1 + e^{-x}) without overflow.
#[inline]
fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecoding {
    pub info: BitSeq,
    pub u: BitSeq,
    pub codeword: BitSeq,
    /// Accumulated ln(1 + e^{-(1-2u) L}) penalty of the chosen path.
    pub path_metric: f64,
}

fn validate(llrs: &[f64], spec: &PolarSpec) -> Result<(), PolarError> {
    if llrs.len() != spec.n {
        return Err(PolarError::WrongLength { expected: spec.n, got: llrs.len() });
    }
    if let Some(i) = llrs.iter().position(|x| !x.is_finite()) {
        return Err(PolarError::NonFiniteLlr(i));
    }
    Ok(())
}

fn finish(spec: &PolarSpec, u: BitSeq, codeword: BitSeq, path_metric: f64) -> PolarDecoding {
    let info = spec.info_positions().into_iter().map(|p| u[p]).collect();
    PolarDecoding { info, u, codeword, path_metric }
}

pub fn sc_decode(llrs: &[f64], spec: &PolarSpec) -> Result<PolarDecoding, PolarError> {
    sc_decode_with(llrs, spec, FKernel::MinSum)
}

/// Successive cancellation; positive LLR favours 0 and a zero LLR decides 0.
pub fn sc_decode_with(llrs: &[f64], spec: &PolarSpec, kernel: FKernel) -> Result<PolarDecoding, PolarError> {
    validate(llrs, spec)?;
    let mut u = Vec::with_capacity(spec.n);
    let mut metric = 0.0;
    let c = sc_node(llrs, &spec.frozen, kernel, &mut u, &mut metric);
    Ok(finish(spec, u, c, metric))
}

fn sc_node(llr: &[f64], frozen: &[bool], kernel: FKernel, u: &mut BitSeq, metric: &mut f64) -> BitSeq {
    if llr.len() == 1 {
        let bit = if frozen[0] { 0 } else { (llr[0] < 0.0) as u8 };
        *metric += softplus_neg(if bit == 0 { llr[0] } else { -llr[0] });
        u.push(bit);
        return vec![bit];
    }
    let h = llr.len() / 2;
    let (a, b) = llr.split_at(h);
    let left: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| kernel.apply(x, y)).collect();
    let x = sc_node(&left, &frozen[..h], kernel, u, metric);
    let right: Vec<f64> = (0..h).map(|i| g(a[i], b[i], x[i])).collect();
    let y = sc_node(&right, &frozen[h..], kernel, u, metric);
    let mut c: BitSeq = x.iter().zip(&y).map(|(p, q)| p ^ q).collect();
    c.extend(y);
    c
}

#[derive(Clone)]
struct Path {
    metric: f64,
    u: BitSeq,
}

pub fn scl_decode(llrs: &[f64], spec: &PolarSpec, list: usize) -> Result<PolarDecoding, PolarError> {
    scl_decode_with(llrs, spec, list, FKernel::MinSum)
}

/// Successive cancellation list decoding. Each node returns the surviving
/// paths together with the index of the input path they descend from, so
/// lattice state never has to be copied.
pub fn scl_decode_with(
    llrs: &[f64],
    spec: &PolarSpec,
    list: usize,
    kernel: FKernel,
) -> Result<PolarDecoding, PolarError> {
    if list == 0 {
        return Err(PolarError::BadListSize);
    }
    validate(llrs, spec)?;
    let start = vec![Path { metric: 0.0, u: Vec::with_capacity(spec.n) }];
    let (paths, _, words) = scl_node(vec![llrs.to_vec()], &spec.frozen, start, list, kernel);
    let best = (0..paths.len())
        .min_by(|&a, &b| paths[a].metric.total_cmp(&paths[b].metric).then(a.cmp(&b)))
        .expect("list never empty");
    let Path { metric, u } = paths[best].clone();
    Ok(finish(spec, u, words[best].clone(), metric))
}

type NodeOut = (Vec<Path>, Vec<usize>, Vec<BitSeq>);

fn scl_node(llrs: Vec<Vec<f64>>, frozen: &[bool], paths: Vec<Path>, list: usize, kernel: FKernel) -> NodeOut {
    if frozen.len() == 1 {
        return scl_leaf(&llrs, frozen[0], paths, list);
    }
    let h = frozen.len() / 2;
    let left: Vec<Vec<f64>> = llrs
        .iter()
        .map(|l| (0..h).map(|i| kernel.apply(l[i], l[h + i])).collect())
        .collect();
    let (paths1, orig1, xs) = scl_node(left, &frozen[..h], paths, list, kernel);
    let right: Vec<Vec<f64>> = orig1
        .iter()
        .zip(&xs)
        .map(|(&o, x)| (0..h).map(|i| g(llrs[o][i], llrs[o][h + i], x[i])).collect())
        .collect();
    let (paths2, orig2, ys) = scl_node(right, &frozen[h..], paths1, list, kernel);
    let origin = orig2.iter().map(|&j| orig1[j]).collect();
    let words = orig2
        .iter()
        .zip(&ys)
        .map(|(&j, y)| {
            let mut c: BitSeq = xs[j].iter().zip(y).map(|(p, q)| p ^ q).collect();
            c.extend_from_slice(y);
            c
        })
        .collect();
    (paths2, origin, words)
}

fn scl_leaf(llrs: &[Vec<f64>], frozen: bool, paths: Vec<Path>, list: usize) -> NodeOut {
    let cost = |l: f64, bit: u8| softplus_neg(if bit == 0 { l } else { -l });
    if frozen {
        let origin = (0..paths.len()).collect();
        let mut out = paths;
        for (p, l) in out.iter_mut().zip(llrs) {
            p.metric += cost(l[0], 0);
            p.u.push(0);
        }
        let words = vec![vec![0u8]; out.len()];
        return (out, origin, words);
    }
    // Candidates ordered (path, bit) so a stable sort breaks ties toward
    // earlier paths and bit 0.
    let mut cand: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * paths.len());
    for (i, (p, l)) in paths.iter().zip(llrs).enumerate() {
        cand.push((p.metric + cost(l[0], 0), i, 0));
        cand.push((p.metric + cost(l[0], 1), i, 1));
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    cand.truncate(list);
    let mut out = Vec::with_capacity(cand.len());
    let mut origin = Vec::with_capacity(cand.len());
    let mut words = Vec::with_capacity(cand.len());
    for (metric, i, bit) in cand {
        let mut u = paths[i].u.clone();
        u.push(bit);
        out.push(Path { metric, u });
        origin.push(i);
        words.push(vec![bit]);
    }
    (out, origin, words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_kernel_matches_tanh_rule() {
        for &(a, b) in &[(0.3, -1.2), (5.0, 4.0), (-2.5, -0.1), (9.0, -11.0)] {
            let want = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
            assert!((f_exact(a, b) - want).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn single_bit_passthrough() {
        let spec = PolarSpec::from_info_set(1, &[0]).unwrap();
        assert_eq!(sc_decode(&[-0.4], &spec).unwrap().info, vec![1]);
        assert_eq!(sc_decode(&[2.0], &spec).unwrap().info, vec![0]);
        assert_eq!(scl_decode(&[-0.4], &spec, 4).unwrap().info, vec![1]);
    }

    #[test]
    fn rejects_bad_llrs() {
        let spec = PolarSpec::from_info_set(2, &[1]).unwrap();
        assert_eq!(sc_decode(&[1.0, f64::INFINITY], &spec), Err(PolarError::NonFiniteLlr(1)));
        assert!(matches!(scl_decode(&[1.0], &spec, 2), Err(PolarError::WrongLength { .. })));
        assert_eq!(scl_decode(&[1.0, 1.0], &spec, 0), Err(PolarError::BadListSize));
    }
}
