use rand::Rng;
use rand_distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use super::decode::f_exact;
use super::PolarError;
use crate::bits::BitSeq;
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignChannel {
    /// design_param is the erasure probability.
    Bec,
    /// design_param is the crossover probability.
    Bsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConstructionMethod {
    Bhattacharyya,
    /// Genie-aided SC simulation on the all-zero codeword.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSpec {
    pub n: usize,
    pub k: usize,
    pub frozen: Vec<bool>,
    pub design_param: f64,
}

/// Per-channel unreliability scores (lower is better) and the channel
/// indices sorted from most to least reliable.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityOrder {
    pub scores: Vec<f64>,
    pub order: Vec<usize>,
}

fn check_n(n: usize) -> Result<(), PolarError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(PolarError::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Z(W_i^N) via z -> (2z - z^2, z^2), worse channel first.
pub fn bhattacharyya(n: usize, z0: f64) -> Result<Vec<f64>, PolarError> {
    check_n(n)?;
    Ok(bhattacharyya_rec(n, z0))
}

fn bhattacharyya_rec(n: usize, z: f64) -> Vec<f64> {
    if n == 1 {
        return vec![z];
    }
    let mut out = bhattacharyya_rec(n / 2, 2.0 * z - z * z);
    out.extend(bhattacharyya_rec(n / 2, z * z));
    out
}

/// Exact BEC capacities I(W_i^N) = 1 - Z(W_i^N).
pub fn bec_capacities(n: usize, p: f64) -> Result<Vec<f64>, PolarError> {
    Ok(bhattacharyya(n, p)?.into_iter().map(|z| 1.0 - z).collect())
}

fn check_param(p: f64) -> Result<(), PolarError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(PolarError::BadDesignParam(p));
    }
    Ok(())
}

pub fn reliability(
    n: usize,
    design_param: f64,
    channel: DesignChannel,
    method: ConstructionMethod,
) -> Result<ReliabilityOrder, PolarError> {
    check_n(n)?;
    check_param(design_param)?;
    let scores = match method {
        ConstructionMethod::Bhattacharyya => {
            let z0 = match channel {
                DesignChannel::Bec => design_param,
                DesignChannel::Bsc => 2.0 * (design_param * (1.0 - design_param)).sqrt(),
            };
            bhattacharyya(n, z0)?
        }
        ConstructionMethod::MonteCarlo { samples, seed } => monte_carlo(n, design_param, channel, samples, seed),
    };
    let mut order: Vec<usize> = (0..n).collect();
    // Most reliable first; ties prefer the higher index.
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
    Ok(ReliabilityOrder { scores, order })
}

fn monte_carlo(n: usize, p: f64, channel: DesignChannel, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let flip = Bernoulli::new(p).expect("p checked");
    let mag = match channel {
        DesignChannel::Bec => 1.0e3,
        DesignChannel::Bsc => ((1.0 - p) / p).ln().clamp(-1.0e3, 1.0e3),
    };
    let mut err = vec![0.0; n];
    for _ in 0..samples.max(1) {
        let llr: Vec<f64> = (0..n)
            .map(|_| {
                let hit = flip.sample(&mut rng);
                match (channel, hit) {
                    (DesignChannel::Bec, true) => 0.0,
                    (DesignChannel::Bsc, true) => -mag,
                    _ => mag,
                }
            })
            .collect();
        for (e, l) in err.iter_mut().zip(genie_leaves(&llr)) {
            *e += if l < 0.0 {
                1.0
            } else if l == 0.0 {
                0.5
            } else {
                0.0
            };
        }
    }
    err.iter().map(|e| e / samples.max(1) as f64).collect()
}

/// Leaf LLRs of SC decoding when every earlier decision is correct and the
/// transmitted codeword is all-zero.
fn genie_leaves(llr: &[f64]) -> Vec<f64> {
    if llr.len() == 1 {
        return llr.to_vec();
    }
    let h = llr.len() / 2;
    let (a, b) = llr.split_at(h);
    let left: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_exact(x, y)).collect();
    let right: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
    let mut out = genie_leaves(&left);
    out.extend(genie_leaves(&right));
    out
}

/// Freezes the N - k least reliable channels.
pub fn construct(
    n: usize,
    k: usize,
    design_param: f64,
    channel: DesignChannel,
    method: ConstructionMethod,
) -> Result<PolarSpec, PolarError> {
    if k > n {
        return Err(PolarError::TooManyInfoBits { k, n });
    }
    let rel = reliability(n, design_param, channel, method)?;
    let mut frozen = vec![true; n];
    for &i in &rel.order[..k] {
        frozen[i] = false;
    }
    Ok(PolarSpec { n, k, frozen, design_param })
}

/// Genie-aided reliability estimate for channels that are not
/// output-symmetric: each sample draws a random u, encodes it, passes the
/// codeword through `channel` (which returns one LLR per code bit) and
/// averages the error probability of each leaf decision of SC with correct
/// past decisions. Lower is better.
pub fn genie_scores<F>(n: usize, samples: usize, seed: u64, mut channel: F) -> Result<Vec<f64>, PolarError>
where
    F: FnMut(&[u8], &mut SimRng) -> Vec<f64>,
{
    check_n(n)?;
    let mut rng = rng_from_seed(seed);
    let mut err = vec![0.0f64; n];
    let mut leaves = Vec::with_capacity(n);
    for _ in 0..samples.max(1) {
        let u: BitSeq = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let mut c = u.clone();
        super::polar_transform(&mut c);
        let llr = channel(&c, &mut rng);
        if llr.len() != n {
            return Err(PolarError::WrongLength { expected: n, got: llr.len() });
        }
        leaves.clear();
        genie_leaves_known(&llr, &c, &mut leaves);
        for ((e, l), &b) in err.iter_mut().zip(&leaves).zip(&u) {
            // Posterior error probability of the genie decision; far less
            // noisy than counting wrong signs for the reliable channels.
            let signed = if b == 0 { *l } else { -*l };
            *e += 1.0 / (1.0 + signed.exp());
        }
    }
    Ok(err.into_iter().map(|e| e / samples.max(1) as f64).collect())
}

/// [`genie_scores`] followed by freezing the N - k worst channels.
pub fn construct_from_channel<F>(
    n: usize,
    k: usize,
    design_param: f64,
    samples: usize,
    seed: u64,
    channel: F,
) -> Result<PolarSpec, PolarError>
where
    F: FnMut(&[u8], &mut SimRng) -> Vec<f64>,
{
    let scores = genie_scores(n, samples, seed, channel)?;
    PolarSpec::from_scores(&scores, k, design_param)
}

/// Genie SC leaves for a known codeword `c` (natural order: first half is
/// x xor y, second half is y).
fn genie_leaves_known(llr: &[f64], c: &[u8], out: &mut Vec<f64>) {
    if llr.len() == 1 {
        out.push(llr[0]);
        return;
    }
    let h = llr.len() / 2;
    let (a, b) = llr.split_at(h);
    let x: Vec<u8> = c[..h].iter().zip(&c[h..]).map(|(p, q)| p ^ q).collect();
    let left: Vec<f64> = a.iter().zip(b).map(|(&p, &q)| f_exact(p, q)).collect();
    genie_leaves_known(&left, &x, out);
    let right: Vec<f64> = a.iter().zip(b).zip(&x).map(|((&p, &q), &xi)| if xi == 0 { p + q } else { q - p }).collect();
    genie_leaves_known(&right, &c[h..], out);
}

impl PolarSpec {
    /// Keeps the k channels with the lowest scores; ties prefer the higher index.
    pub fn from_scores(scores: &[f64], k: usize, design_param: f64) -> Result<Self, PolarError> {
        let n = scores.len();
        check_n(n)?;
        if k > n {
            return Err(PolarError::TooManyInfoBits { k, n });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
        let mut frozen = vec![true; n];
        for &i in &order[..k] {
            frozen[i] = false;
        }
        Ok(Self { n, k, frozen, design_param })
    }

    /// The two half-length codes of the first butterfly stage: u[..N/2]
    /// encodes x and u[N/2..] encodes y, with c = (x xor y, y).
    pub fn halves(&self) -> Result<(Self, Self), PolarError> {
        if self.n < 2 {
            return Err(PolarError::NotPowerOfTwo(self.n / 2));
        }
        let h = self.n / 2;
        let part = |f: &[bool]| Self { n: h, k: f.iter().filter(|&&x| !x).count(), frozen: f.to_vec(), design_param: self.design_param };
        Ok((part(&self.frozen[..h]), part(&self.frozen[h..])))
    }

    pub fn from_info_set(n: usize, info: &[usize]) -> Result<Self, PolarError> {
        check_n(n)?;
        let mut frozen = vec![true; n];
        for &i in info {
            if i >= n || !frozen[i] {
                return Err(PolarError::BadMask(format!("bad or repeated info index {i}")));
            }
            frozen[i] = false;
        }
        Ok(Self { n, k: info.len(), frozen, design_param: f64::NAN })
    }

    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.frozen[i]).collect()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Full u vector with frozen positions zero.
    pub fn expand(&self, u_info: &[u8]) -> Result<BitSeq, PolarError> {
        if u_info.len() != self.k {
            return Err(PolarError::WrongLength { expected: self.k, got: u_info.len() });
        }
        let mut u = vec![0u8; self.n];
        for (p, &b) in self.info_positions().into_iter().zip(u_info) {
            u[p] = b & 1;
        }
        Ok(u)
    }

    /// One character per channel, '1' for frozen.
    pub fn to_mask_line(&self) -> String {
        self.frozen.iter().map(|&f| if f { '1' } else { '0' }).collect()
    }

    pub fn from_mask_line(line: &str, design_param: f64) -> Result<Self, PolarError> {
        let frozen: Vec<bool> = line
            .trim()
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(PolarError::BadMask(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<_, _>>()?;
        check_n(frozen.len())?;
        let k = frozen.iter().filter(|&&f| !f).count();
        Ok(Self { n: frozen.len(), k, frozen, design_param })
    }
}
