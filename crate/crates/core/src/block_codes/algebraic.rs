//! Decoder kernels shared by BCH and RS: syndromes, Berlekamp–Massey,
//! Chien search and Forney's error values.

use super::gf::GaloisField;
use super::poly::Polynomial;

/// S_j = r(α^j) for j = 1..=count, where `word[p]` is the coefficient of
/// x^(n-1-p).
pub fn syndromes(f: &GaloisField, word: &[u16], count: usize) -> Vec<u16> {
    let n = word.len() as i64;
    (1..=count as i64)
        .map(|j| {
            word.iter().enumerate().fold(0u16, |acc, (p, &c)| {
                if c == 0 {
                    acc
                } else {
                    acc ^ f.mul(c, f.alpha_pow(j * (n - 1 - p as i64)))
                }
            })
        })
        .collect()
}

/// Π (1 + α^e x) over the given exponents.
pub fn locator_from_powers(f: &GaloisField, powers: &[u32]) -> Polynomial {
    powers.iter().fold(Polynomial::one(), |acc, &e| {
        acc.mul(f, &Polynomial::new(vec![1, f.alpha_pow(i64::from(e))]))
    })
}

/// Berlekamp–Massey seeded with an erasure locator of degree `erasures`.
/// Returns the errata locator and its register length.
pub fn berlekamp_massey(
    f: &GaloisField,
    synd: &[u16],
    erasure_locator: &Polynomial,
    erasures: usize,
) -> (Polynomial, usize) {
    let two_t = synd.len();
    let mut lambda = erasure_locator.clone();
    let mut b = erasure_locator.clone();
    let mut l = erasures;
    for r in (erasures + 1)..=two_t {
        let mut delta = 0u16;
        for j in 0..lambda.coeffs.len() {
            if j < r {
                delta ^= f.mul(lambda.coeff(j), synd[r - 1 - j]);
            }
        }
        let xb = b.shift(1);
        if delta == 0 {
            b = xb;
        } else if 2 * l < r + erasures {
            let next = lambda.add(&xb.scale(f, delta));
            b = lambda.scale(f, f.inv(delta));
            lambda = next;
            l = r + erasures - l;
        } else {
            lambda = lambda.add(&xb.scale(f, delta));
            b = xb;
        }
    }
    (lambda, l)
}

/// Exponents e in 0..n with Λ(α^-e) = 0.
pub fn chien_search(f: &GaloisField, locator: &Polynomial, n: usize) -> Vec<u32> {
    (0..n as u32)
        .filter(|&e| locator.eval(f, f.alpha_pow(-i64::from(e))) == 0)
        .collect()
}

/// Error magnitudes for the located exponents (first consecutive root α^1).
/// `None` if Λ' vanishes at a root.
pub fn forney(
    f: &GaloisField,
    synd: &[u16],
    locator: &Polynomial,
    powers: &[u32],
) -> Option<Vec<u16>> {
    let s_poly = Polynomial::new(synd.to_vec());
    let omega = s_poly.mul(f, locator).truncate(synd.len());
    let d = locator.derivative();
    powers
        .iter()
        .map(|&e| {
            let x_inv = f.alpha_pow(-i64::from(e));
            let den = d.eval(f, x_inv);
            (den != 0).then(|| f.div(omega.eval(f, x_inv), den))
        })
        .collect()
}
