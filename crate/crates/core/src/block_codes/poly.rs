use super::gf::GaloisField;

/// Polynomial over GF(2^m), coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    pub coeffs: Vec<u16>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<u16>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u16 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, f: &GaloisField, x: u16) -> u16 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u16, |acc, &c| f.mul(acc, x) ^ c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) ^ other.coeff(i)).collect())
    }

    pub fn mul(&self, f: &GaloisField, other: &Self) -> Self {
        let mut out = vec![0u16; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= f.mul(a, b);
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, f: &GaloisField, s: u16) -> Self {
        Self::new(self.coeffs.iter().map(|&c| f.mul(c, s)).collect())
    }

    /// Multiplies by x^k.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![0u16; k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    /// Keeps terms of degree < k.
    pub fn truncate(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().take(k).copied().collect())
    }

    /// Formal derivative; in characteristic 2 only odd-degree terms survive.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let f = GaloisField::standard(3).unwrap();
        // (x + α)(x + α^2) = x^2 + (α + α^2) x + α^3
        let p = Polynomial::new(vec![f.alpha_pow(1), 1]).mul(&f, &Polynomial::new(vec![f.alpha_pow(2), 1]));
        assert_eq!(p.coeffs, vec![f.alpha_pow(3), f.alpha_pow(1) ^ f.alpha_pow(2), 1]);
        assert_eq!(p.eval(&f, f.alpha_pow(1)), 0);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.derivative().coeffs, vec![f.alpha_pow(1) ^ f.alpha_pow(2)]);
        assert!(Polynomial::new(vec![0, 0]).is_zero());
    }
}
