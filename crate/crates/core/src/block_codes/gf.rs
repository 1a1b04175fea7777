//! Arithmetic in GF(2^m) using exp/log tables.

use serde::{Deserialize, Serialize};

use super::BlockCodeError;

/// Primitive polynomials (bitmask incl. the x^m term) for m = 1..=16.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Defines GF(2^m) by its degree and primitive polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub m: u32,
    pub primitive_poly: u32,
}

impl FieldSpec {
    /// The default primitive polynomial for GF(2^m).
    pub fn standard(m: u32) -> Result<Self, BlockCodeError> {
        if !(1..=16).contains(&m) {
            return Err(BlockCodeError::UnsupportedDegree(m));
        }
        Ok(Self {
            m,
            primitive_poly: PRIMITIVE_POLYS[m as usize],
        })
    }

    pub fn new(m: u32, primitive_poly: u32) -> Result<Self, BlockCodeError> {
        if !(1..=16).contains(&m) {
            return Err(BlockCodeError::UnsupportedDegree(m));
        }
        if primitive_poly >> m != 1 {
            return Err(BlockCodeError::NotPrimitive {
                m,
                poly: primitive_poly,
            });
        }
        Ok(Self { m, primitive_poly })
    }

    pub fn order(&self) -> usize {
        1usize << self.m
    }
}

/// A field element tagged with the degree of the field it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub value: u16,
    pub m: u32,
}

impl FieldElem {
    pub fn new(value: u16, field: &GaloisField) -> Result<Self, BlockCodeError> {
        if usize::from(value) >= field.order() {
            return Err(BlockCodeError::SymbolOutOfRange {
                value,
                m: field.spec().m,
            });
        }
        Ok(Self {
            value,
            m: field.spec().m,
        })
    }

    /// Exponent `i` such that the element is α^i, or `None` for zero.
    pub fn power(&self, field: &GaloisField) -> Option<u32> {
        field.log(self.value)
    }
}

/// Exp/log tables for one field. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GaloisField {
    spec: FieldSpec,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(spec: FieldSpec) -> Result<Self, BlockCodeError> {
        let q = spec.order();
        let n = q - 1;
        let mut exp = vec![0u16; 2 * n];
        let mut log = vec![0u16; q];
        let mut x: u32 = 1;
        for i in 0..n {
            if i > 0 && x == 1 {
                return Err(BlockCodeError::NotPrimitive {
                    m: spec.m,
                    poly: spec.primitive_poly,
                });
            }
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << spec.m) != 0 {
                x ^= spec.primitive_poly;
            }
        }
        if x != 1 {
            return Err(BlockCodeError::NotPrimitive {
                m: spec.m,
                poly: spec.primitive_poly,
            });
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }
        Ok(Self { spec, exp, log })
    }

    pub fn standard(m: u32) -> Result<Self, BlockCodeError> {
        Self::new(FieldSpec::standard(m)?)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn group_order(&self) -> usize {
        self.order() - 1
    }

    #[inline]
    pub fn alpha_pow(&self, i: i64) -> u16 {
        let n = self.group_order() as i64;
        self.exp[i.rem_euclid(n) as usize]
    }

    #[inline]
    pub fn log(&self, a: u16) -> Option<u32> {
        (a != 0).then(|| u32::from(self.log[a as usize]))
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Panics on zero divisor.
    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        assert!(b != 0, "division by zero in GF(2^{})", self.spec.m);
        if a == 0 {
            return 0;
        }
        let n = self.group_order();
        self.exp[self.log[a as usize] as usize + n - self.log[b as usize] as usize]
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        self.div(1, a)
    }

    #[inline]
    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.group_order() as u64;
        let l = (u64::from(self.log[a as usize]) * (e % n)) % n;
        self.exp[l as usize]
    }

    fn check(&self, a: FieldElem) -> Result<u16, BlockCodeError> {
        if a.m != self.spec.m {
            return Err(BlockCodeError::FieldMismatch {
                expected: self.spec.m,
                got: a.m,
            });
        }
        if usize::from(a.value) >= self.order() {
            return Err(BlockCodeError::SymbolOutOfRange {
                value: a.value,
                m: self.spec.m,
            });
        }
        Ok(a.value)
    }

    pub fn elem(&self, value: u16) -> Result<FieldElem, BlockCodeError> {
        FieldElem::new(value, self)
    }

    /// Checked multiply; rejects elements tagged with another field.
    pub fn gf_mul(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, BlockCodeError> {
        let v = self.mul(self.check(a)?, self.check(b)?);
        Ok(FieldElem {
            value: v,
            m: self.spec.m,
        })
    }

    pub fn gf_add(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, BlockCodeError> {
        let v = self.check(a)? ^ self.check(b)?;
        Ok(FieldElem {
            value: v,
            m: self.spec.m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less multiply then reduce; independent of the tables.
    fn slow_mul(a: u32, b: u32, spec: FieldSpec) -> u32 {
        let mut prod = 0u32;
        for i in 0..spec.m {
            if b >> i & 1 == 1 {
                prod ^= a << i;
            }
        }
        for bit in (spec.m..2 * spec.m).rev() {
            if prod >> bit & 1 == 1 {
                prod ^= spec.primitive_poly << (bit - spec.m);
            }
        }
        prod
    }

    #[test]
    fn all_standard_polys_are_primitive() {
        for m in 1..=16 {
            GaloisField::standard(m).unwrap_or_else(|e| panic!("m={m}: {e}"));
        }
    }

    #[test]
    fn gf8_examples() {
        let f = GaloisField::new(FieldSpec::new(3, 0b1011).unwrap()).unwrap();
        let a1 = f.alpha_pow(1);
        let a2 = f.alpha_pow(2);
        assert_eq!(f.mul(a1, a2), 0b011);
        assert_eq!(f.mul(a1, a2), f.alpha_pow(3));
        assert_eq!(f.mul(f.alpha_pow(6), a1), 1);
        for a in 0..8u16 {
            assert_eq!(f.mul(a, 1), a);
        }
    }

    #[test]
    fn reducible_poly_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(matches!(
            GaloisField::new(FieldSpec::new(4, 0b10101).unwrap()),
            Err(BlockCodeError::NotPrimitive { .. })
        ));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but not primitive
        assert!(GaloisField::new(FieldSpec::new(4, 0b11111).unwrap()).is_err());
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for m in 1..=6 {
            let f = GaloisField::standard(m).unwrap();
            let q = f.order() as u16;
            for a in 0..q {
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(u32::from(f.mul(a, b)), slow_mul(a.into(), b.into(), f.spec()));
                    for c in 0..q {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn field_axioms_pairs_up_to_gf256() {
        for m in 7..=8 {
            let f = GaloisField::standard(m).unwrap();
            let q = f.order() as u16;
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(u32::from(f.mul(a, b)), slow_mul(a.into(), b.into(), f.spec()));
                    if b != 0 {
                        assert_eq!(f.mul(f.div(a, b), b), a);
                    }
                }
            }
        }
    }

    #[test]
    fn checked_ops_reject_mismatch() {
        let f3 = GaloisField::standard(3).unwrap();
        let f4 = GaloisField::standard(4).unwrap();
        let a = f3.elem(5).unwrap();
        let b = f4.elem(5).unwrap();
        assert!(matches!(f3.gf_mul(a, b), Err(BlockCodeError::FieldMismatch { .. })));
        assert!(f3.elem(8).is_err());
        assert_eq!(f3.gf_mul(a, f3.elem(1).unwrap()).unwrap(), a);
        assert_eq!(a.power(&f3), Some(6));
    }
}
