//! The prime field F_p for odd primes p < 256, one byte per element.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::arith;
use crate::error::{Error, Result};

/// An odd prime below 256.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u8);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 256 && p % 2 == 1 && arith::is_prime(p) {
            Ok(Prime(p as u8))
        } else {
            Err(Error::InvalidModulus(p))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u8 {
        (x % self.0 as u64) as u8
    }

    #[inline]
    pub fn reduce_i64(self, x: i64) -> u8 {
        x.rem_euclid(self.0 as i64) as u8
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        let s = a as u16 + b as u16;
        let p = self.0 as u16;
        (if s >= p { s - p } else { s }) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        if a >= b {
            a - b
        } else {
            (a as u16 + self.0 as u16 - b as u16) as u8
        }
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        (a as u32 * b as u32 % self.0 as u32) as u8
    }

    pub fn pow(self, a: u8, e: u64) -> u8 {
        arith::pow_mod(a as u64, e, self.0 as u64) as u8
    }

    /// Inverse of a nonzero element.
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(a % self.0 != 0);
        self.pow(a, self.0 as u64 - 2)
    }

    /// `n^e mod p` where the exponent is read modulo p-1, so negative or
    /// zero weights behave like their lifts.
    pub fn pow_weight(self, n: u64, e: i64) -> u8 {
        let base = self.reduce(n);
        if base == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let order = self.0 as i64 - 1;
        self.pow(base, e.rem_euclid(order) as u64)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpElement {
    value: u8,
    modulus: Prime,
}

impl FpElement {
    pub fn new(value: i64, modulus: Prime) -> Self {
        FpElement {
            value: modulus.reduce_i64(value),
            modulus,
        }
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Option<Self> {
        (self.value != 0).then(|| FpElement {
            value: self.modulus.inv(self.value),
            modulus: self.modulus,
        })
    }

    fn same(self, other: Self) -> Prime {
        assert_eq!(self.modulus, other.modulus, "mixed moduli");
        self.modulus
    }
}

impl Add for FpElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let p = self.same(o);
        FpElement { value: p.add(self.value, o.value), modulus: p }
    }
}

impl Sub for FpElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let p = self.same(o);
        FpElement { value: p.sub(self.value, o.value), modulus: p }
    }
}

impl Mul for FpElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = self.same(o);
        FpElement { value: p.mul(self.value, o.value), modulus: p }
    }
}

impl Neg for FpElement {
    type Output = Self;
    fn neg(self) -> Self {
        FpElement { value: self.modulus.neg(self.value), modulus: self.modulus }
    }
}

impl fmt::Display for FpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_moduli() {
        for bad in [0, 1, 2, 4, 9, 257, 1 << 20] {
            assert_eq!(Prime::new(bad), Err(Error::InvalidModulus(bad)));
        }
        assert!(Prime::new(251).is_ok());
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for p in [3u64, 5, 7, 13] {
            let q = Prime::new(p).unwrap();
            for a in 0..p as u8 {
                if a != 0 {
                    assert_eq!(q.mul(a, q.inv(a)), 1);
                }
                for b in 0..p as u8 {
                    let (x, y) = (a as i64, b as i64);
                    assert_eq!(q.add(a, b) as i64, (x + y).rem_euclid(p as i64));
                    assert_eq!(q.sub(a, b) as i64, (x - y).rem_euclid(p as i64));
                    assert_eq!(q.mul(a, b) as i64, (x * y).rem_euclid(p as i64));
                }
            }
        }
    }

    #[test]
    fn weight_exponents_wrap() {
        let q = Prime::new(7).unwrap();
        // 3^(-1) = 5 mod 7 and 3^(23) = 3^5 = 5 mod 7
        assert_eq!(q.pow_weight(3, -1), 5);
        assert_eq!(q.pow_weight(3, 23), 5);
        assert_eq!(q.pow_weight(7, 3), 0);
    }

    #[test]
    fn element_ops() {
        let q = Prime::new(5).unwrap();
        let a = FpElement::new(-3, q);
        assert_eq!(a.value(), 2);
        assert_eq!((a * a).value(), 4);
        assert_eq!((a - a * a).value(), 3);
        assert_eq!((-a).value(), 3);
        assert_eq!(a.inv().unwrap().value(), 3);
    }
}
