//! Arithmetic in the prime field GF(ℓ) for odd primes ℓ.
//!
//! [`PrimeField`] is the validated field context; hot loops elsewhere in the
//! crate work on raw `u32` residues through it. [`FieldElement`] bundles a
//! residue with its modulus for the checked public API.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes in `lo..=hi`, ascending.
pub fn odd_primes_in(lo: u64, hi: u64) -> Vec<u32> {
    (lo.max(3)..=hi)
        .filter(|&n| is_prime(n))
        .map(|n| n as u32)
        .collect()
}

/// The field GF(ℓ) for an odd prime ℓ < 2³².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    modulus: u32,
}

impl PrimeField {
    /// Validates that `modulus` is an odd prime.
    pub fn new(modulus: u32) -> Result<Self> {
        if modulus == 2 || !is_prime(modulus as u64) {
            return Err(Error::NotOddPrime(modulus as u64));
        }
        Ok(Self { modulus })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn reduce_i64(self, v: i64) -> u32 {
        v.rem_euclid(self.modulus as i64) as u32
    }

    #[inline]
    pub fn reduce_u64(self, v: u64) -> u32 {
        (v % self.modulus as u64) as u32
    }

    #[inline]
    pub fn add(self, x: u32, y: u32) -> u32 {
        let s = x as u64 + y as u64;
        let m = self.modulus as u64;
        (if s >= m { s - m } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, x: u32, y: u32) -> u32 {
        if x >= y {
            x - y
        } else {
            (x as u64 + self.modulus as u64 - y as u64) as u32
        }
    }

    #[inline]
    pub fn neg(self, x: u32) -> u32 {
        if x == 0 {
            0
        } else {
            self.modulus - x
        }
    }

    #[inline]
    pub fn mul(self, x: u32, y: u32) -> u32 {
        ((x as u64 * y as u64) % self.modulus as u64) as u32
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv(self, x: u32) -> Result<u32> {
        let x = x % self.modulus;
        if x == 0 {
            return Err(Error::DivisionByZero {
                modulus: self.modulus,
            });
        }
        let (mut old_r, mut r) = (x as i64, self.modulus as i64);
        let (mut old_s, mut s) = (1i64, 0i64);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(self.reduce_i64(old_s))
    }

    pub fn pow(self, x: u32, mut e: u64) -> u32 {
        let mut base = x % self.modulus;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn element(self, v: i64) -> FieldElement {
        FieldElement {
            value: self.reduce_i64(v),
            modulus: self.modulus,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }
}

/// A residue in GF(ℓ), always kept in `[0, ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn field(self) -> PrimeField {
        PrimeField {
            modulus: self.modulus,
        }
    }

    fn same_field(self, other: Self) -> Result<PrimeField> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Ok(self.field())
    }

    fn with_value(self, value: u32) -> Self {
        Self {
            value,
            modulus: self.modulus,
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(self.with_value(f.add(self.value, other.value)))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(self.with_value(f.sub(self.value, other.value)))
    }

    pub fn checked_mul(self, other: Self) -> Result<Self> {
        let f = self.same_field(other)?;
        Ok(self.with_value(f.mul(self.value, other.value)))
    }

    pub fn inv(self) -> Result<Self> {
        Ok(self.with_value(self.field().inv(self.value)?))
    }

    pub fn pow(self, e: u64) -> Self {
        self.with_value(self.field().pow(self.value, e))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on a modulus mismatch; use the `checked_*` methods
// where operands may come from different fields.
macro_rules! impl_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$checked(rhs)
                    .expect("field elements from different fields")
            }
        }
    };
}

impl_op!(Add, add, checked_add);
impl_op!(Sub, sub, checked_sub);
impl_op!(Mul, mul, checked_mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.with_value(self.field().neg(self.value))
    }
}
