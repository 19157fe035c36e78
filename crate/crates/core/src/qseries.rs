//! Truncated power series in q over GF(ℓ).
//!
//! A [`TruncatedSeries`] of order `N` stores the coefficients of q⁰..qᴺ;
//! everything at q^(N+1) and beyond is unknown. The constructors here build
//! the Euler product E(q), its pentagonal and triangular sparse forms, and
//! the generating function 1/E(q)^a of p₋ₐ.

use std::fmt;

use crate::error::{Error, Result};
use crate::modfield::PrimeField;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    field: PrimeField,
    coeffs: Vec<u32>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries(mod {}, [", self.field.modulus())?;
        let mut first = true;
        for (n, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}q^{n}")?;
        }
        write!(f, "] + O(q^{}))", self.order() + 1)
    }
}

impl TruncatedSeries {
    pub fn zero(order: usize, field: PrimeField) -> Self {
        Self {
            field,
            coeffs: vec![0; order + 1],
        }
    }

    pub fn one(order: usize, field: PrimeField) -> Self {
        let mut s = Self::zero(order, field);
        s.coeffs[0] = 1;
        s
    }

    /// Builds a series from integer coefficients, reducing them mod ℓ.
    /// The truncation order is `coeffs.len() - 1`.
    pub fn from_coeffs(field: PrimeField, coeffs: &[i64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::IncompatibleSeries(
                "a series needs at least one coefficient".into(),
            ));
        }
        Ok(Self {
            field,
            coeffs: coeffs.iter().map(|&c| field.reduce_i64(c)).collect(),
        })
    }

    pub(crate) fn from_raw(field: PrimeField, coeffs: Vec<u32>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { field, coeffs }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn modulus(&self) -> u32 {
        self.field.modulus()
    }

    /// Truncation order N: coefficients are known for q⁰..qᴺ.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> u32 {
        self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Nonzero terms `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(n, &c)| (n, c))
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self {
            field: self.field,
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch {
                left: self.modulus(),
                right: other.modulus(),
            });
        }
        if self.order() != other.order() {
            return Err(Error::IncompatibleSeries(format!(
                "truncation orders {} and {} differ",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| f.add(x, y))
            .collect();
        Ok(Self::from_raw(f, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| f.sub(x, y))
            .collect();
        Ok(Self::from_raw(f, coeffs))
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = self.field;
        Self::from_raw(f, self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    /// Truncated product. Zero coefficients of the sparser operand are skipped,
    /// so multiplying by E(q) or E(q)³ costs O(N·√N).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order();
        let m = self.modulus() as u64;
        let (sparse, dense) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = vec![0u64; n + 1];
        for (i, a) in sparse.terms() {
            let a = a as u64;
            for (slot, &b) in out[i..].iter_mut().zip(&dense.coeffs) {
                *slot = (*slot + a * b as u64) % m;
            }
        }
        Self::from_raw(self.field, out.into_iter().map(|x| x as u32).collect())
    }

    fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// `self^e` by binary exponentiation.
    pub fn power(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.order(), self.field);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// `self / divisor`, solving `divisor · f = self` coefficient by coefficient.
    pub fn div(&self, divisor: &Self) -> Result<Self> {
        self.check_compatible(divisor)?;
        let f = self.field;
        let lead_inv = f.inv(divisor.coeffs[0]).map_err(|_| Error::NotInvertible)?;
        let tail: Vec<(usize, u32)> = divisor.terms().filter(|&(k, _)| k > 0).collect();
        let m = self.modulus() as u64;
        let mut out: Vec<u32> = Vec::with_capacity(self.coeffs.len());
        for n in 0..=self.order() {
            let mut acc = 0u64;
            for &(k, d) in &tail {
                if k > n {
                    break;
                }
                acc = (acc + d as u64 * out[n - k] as u64) % m;
            }
            let v = f.sub(self.coeffs[n], acc as u32);
            out.push(f.mul(v, lead_inv));
        }
        Ok(Self::from_raw(f, out))
    }

    /// Multiplicative inverse up to the truncation order.
    pub fn inverse(&self) -> Result<Self> {
        Self::one(self.order(), self.field).div(self)
    }

    /// The substitution q → q^k.
    pub fn substitute_q_power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut out = vec![0u32; self.coeffs.len()];
        for (n, c) in self.terms() {
            if n * k <= self.order() {
                out[n * k] = c;
            } else {
                break;
            }
        }
        Self::from_raw(self.field, out)
    }

    /// The sub-series of exponents congruent to `residue` modulo `modulus`.
    pub fn residue_component(&self, residue: u32, modulus: u32) -> Result<Self> {
        if residue >= modulus {
            return Err(Error::InvalidArgument(format!(
                "residue {residue} is not in [0, {modulus})"
            )));
        }
        let mut out = vec![0u32; self.coeffs.len()];
        for n in (residue as usize..=self.order()).step_by(modulus as usize) {
            out[n] = self.coeffs[n];
        }
        Ok(Self::from_raw(self.field, out))
    }

    /// Coefficients of q^(ℓn + r) for every n with ℓn + r ≤ N.
    pub fn arith_progression_slice(&self, modulus: u32, residue: u32) -> Result<Vec<u32>> {
        if residue >= modulus {
            return Err(Error::InvalidArgument(format!(
                "residue {residue} is not in [0, {modulus})"
            )));
        }
        Ok((residue as usize..=self.order())
            .step_by(modulus as usize)
            .map(|n| self.coeffs[n])
            .collect())
    }
}

/// E(q) = Π (1 − qⁱ), expanded factor by factor.
pub fn euler_product(order: usize, field: PrimeField) -> TruncatedSeries {
    let mut c = vec![0u32; order + 1];
    c[0] = 1;
    for i in 1..=order {
        for n in (i..=order).rev() {
            c[n] = field.sub(c[n], c[n - i]);
        }
    }
    TruncatedSeries::from_raw(field, c)
}

/// Σ (−1)ⁿ q^((3n²+n)/2) over all integers n.
pub fn pentagonal_series(order: usize, field: PrimeField) -> TruncatedSeries {
    let mut c = vec![0u32; order + 1];
    let sign = |n: i64| if n % 2 == 0 { 1 } else { field.neg(1) };
    c[0] = 1;
    for n in 1i64.. {
        let e1 = (n * (3 * n - 1) / 2) as usize;
        let e2 = (n * (3 * n + 1) / 2) as usize;
        if e1 > order {
            break;
        }
        c[e1] = field.add(c[e1], sign(n));
        if e2 <= order {
            c[e2] = field.add(c[e2], sign(n));
        }
    }
    TruncatedSeries::from_raw(field, c)
}

/// Σ_{n≥0} (−1)ⁿ (2n+1) q^((n²+n)/2).
pub fn jacobi_cube_series(order: usize, field: PrimeField) -> TruncatedSeries {
    let mut c = vec![0u32; order + 1];
    for n in 0i64.. {
        let e = (n * (n + 1) / 2) as usize;
        if e > order {
            break;
        }
        let v = if n % 2 == 0 { 2 * n + 1 } else { -(2 * n + 1) };
        c[e] = field.add(c[e], field.reduce_i64(v));
    }
    TruncatedSeries::from_raw(field, c)
}

/// Σ p₋ₐ(n) qⁿ = 1/E(q)^a, by `a` successive divisions by the sparse E(q).
pub fn p_minus_a(a: u32, order: usize, field: PrimeField) -> Result<TruncatedSeries> {
    if a == 0 {
        return Err(Error::InvalidArgument("a must be at least 1".into()));
    }
    let e = pentagonal_series(order, field);
    let mut s = TruncatedSeries::one(order, field);
    for _ in 0..a {
        s = s.div(&e)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(l: u32) -> PrimeField {
        PrimeField::new(l).unwrap()
    }

    fn signed(field: PrimeField, v: &[i64]) -> Vec<u32> {
        v.iter().map(|&x| field.reduce_i64(x)).collect()
    }

    #[test]
    fn euler_product_small() {
        let f = gf(7);
        let e = euler_product(12, f);
        assert_eq!(
            e.coeffs(),
            &signed(f, &[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1])[..]
        );
        assert_eq!(e.coeff(2), 6);
        assert_eq!(euler_product(0, f).coeffs(), &[1]);
    }

    #[test]
    fn pentagonal_support() {
        let f = gf(11);
        let p = pentagonal_series(15, f);
        let terms: Vec<(usize, u32)> = p.terms().collect();
        assert_eq!(
            terms,
            vec![(0, 1), (1, 10), (2, 10), (5, 1), (7, 1), (12, 10), (15, 10)]
        );
        assert_eq!(pentagonal_series(0, f).coeffs(), &[1]);
        assert_eq!(p, euler_product(15, f));
    }

    #[test]
    fn jacobi_cube_small() {
        let f = gf(13);
        let j = jacobi_cube_series(10, f);
        let mut expect = vec![0i64; 11];
        expect[0] = 1;
        expect[1] = -3;
        expect[3] = 5;
        expect[6] = -7;
        expect[10] = 9;
        assert_eq!(j.coeffs(), &signed(f, &expect)[..]);
        assert_eq!(jacobi_cube_series(0, f).coeffs(), &[1]);
    }

    #[test]
    fn jacobi_cube_mod_small_primes_drops_multiples() {
        // 2n+1 = 5 at n = 2, so q^3 vanishes mod 5.
        let j = jacobi_cube_series(10, gf(5));
        assert_eq!(j.coeff(3), 0);
    }

    #[test]
    fn power_and_frobenius() {
        let f = gf(7);
        let e = euler_product(100, f);
        assert_eq!(e.power(1), e);
        assert_eq!(e.power(0), TruncatedSeries::one(100, f));
        assert_eq!(e.power(7), e.substitute_q_power(7));
        let j2 = jacobi_cube_series(50, f).power(2);
        for n in (5..=50).step_by(7) {
            assert_eq!(j2.coeff(n), 0, "q^{n}");
        }
    }

    #[test]
    fn inverse_gives_partition_numbers() {
        let f = gf(13);
        let p = euler_product(6, f).inverse().unwrap();
        assert_eq!(p.coeffs(), &[1, 1, 2, 3, 5, 7, 11]);
        let one = TruncatedSeries::one(6, f);
        assert_eq!(one.inverse().unwrap(), one);
        assert_eq!(p.inverse().unwrap(), euler_product(6, f));
    }

    #[test]
    fn inverse_requires_unit_constant() {
        let f = gf(5);
        let s = TruncatedSeries::from_coeffs(f, &[5, 1, 2]).unwrap();
        assert_eq!(s.inverse(), Err(Error::NotInvertible));
    }

    #[test]
    fn incompatible_orders_rejected() {
        let f = gf(5);
        let a = euler_product(10, f);
        let b = euler_product(11, f);
        assert!(matches!(a.mul(&b), Err(Error::IncompatibleSeries(_))));
        let c = euler_product(10, gf(7));
        assert!(matches!(a.add(&c), Err(Error::ModulusMismatch { .. })));
    }

    #[test]
    fn p_minus_a_examples() {
        let s = p_minus_a(1, 10, gf(13)).unwrap();
        assert_eq!(s.coeff(4), 5);
        assert_eq!(s.coeff(0), 1);
        let s2 = p_minus_a(2, 10, gf(5)).unwrap();
        assert_eq!((s2.coeff(2), s2.coeff(3), s2.coeff(4)), (0, 0, 0));
        assert!(p_minus_a(0, 10, gf(5)).is_err());
    }

    #[test]
    fn p_minus_a_matches_inverse_power() {
        let f = gf(11);
        let direct = p_minus_a(4, 120, f).unwrap();
        let via_power = euler_product(120, f).power(4).inverse().unwrap();
        assert_eq!(direct, via_power);
    }

    #[test]
    fn residue_components() {
        let f = gf(11);
        let j = jacobi_cube_series(300, f);
        assert!(j.residue_component(2, 11).unwrap().is_zero());
        let e = euler_product(300, f);
        assert!(e.residue_component(3, 11).unwrap().is_zero());
        let mut sum = TruncatedSeries::zero(300, f);
        for i in 0..11 {
            let c = e.residue_component(i, 11).unwrap();
            assert!(c.terms().all(|(n, _)| n % 11 == i as usize));
            sum = sum.add(&c).unwrap();
        }
        assert_eq!(sum, e);
        assert!(e.residue_component(11, 11).is_err());
    }

    #[test]
    fn slices() {
        let s = p_minus_a(1, 100, gf(5)).unwrap();
        assert!(s
            .arith_progression_slice(5, 4)
            .unwrap()
            .iter()
            .all(|&c| c == 0));
        let s = p_minus_a(1, 100, gf(11)).unwrap();
        assert!(s
            .arith_progression_slice(11, 6)
            .unwrap()
            .iter()
            .all(|&c| c == 0));
        let one = TruncatedSeries::one(20, gf(7));
        assert_eq!(one.arith_progression_slice(7, 0).unwrap(), vec![1, 0, 0]);
        assert_eq!(s.arith_progression_slice(11, 6).unwrap().len(), 9);
    }
}
