//! Residue-class bookkeeping: the triangular and pentagonal residue sets and
//! the exponent parameters (α, b, c, d) that rewrite 1/E(q)^a in terms of
//! E(q)³ and E(q^ℓ).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modfield::PrimeField;

/// A sorted, duplicate-free subset of `0..ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueSet {
    modulus: u32,
    members: Vec<u32>,
}

impl ResidueSet {
    pub fn new(modulus: u32, members: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut members: Vec<u32> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&m| m >= modulus) {
            return Err(Error::InvalidArgument(format!(
                "residue {bad} out of range for modulus {modulus}"
            )));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { modulus, members })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, r: u32) -> bool {
        self.members.binary_search(&r).is_ok()
    }

    pub fn complement(&self) -> ResidueSet {
        ResidueSet {
            modulus: self.modulus,
            members: (0..self.modulus).filter(|&r| !self.contains(r)).collect(),
        }
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.members.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// T(n) = n(n+1)/2 reduced mod ℓ.
pub fn triangular_mod(n: u64, modulus: u32) -> u32 {
    ((n * (n + 1) / 2) % modulus as u64) as u32
}

/// Residues of triangular numbers T(n), 0 ≤ n < ℓ, with 2n+1 ≢ 0 (mod ℓ):
/// the residue classes on which E(q)³ is supported mod ℓ.
pub fn jset(modulus: u32) -> Result<ResidueSet> {
    PrimeField::new(modulus)?;
    let l = modulus as u64;
    ResidueSet::new(
        modulus,
        (0..l)
            .filter(|n| (2 * n + 1) % l != 0)
            .map(|n| triangular_mod(n, modulus)),
    )
}

/// Residues of generalized pentagonal numbers (3n²+n)/2, 0 ≤ n < ℓ.
pub fn eset(modulus: u32) -> Result<ResidueSet> {
    PrimeField::new(modulus)?;
    let l = modulus as u64;
    ResidueSet::new(modulus, (0..l).map(|n| ((n * (3 * n + 1) / 2) % l) as u32))
}

/// {a + b mod ℓ : a ∈ A, b ∈ B}.
pub fn sumset(a: &ResidueSet, b: &ResidueSet) -> Result<ResidueSet> {
    if a.modulus != b.modulus {
        return Err(Error::ModulusMismatch {
            left: a.modulus,
            right: b.modulus,
        });
    }
    let l = a.modulus;
    ResidueSet::new(
        l,
        a.members
            .iter()
            .flat_map(|&x| b.members.iter().map(move |&y| (x + y) % l)),
    )
}

/// Exponents with E(q)^(−a) = (E(q)³)^b / E(q)^(αℓ) and (E(q)³)^c = E(q)·E(q)^(dℓ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MethodParameters {
    pub modulus: u32,
    pub a: u32,
    pub alpha: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl MethodParameters {
    /// Re-checks every defining identity.
    pub fn check(&self) -> bool {
        let l = self.modulus as u64;
        let (a, alpha, b, c, d) = (
            self.a as u64,
            self.alpha as u64,
            self.b as u64,
            self.c as u64,
            self.d as u64,
        );
        let minimal = (1..alpha).all(|x| x * l < a + 3 || !(x * l - a).is_multiple_of(3));
        b >= 1
            && 3 * b + a == alpha * l
            && minimal
            && c < l
            && (3 * c) % l == 1
            && d * l == 3 * c - 1
    }
}

/// Smallest α ≥ 1 with 3 | (αℓ − a) and b = (αℓ − a)/3 ≥ 1; c = 3⁻¹ mod ℓ;
/// d = (3c − 1)/ℓ.
pub fn derive_parameters(a: u32, modulus: u32) -> Result<MethodParameters> {
    if modulus == 3 {
        return Err(Error::ModulusThree);
    }
    let field = PrimeField::new(modulus)?;
    if a == 0 {
        return Err(Error::InvalidArgument("a must be at least 1".into()));
    }
    let l = modulus as u64;
    let a64 = a as u64;
    let alpha = (1u64..)
        .find(|&x| x * l >= a64 + 3 && (x * l - a64).is_multiple_of(3))
        .expect("some α in every residue class mod 3 works");
    let b = (alpha * l - a64) / 3;
    let c = field.inv(3)? as u64;
    let d = (3 * c - 1) / l;
    Ok(MethodParameters {
        modulus,
        a,
        alpha: alpha as u32,
        b: b as u32,
        c: c as u32,
        d: d as u32,
    })
}
