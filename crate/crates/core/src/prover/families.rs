//! Infinite families: a = ℓ − 3 (b = 1) and a = ℓ − 6 (b = 2).

use serde::{Deserialize, Serialize};

use super::{prove, ProofCertificate, ProofOutcome, ProveOptions};
use crate::error::{Error, Result};
use crate::modfield::PrimeField;
use crate::residues::{jset, sumset, triangular_mod};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheapFamilyMember {
    pub a: u32,
    pub r: u32,
    pub certificate: ProofCertificate,
}

/// 1/E(q)^(ℓ−3) ≡ E(q)³/E(q^ℓ) (mod ℓ), and E(q)³ misses every class
/// outside Jset(ℓ): one Ramanujan-style certificate per such class.
pub fn cheap_family(modulus: u32, order: usize) -> Result<Vec<CheapFamilyMember>> {
    if modulus < 5 {
        return Err(Error::InvalidArgument(format!(
            "the family needs a prime ℓ ≥ 5, got {modulus}"
        )));
    }
    let a = modulus - 3;
    let options = ProveOptions {
        truncation_order: order,
        ..Default::default()
    };
    jset(modulus)?
        .complement()
        .members()
        .iter()
        .map(|&r| match prove(a, modulus, r, &options)? {
            ProofOutcome::Proved(certificate) => Ok(CheapFamilyMember { a, r, certificate }),
            ProofOutcome::Failed(f) => Err(Error::SelfCheck(f.summary())),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PropositionInstance {
    /// ℓ ≡ 7 or 11 (mod 12): a = ℓ − 6, r = (ℓ − 6)/24 mod ℓ.
    Applicable {
        l: u32,
        a: u32,
        r: u32,
        /// r ∉ Jset(ℓ) + Jset(ℓ), which makes POL = 0.
        outside_sumset: bool,
    },
    NotApplicable {
        l: u32,
    },
}

fn proposition_residue(modulus: u32) -> Result<Option<u32>> {
    let field = PrimeField::new(modulus)?;
    if !matches!(modulus % 12, 7 | 11) {
        return Ok(None);
    }
    let r = field.mul(modulus - 6, field.inv(24 % modulus)?);
    Ok(Some(r))
}

pub fn proposition_instance(modulus: u32) -> Result<PropositionInstance> {
    let Some(r) = proposition_residue(modulus)? else {
        return Ok(PropositionInstance::NotApplicable { l: modulus });
    };
    let j = jset(modulus)?;
    Ok(PropositionInstance::Applicable {
        l: modulus,
        a: modulus - 6,
        r,
        outside_sumset: !sumset(&j, &j)?.contains(r),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub l: u32,
    pub applicable: bool,
    pub r: Option<u32>,
    pub verified: bool,
    pub forced_index: u32,
    /// Pairs (n₁, n₂) found with T(n₁) + T(n₂) ≡ r.
    pub pairs: u64,
}

/// Every pair 0 ≤ n₁, n₂ < ℓ with T(n₁) + T(n₂) ≡ (ℓ − 6)/24 (mod ℓ) has
/// n₁ or n₂ equal to (ℓ − 1)/2. Each residue has at most two triangular
/// preimages, so a residue table makes the scan O(ℓ).
pub fn check_elementary_lemma(modulus: u32) -> Result<LemmaReport> {
    let forced = (modulus - 1) / 2;
    let Some(r) = proposition_residue(modulus)? else {
        return Ok(not_applicable(modulus));
    };
    let l = modulus as usize;
    let mut preimages: Vec<Vec<u32>> = vec![Vec::new(); l];
    for n in 0..modulus {
        preimages[triangular_mod(n as u64, modulus) as usize].push(n);
    }
    let mut pairs = 0u64;
    let mut verified = true;
    for n1 in 0..modulus {
        let want = (r as usize + l - triangular_mod(n1 as u64, modulus) as usize) % l;
        for &n2 in &preimages[want] {
            pairs += 1;
            verified &= n1 == forced || n2 == forced;
        }
    }
    Ok(LemmaReport {
        l: modulus,
        applicable: true,
        r: Some(r),
        verified,
        forced_index: forced,
        pairs,
    })
}

/// The same statement by scanning all ℓ² pairs.
pub fn check_elementary_lemma_naive(modulus: u32) -> Result<LemmaReport> {
    let forced = (modulus - 1) / 2;
    let Some(r) = proposition_residue(modulus)? else {
        return Ok(not_applicable(modulus));
    };
    let mut pairs = 0u64;
    let mut verified = true;
    for n1 in 0..modulus {
        for n2 in 0..modulus {
            let s =
                (triangular_mod(n1 as u64, modulus) + triangular_mod(n2 as u64, modulus)) % modulus;
            if s == r {
                pairs += 1;
                verified &= n1 == forced || n2 == forced;
            }
        }
    }
    Ok(LemmaReport {
        l: modulus,
        applicable: true,
        r: Some(r),
        verified,
        forced_index: forced,
        pairs,
    })
}

fn not_applicable(modulus: u32) -> LemmaReport {
    LemmaReport {
        l: modulus,
        applicable: false,
        r: None,
        verified: false,
        forced_index: (modulus - 1) / 2,
        pairs: 0,
    }
}
