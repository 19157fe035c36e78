//! The method end to end for one candidate p₋ₐ(ℓn + r) ≡ 0 (mod ℓ).
//!
//! 1/E(q)^a ≡ (E(q)³)^b / E(q^ℓ)^α (mod ℓ), so the congruence holds iff the
//! exponents ≡ r of (E(q)³)^b vanish. Writing E(q)³ = Σ J_i with J_i on the
//! class i turns that into POL(J) = 0, where POL is the grade-r part of
//! (Σ J_i)^b. Either POL is already the zero polynomial, or one looks for
//! POL^k in the ideal of the relations Q_m that are known to vanish.

mod certificate;
mod families;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use certificate::{
    render_proof, verify_certificate, CheckResult, CheckStatus, CofactorEntry, FailureReport,
    ParameterBlock, ProofCertificate, ProofStyle, Verdict, VerificationReport, CERTIFICATE_FORMAT,
    FAILURE_FORMAT,
};
pub use families::{
    cheap_family, check_elementary_lemma, check_elementary_lemma_naive, proposition_instance,
    CheapFamilyMember, LemmaReport, PropositionInstance,
};

use crate::error::{Error, Result};
use crate::gradedpoly::{Assignment, GeneratorPowers, GradedPolynomial, MonomialTable, PolyRing};
use crate::ideals::{
    membership_groebner, membership_linear, random_point_search, AttemptOutcome, GroebnerOptions,
    LinearOptions, MembershipResult, Relations,
};
use crate::modfield::PrimeField;
use crate::qseries::{jacobi_cube_series, TruncatedSeries};
use crate::residues::{derive_parameters, eset, MethodParameters};

/// Default series order for numerical checks.
pub const DEFAULT_ORDER: usize = 1000;

/// Relations with more terms than this in total are not handed to the
/// Gröbner fallback of [`Route::Auto`].
const AUTO_GROEBNER_TERMS: usize = 5_000;

/// Grade-r part of (Σ J_i)^b.
pub fn build_pol(a: u32, modulus: u32, r: u32) -> Result<GradedPolynomial> {
    let params = derive_parameters(a, modulus)?;
    check_residue(r, modulus)?;
    let ring = PolyRing::for_modulus(modulus)?;
    Ok(GeneratorPowers::new(&ring).power_component(params.b, r))
}

/// Q_m = grade-m part of (Σ J_i)^c for every m ∉ Eset(ℓ).
pub fn build_relations(modulus: u32) -> Result<Relations> {
    let ring = PolyRing::for_modulus(modulus)?;
    relations_from(&GeneratorPowers::new(&ring))
}

fn relations_from(cache: &GeneratorPowers) -> Result<Relations> {
    let l = cache.ring().modulus();
    let c = PrimeField::new(l)?.inv(3)?;
    let full = cache.power(c);
    Ok(eset(l)?
        .complement()
        .members()
        .iter()
        .map(|&m| (m, full.grade_component(m)))
        .collect())
}

/// J_i: the part of E(q)³ on exponents ≡ i (mod ℓ), for i ∈ Jset(ℓ).
pub fn j_series(modulus: u32, order: usize) -> Result<BTreeMap<u32, TruncatedSeries>> {
    let ring = PolyRing::for_modulus(modulus)?;
    let cube = jacobi_cube_series(order, ring.field());
    ring.vars()
        .iter()
        .map(|&i| Ok((i, cube.residue_component(i, modulus)?)))
        .collect()
}

/// Points known to refute membership, tried before any solving.
pub fn known_points(modulus: u32) -> Vec<Assignment> {
    match modulus {
        17 => vec![[
            (0, 1),
            (1, 1),
            (3, 2),
            (4, 10),
            (6, 9),
            (10, 11),
            (11, 15),
            (15, 12),
        ]
        .into_iter()
        .collect()],
        _ => Vec::new(),
    }
}

fn check_residue(r: u32, modulus: u32) -> Result<()> {
    if r >= modulus {
        return Err(Error::InvalidArgument(format!(
            "residue {r} must be below the modulus {modulus}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Linear,
    Groebner,
    /// Linear first; Gröbner when the linear systems are over budget and the
    /// relations are small.
    Auto,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Linear => "linear",
            Route::Groebner => "groebner",
            Route::Auto => "auto",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Route::Linear),
            "groebner" => Ok(Route::Groebner),
            "auto" => Ok(Route::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown route {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProveOptions {
    pub route: Route,
    pub max_power: u32,
    pub max_unknowns: u128,
    pub max_equations: u128,
    pub max_basis: usize,
    pub max_groebner_work: u64,
    /// POL and the relations are not built beyond this many monomials.
    pub max_polynomial_terms: u128,
    pub random_trials: u64,
    pub seed: u64,
    /// Extra screening points.
    pub points: Vec<Assignment>,
    /// Also screen [`known_points`].
    pub use_known_points: bool,
    pub truncation_order: usize,
}

impl Default for ProveOptions {
    fn default() -> Self {
        let lin = LinearOptions::default();
        Self {
            route: Route::Auto,
            max_power: lin.max_power,
            max_unknowns: lin.max_unknowns,
            max_equations: lin.max_equations,
            max_basis: GroebnerOptions::default().max_basis,
            max_groebner_work: GroebnerOptions::default().max_work,
            max_polynomial_terms: 400_000,
            random_trials: 500,
            seed: 0,
            points: Vec::new(),
            use_known_points: true,
            truncation_order: DEFAULT_ORDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofOutcome {
    Proved(ProofCertificate),
    Failed(FailureReport),
}

impl ProofOutcome {
    pub fn certificate(&self) -> Option<&ProofCertificate> {
        match self {
            ProofOutcome::Proved(c) => Some(c),
            ProofOutcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&FailureReport> {
        match self {
            ProofOutcome::Failed(f) => Some(f),
            ProofOutcome::Proved(_) => None,
        }
    }
}

fn failure(
    params: MethodParameters,
    r: u32,
    options: &ProveOptions,
    pol_terms: Option<usize>,
    result: Option<MembershipResult>,
    notes: Vec<String>,
) -> FailureReport {
    let (attempts, counterexample) = match result {
        Some(res) => (res.attempts, res.counterexample),
        None => (Vec::new(), None),
    };
    FailureReport {
        format: FAILURE_FORMAT.into(),
        a: params.a,
        l: params.modulus,
        r,
        parameters: params.into(),
        verdict: if counterexample.is_some() {
            Verdict::Refuted
        } else {
            Verdict::NotFoundWithinBounds
        },
        route: options.route.to_string(),
        pol_terms,
        attempts,
        counterexample,
        seed: options.seed,
        random_trials: options.random_trials,
        notes,
        tool_version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn finish(cert: ProofCertificate, order: usize) -> Result<ProofOutcome> {
    let report = verify_certificate(&cert, order)?;
    if !report.all_passed() {
        return Err(Error::SelfCheck(report.render()));
    }
    Ok(ProofOutcome::Proved(cert))
}

/// Runs the method on p₋ₐ(ℓn + r): zero POL, then ideal membership along
/// `options.route`, then a random search for a refuting point. Certificates
/// are verified before they are returned; a method failure is a
/// [`FailureReport`], not an error.
pub fn prove(a: u32, modulus: u32, r: u32, options: &ProveOptions) -> Result<ProofOutcome> {
    let params = derive_parameters(a, modulus)?;
    check_residue(r, modulus)?;
    let order = options.truncation_order;
    let ring = PolyRing::for_modulus(modulus)?;
    let table = MonomialTable::new(&ring, params.b.max(params.c));

    // no monomial of degree b has grade r: POL is empty
    if table.count(params.b, Some(r)) == 0 {
        return finish(ProofCertificate::ramanujan(params, r, order), order);
    }
    let pol_bound = table.count(params.b, Some(r));
    if pol_bound > options.max_polynomial_terms {
        return Ok(ProofOutcome::Failed(failure(
            params,
            r,
            options,
            None,
            None,
            vec![format!(
                "POL would have up to {pol_bound} terms, above the budget of {}",
                options.max_polynomial_terms
            )],
        )));
    }
    let cache = GeneratorPowers::new(&ring);
    let pol = cache.power_component(params.b, r);
    if pol.is_zero() {
        return finish(ProofCertificate::ramanujan(params, r, order), order);
    }

    let rel_bound = table.count(params.c, None);
    if rel_bound > options.max_polynomial_terms {
        return Ok(ProofOutcome::Failed(failure(
            params,
            r,
            options,
            Some(pol.len()),
            None,
            vec![format!(
                "the relations would have up to {rel_bound} terms, above the budget of {}",
                options.max_polynomial_terms
            )],
        )));
    }
    let relations = relations_from(&cache)?;

    let mut points = options.points.clone();
    if options.use_known_points {
        points.extend(known_points(modulus));
    }
    let linear = LinearOptions {
        max_power: options.max_power,
        max_unknowns: options.max_unknowns,
        max_equations: options.max_equations,
        screen_points: points.clone(),
    };
    let groebner = GroebnerOptions {
        max_power: options.max_power,
        degree_bound: None,
        max_basis: options.max_basis,
        max_work: options.max_groebner_work,
        screen_points: points,
    };
    let mut notes = Vec::new();
    let mut result = match options.route {
        Route::Linear => membership_linear(&pol, &relations, &linear)?,
        Route::Groebner => membership_groebner(&pol, &relations, &groebner)?,
        Route::Auto => {
            let res = membership_linear(&pol, &relations, &linear)?;
            let over_budget = res
                .attempts
                .iter()
                .any(|a| matches!(a.outcome, AttemptOutcome::ExceedsBudget { .. }));
            let rel_terms: usize = relations.values().map(GradedPolynomial::len).sum();
            if res.witness.is_none() && res.counterexample.is_none() && over_budget {
                if rel_terms <= AUTO_GROEBNER_TERMS {
                    notes.push("linear systems over budget; tried the Gröbner route".into());
                    membership_groebner(&pol, &relations, &groebner)?
                } else {
                    notes.push(format!(
                        "linear systems over budget; relations too large ({rel_terms} terms) for the Gröbner route"
                    ));
                    res
                }
            } else {
                res
            }
        }
    };

    if let Some(w) = &result.witness {
        return finish(ProofCertificate::hirschhorn(params, r, w, order), order);
    }
    if result.counterexample.is_none() && options.random_trials > 0 {
        if let Some(c) =
            random_point_search(&pol, &relations, options.random_trials, options.seed, &[])?
        {
            result.counterexample = Some(c);
            notes.push("counterexample found by random search".into());
        }
    }
    Ok(ProofOutcome::Failed(failure(
        params,
        r,
        options,
        Some(pol.len()),
        Some(result),
        notes,
    )))
}
