//! Ideal membership of POL (or a power of it) in the ideal generated by the
//! relations {Q_m} in GF(ℓ)[J_i], plus the point evaluations that refute it.
//!
//! Two independent routes decide membership: undetermined coefficients
//! restricted by degree and grade ([`membership_linear`]) and Buchberger's
//! algorithm ([`groebner`]). Whatever route produced a [`MembershipWitness`],
//! it is only trusted after [`MembershipWitness::verify`] re-checks the
//! identity with plain polynomial arithmetic.

pub mod groebner;
mod linear;
mod specialize;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradedpoly::{Assignment, GradedPolynomial};

pub use groebner::{
    buchberger, membership_groebner, normal_form, GroebnerBasis, GroebnerOptions, NormalForm,
};
pub use linear::{membership_linear, LinearOptions};
pub use specialize::{specialized_membership, SpecializedOutcome};

/// The relations Q_m keyed by m.
pub type Relations = BTreeMap<u32, GradedPolynomial>;

/// POL^k = Σ R_m · Q_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipWitness {
    /// POL^k.
    pub target: GradedPolynomial,
    pub power: u32,
    pub cofactors: BTreeMap<u32, GradedPolynomial>,
}

impl MembershipWitness {
    /// Exact check of target − Σ R_m Q_m = 0.
    pub fn verify(&self, relations: &Relations) -> bool {
        let mut acc = self.target.clone();
        for (m, r) in &self.cofactors {
            let Some(q) = relations.get(m) else {
                return false;
            };
            match r.mul(q).and_then(|p| acc.sub(&p)) {
                Ok(next) => acc = next,
                Err(_) => return false,
            }
        }
        acc.is_zero()
    }

    /// Each nonzero R_m is homogeneous of degree deg(target) − deg(Q_m) and
    /// grade grade(target) − m.
    pub fn has_expected_shape(&self, relations: &Relations) -> bool {
        let ring = self.target.ring();
        let l = ring.modulus();
        let (Some(deg), Some(grade)) = (self.target.total_degree(), self.target.common_grade())
        else {
            return self.cofactors.values().all(GradedPolynomial::is_zero);
        };
        self.cofactors.iter().all(|(m, r)| {
            if r.is_zero() {
                return true;
            }
            let Some(q) = relations.get(m) else {
                return false;
            };
            let Some(qdeg) = q.total_degree() else {
                return false;
            };
            r.is_homogeneous()
                && r.total_degree().map(|d| d + qdeg) == Some(deg)
                && r.common_grade() == Some((grade + l - m % l) % l)
        })
    }

    /// Total degree of every nonzero cofactor.
    pub fn cofactor_degrees(&self) -> BTreeMap<u32, Option<u32>> {
        self.cofactors
            .iter()
            .map(|(m, r)| (*m, r.total_degree()))
            .collect()
    }
}

/// A point where every Q_m vanishes but POL does not. Since POL^k = Σ R_m Q_m
/// would force POL(pt)^k = 0, it refutes membership for every power k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexamplePoint {
    pub assignment: Assignment,
    pub pol_value: u32,
    pub q_values: BTreeMap<u32, u32>,
}

impl CounterexamplePoint {
    pub fn is_valid(&self) -> bool {
        self.pol_value != 0 && self.q_values.values().all(|&v| v == 0)
    }
}

/// Outcome of evaluating POL and the relations at one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointCheck {
    Counterexample(CounterexamplePoint),
    /// Some relation does not vanish at the point.
    RelationNonzero {
        m: u32,
        value: u32,
    },
    /// All relations vanish, and so does POL.
    PolVanishes,
}

impl PointCheck {
    pub fn counterexample(self) -> Option<CounterexamplePoint> {
        match self {
            PointCheck::Counterexample(c) => Some(c),
            _ => None,
        }
    }
}

pub(crate) fn check_homogeneous(p: &GradedPolynomial, what: &str) -> Result<()> {
    if !p.is_zero() && (!p.is_homogeneous() || p.common_grade().is_none()) {
        return Err(Error::NotHomogeneous(format!(
            "{what} must be homogeneous in degree and grade"
        )));
    }
    Ok(())
}

/// Evaluates every Q_m and POL at `assignment`.
pub fn check_point(
    assignment: &Assignment,
    pol: &GradedPolynomial,
    relations: &Relations,
) -> Result<PointCheck> {
    let mut q_values = BTreeMap::new();
    for (m, q) in relations {
        let v = q.evaluate(assignment)?;
        q_values.insert(*m, v);
    }
    let pol_value = pol.evaluate(assignment)?;
    if let Some((&m, &value)) = q_values.iter().find(|(_, &v)| v != 0) {
        return Ok(PointCheck::RelationNonzero { m, value });
    }
    if pol_value == 0 {
        return Ok(PointCheck::PolVanishes);
    }
    Ok(PointCheck::Counterexample(CounterexamplePoint {
        assignment: assignment.clone(),
        pol_value,
        q_values,
    }))
}

/// Best-effort falsification: tries the `injected` points first (as trials
/// 0, 1, …), then uniformly random nonzero points from a ChaCha stream seeded
/// with `seed`. Returns the first counterexample, if any.
pub fn random_point_search(
    pol: &GradedPolynomial,
    relations: &Relations,
    trials: u64,
    seed: u64,
    injected: &[Assignment],
) -> Result<Option<CounterexamplePoint>> {
    let ring = pol.ring();
    let l = ring.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let point: Assignment = match injected.get(trial as usize) {
            Some(p) => p.clone(),
            None => loop {
                let p: Assignment = ring
                    .vars()
                    .iter()
                    .map(|&v| (v, rng.gen_range(0..l)))
                    .collect();
                if p.values().any(|&x| x != 0) {
                    break p;
                }
            },
        };
        if let PointCheck::Counterexample(c) = check_point(&point, pol, relations)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// How one power k fared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AttemptOutcome {
    /// A witness was found and verified.
    Solved,
    /// The degree- and grade-restricted linear system has no solution.
    Inconsistent { unknowns: u64, equations: u64 },
    /// The normal form of POL^k modulo a Gröbner basis is nonzero.
    NonzeroNormalForm { basis_size: u64 },
    /// A counterexample point rules out every power.
    Refuted,
    /// The system was not built: it exceeds the configured budget.
    ExceedsBudget { unknowns: String, equations: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerAttempt {
    pub power: u32,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
}

/// Result of a membership decision over powers 1..=k_max.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipResult {
    pub witness: Option<MembershipWitness>,
    pub attempts: Vec<PowerAttempt>,
    pub counterexample: Option<CounterexamplePoint>,
}

impl MembershipResult {
    pub fn is_member(&self) -> bool {
        self.witness.is_some()
    }

    /// Every attempted power was decided negatively (no budget overflow).
    pub fn is_conclusive_failure(&self) -> bool {
        self.witness.is_none()
            && self.attempts.iter().all(|a| {
                !matches!(
                    a.outcome,
                    AttemptOutcome::ExceedsBudget { .. } | AttemptOutcome::Solved
                )
            })
    }

    pub(crate) fn refuted(k_max: u32, point: CounterexamplePoint) -> Self {
        Self {
            witness: None,
            attempts: (1..=k_max)
                .map(|power| PowerAttempt {
                    power,
                    outcome: AttemptOutcome::Refuted,
                })
                .collect(),
            counterexample: Some(point),
        }
    }
}

/// Checks the screening points; the first counterexample wins.
pub(crate) fn screen(
    pol: &GradedPolynomial,
    relations: &Relations,
    points: &[Assignment],
) -> Result<Option<CounterexamplePoint>> {
    for p in points {
        if let PointCheck::Counterexample(c) = check_point(p, pol, relations)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
