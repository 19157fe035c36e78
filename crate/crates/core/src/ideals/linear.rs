//! Membership by undetermined coefficients.
//!
//! POL and every Q_m are homogeneous in both total degree and t-grade, so the
//! ideal they generate is bi-graded and POL^k ∈ (Q_m) iff there are cofactors
//! R_m of degree deg(POL^k) − deg(Q_m) and grade grade(POL^k) − m. Only those
//! monomials become unknowns; for ℓ = 11 that is a few dozen instead of
//! thousands.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::{
    check_homogeneous, screen, AttemptOutcome, MembershipResult, MembershipWitness, PowerAttempt,
    Relations,
};
use crate::error::Result;
use crate::gradedpoly::{Assignment, GradedPolynomial, Monomial, MonomialTable, PolyRing};
use crate::linalg::{LinearSystem, Solution, SparseVec};

#[derive(Clone, Debug)]
pub struct LinearOptions {
    /// Largest power k of POL to try.
    pub max_power: u32,
    pub max_unknowns: u128,
    pub max_equations: u128,
    /// Points checked with [`super::check_point`] before any solving.
    pub screen_points: Vec<Assignment>,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self {
            max_power: 3,
            max_unknowns: 6_000,
            max_equations: 400_000,
            screen_points: Vec::new(),
        }
    }
}

/// Unknown cofactor monomials, grouped by relation index.
pub(crate) type UnknownSet = Vec<(u32, Vec<Monomial>)>;

/// Builds A·x = b where column (m, μ) holds the coefficients of μ·Q_m and b
/// those of `target`. Rows are the monomials that occur anywhere.
pub(crate) fn build_system(
    target: &GradedPolynomial,
    relations: &Relations,
    unknowns: &UnknownSet,
) -> LinearSystem {
    let mut rows: FxHashMap<Monomial, u32> = FxHashMap::default();
    let mut row_of = |m: Monomial| -> u32 {
        let next = rows.len() as u32;
        *rows.entry(m).or_insert(next)
    };
    let mut columns = Vec::new();
    for (m, monos) in unknowns {
        let q = &relations[m];
        for mu in monos {
            let mut col: SparseVec = q
                .terms()
                .iter()
                .map(|(t, c)| (row_of(t.mul(mu)), *c))
                .collect();
            col.sort_unstable();
            columns.push(col);
        }
    }
    let mut rhs: SparseVec = target
        .terms()
        .iter()
        .map(|(t, c)| (row_of(t.clone()), *c))
        .collect();
    rhs.sort_unstable();
    LinearSystem {
        field: target.ring().field(),
        nrows: rows.len(),
        columns,
        rhs,
    }
}

pub(crate) fn assemble_cofactors(
    ring: &PolyRing,
    relations: &Relations,
    unknowns: &UnknownSet,
    x: &[u32],
) -> BTreeMap<u32, GradedPolynomial> {
    let mut out: BTreeMap<u32, GradedPolynomial> = relations
        .keys()
        .map(|m| (*m, GradedPolynomial::zero(ring)))
        .collect();
    let mut idx = 0;
    for (m, monos) in unknowns {
        let terms: Vec<(Monomial, u32)> = monos
            .iter()
            .zip(&x[idx..idx + monos.len()])
            .filter(|(_, &v)| v != 0)
            .map(|(mu, &v)| (mu.clone(), v))
            .collect();
        idx += monos.len();
        out.insert(*m, GradedPolynomial::from_terms(ring, terms));
    }
    out
}

fn fmt_count(n: u128) -> String {
    n.to_string()
}

/// Searches for POL^k = Σ R_m Q_m for k = 1..=max_power, stopping at the
/// first k that succeeds. A counterexample among the screening points
/// refutes every k at once.
pub fn membership_linear(
    pol: &GradedPolynomial,
    relations: &Relations,
    options: &LinearOptions,
) -> Result<MembershipResult> {
    check_homogeneous(pol, "POL")?;
    for (m, q) in relations {
        check_homogeneous(q, &format!("Q_{m}"))?;
        if q.ring() != pol.ring() {
            return Err(crate::Error::IncompatibleRings);
        }
    }
    let ring = pol.ring();
    let l = ring.modulus();

    if let Some(point) = screen(pol, relations, &options.screen_points)? {
        return Ok(MembershipResult::refuted(options.max_power, point));
    }

    if pol.is_zero() {
        let cofactors = relations
            .keys()
            .map(|m| (*m, GradedPolynomial::zero(ring)))
            .collect();
        return Ok(MembershipResult {
            witness: Some(MembershipWitness {
                target: pol.clone(),
                power: 1,
                cofactors,
            }),
            attempts: vec![PowerAttempt {
                power: 1,
                outcome: AttemptOutcome::Solved,
            }],
            counterexample: None,
        });
    }

    let pol_deg = pol.total_degree().expect("nonzero");
    let pol_grade = pol.common_grade().expect("checked homogeneous");
    let table = MonomialTable::new(ring, pol_deg * options.max_power);
    let mut attempts = Vec::new();
    let mut target = pol.clone();
    let mut target_power = 1;

    for k in 1..=options.max_power {
        let degree = pol_deg * k;
        let grade = (pol_grade as u64 * k as u64 % l as u64) as u32;
        let shapes: Vec<(u32, u32, u32)> = relations
            .iter()
            .filter(|(_, q)| !q.is_zero())
            .filter_map(|(m, q)| {
                let qd = q.total_degree()?;
                let qg = q.common_grade()?;
                (qd <= degree).then(|| (*m, degree - qd, (grade + l - qg) % l))
            })
            .collect();
        let unknown_count: u128 = shapes
            .iter()
            .map(|&(_, d, g)| table.count(d, Some(g)))
            .fold(0, u128::saturating_add);
        let equation_count = table.count(degree, Some(grade));
        if unknown_count > options.max_unknowns || equation_count > options.max_equations {
            attempts.push(PowerAttempt {
                power: k,
                outcome: AttemptOutcome::ExceedsBudget {
                    unknowns: fmt_count(unknown_count),
                    equations: fmt_count(equation_count),
                },
            });
            continue;
        }

        while target_power < k {
            target = target.mul(pol)?;
            target_power += 1;
        }
        let t = &target;
        let unknowns: UnknownSet = shapes
            .iter()
            .map(|&(m, d, g)| (m, table.enumerate(d, g)))
            .collect();
        let system = build_system(t, relations, &unknowns);
        let outcome = match system.solve() {
            Solution::Consistent(x) => {
                let cofactors = assemble_cofactors(ring, relations, &unknowns, &x);
                let witness = MembershipWitness {
                    target: t.clone(),
                    power: k,
                    cofactors,
                };
                assert!(
                    witness.verify(relations),
                    "linear solution failed the exact identity check"
                );
                attempts.push(PowerAttempt {
                    power: k,
                    outcome: AttemptOutcome::Solved,
                });
                return Ok(MembershipResult {
                    witness: Some(witness),
                    attempts,
                    counterexample: None,
                });
            }
            Solution::Inconsistent => AttemptOutcome::Inconsistent {
                unknowns: system.ncols() as u64,
                equations: system.nrows as u64,
            },
        };
        attempts.push(PowerAttempt { power: k, outcome });
    }
    Ok(MembershipResult {
        witness: None,
        attempts,
        counterexample: None,
    })
}
