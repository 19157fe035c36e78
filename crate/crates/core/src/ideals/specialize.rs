//! Membership after fixing some variables to constants.
//!
//! If POL^k = Σ R_m Q_m then substituting constants for some J_i keeps the
//! identity, with specialized cofactors. Every monomial of a specialized R_m
//! is the restriction of a monomial of degree d_m and grade g_m, which bounds
//! the unknowns. An inconsistent specialized system therefore refutes the
//! power k for the full problem, at a fraction of the size.
//!
//! Fixing a single variable to a nonzero value gives a system equivalent to
//! the full one under diagonal scaling, so only two or more fixed variables
//! can save anything, and for low degrees it takes three.

use std::collections::BTreeSet;

use super::linear::{build_system, UnknownSet};
use super::{check_homogeneous, check_point, PointCheck, Relations};
use crate::error::{Error, Result};
use crate::gradedpoly::{Assignment, GradedPolynomial, Monomial, MonomialTable, PolyRing};
use crate::linalg::Solution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecializedOutcome {
    /// The specialized system has a solution; nothing follows for the full
    /// problem.
    Consistent { unknowns: usize, equations: usize },
    /// No solution: POL^k is not in the ideal.
    Inconsistent { unknowns: usize, equations: usize },
}

impl SpecializedOutcome {
    pub fn refutes(&self) -> bool {
        matches!(self, SpecializedOutcome::Inconsistent { .. })
    }
}

/// Decides the specialized system for POL^k with the variables in `fixed`
/// set to constants.
pub fn specialized_membership(
    pol: &GradedPolynomial,
    relations: &Relations,
    fixed: &Assignment,
    k: u32,
) -> Result<SpecializedOutcome> {
    check_homogeneous(pol, "POL")?;
    for (m, q) in relations {
        check_homogeneous(q, &format!("Q_{m}"))?;
    }
    if k == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let ring = pol.ring();
    if let Some(v) = fixed.keys().find(|v| ring.var_index(**v).is_none()) {
        return Err(Error::InvalidArgument(format!(
            "J{v} is not a variable of the ring"
        )));
    }
    let l = ring.modulus();

    if pol.is_zero() {
        return Ok(SpecializedOutcome::Consistent {
            unknowns: 0,
            equations: 0,
        });
    }

    if fixed.len() == ring.nvars() {
        // One equation POL(pt)^k = Σ r_m Q_m(pt) in constants r_m.
        let unknowns = relations.len();
        return Ok(match check_point(fixed, pol, relations)? {
            PointCheck::Counterexample(_) => SpecializedOutcome::Inconsistent {
                unknowns,
                equations: 1,
            },
            _ => SpecializedOutcome::Consistent {
                unknowns,
                equations: 1,
            },
        });
    }

    let free = ring.without(fixed)?;
    let degree = pol.total_degree().expect("nonzero") * k;
    let grade = (pol.common_grade().expect("homogeneous") as u64 * k as u64 % l as u64) as u32;

    let fixed_table = if fixed.is_empty() {
        None
    } else {
        let fixed_ring = PolyRing::new(ring.field(), fixed.keys().copied().collect())?;
        Some(MonomialTable::new(&fixed_ring, degree))
    };
    let free_table = MonomialTable::new(&free, degree);

    let mut unknowns: UnknownSet = Vec::new();
    for (m, q) in relations {
        let (Some(qd), Some(qg)) = (q.total_degree(), q.common_grade()) else {
            continue;
        };
        if qd > degree {
            continue;
        }
        let d = degree - qd;
        let g = (grade + l - qg) % l;
        let monos: Vec<Monomial> = match &fixed_table {
            None => free_table.enumerate(d, g),
            Some(ft) => {
                let mut set = BTreeSet::new();
                for e in 0..=d {
                    for g_free in 0..l {
                        let g_fixed = (g + l - g_free) % l;
                        if ft.count(d - e, Some(g_fixed)) > 0 {
                            set.extend(free_table.enumerate(e, g_free));
                        }
                    }
                }
                set.into_iter().collect()
            }
        };
        unknowns.push((*m, monos));
    }

    let target = pol.power(k).specialize(fixed, &free)?;
    let rels: Relations = relations
        .iter()
        .map(|(m, q)| Ok((*m, q.specialize(fixed, &free)?)))
        .collect::<Result<_>>()?;
    let system = build_system(&target, &rels, &unknowns);
    let (unknowns, equations) = (system.ncols(), system.nrows);
    Ok(match system.solve() {
        Solution::Consistent(_) => SpecializedOutcome::Consistent {
            unknowns,
            equations,
        },
        Solution::Inconsistent => SpecializedOutcome::Inconsistent {
            unknowns,
            equations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::GeneratorPowers;
    use crate::modfield::PrimeField;
    use crate::residues::eset;

    fn instance(l: u32, b: u32, r: u32) -> (GradedPolynomial, Relations) {
        let ring = PolyRing::for_modulus(l).unwrap();
        let cache = GeneratorPowers::new(&ring);
        let c = PrimeField::new(l).unwrap().inv(3).unwrap();
        let pol = cache.power_component(b, r);
        let rels = eset(l)
            .unwrap()
            .complement()
            .members()
            .iter()
            .map(|&m| (m, cache.power_component(c, m)))
            .collect();
        (pol, rels)
    }

    fn point(pairs: &[(u32, u32)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn member_stays_consistent_under_any_specialization() {
        let (pol, rels) = instance(11, 7, 6);
        for fixed in [
            point(&[]),
            point(&[(10, 3)]),
            point(&[(0, 1), (6, 5)]),
            point(&[(1, 2), (3, 7), (10, 9)]),
            point(&[(0, 1), (1, 2), (3, 3), (6, 4), (10, 5)]),
        ] {
            let out = specialized_membership(&pol, &rels, &fixed, 1).unwrap();
            assert!(!out.refutes(), "{fixed:?}");
        }
    }

    #[test]
    fn unspecialized_matches_linear_route() {
        let (pol, rels) = instance(11, 7, 5);
        let out = specialized_membership(&pol, &rels, &Assignment::new(), 1).unwrap();
        assert!(out.refutes());
    }

    #[test]
    fn specialization_shrinks_the_system() {
        let (pol, rels) = instance(11, 7, 5);
        let full = specialized_membership(&pol, &rels, &Assignment::new(), 2).unwrap();
        let spec =
            specialized_membership(&pol, &rels, &point(&[(0, 1), (1, 3), (10, 4)]), 2).unwrap();
        let size = |o: &SpecializedOutcome| match o {
            SpecializedOutcome::Consistent { unknowns, .. }
            | SpecializedOutcome::Inconsistent { unknowns, .. } => *unknowns,
        };
        assert!(size(&spec) < size(&full));
    }

    #[test]
    fn fully_fixed_point_agrees_with_point_check() {
        let (pol, rels) = instance(17, 16, 15);
        let pt = point(&[
            (0, 1),
            (1, 1),
            (3, 2),
            (4, 10),
            (6, 9),
            (10, 11),
            (11, 15),
            (15, 12),
        ]);
        for k in 1..=3 {
            assert!(specialized_membership(&pol, &rels, &pt, k)
                .unwrap()
                .refutes());
        }
    }

    #[test]
    fn unknown_variable_rejected() {
        let (pol, rels) = instance(11, 7, 6);
        assert!(specialized_membership(&pol, &rels, &point(&[(2, 1)]), 1).is_err());
    }
}
