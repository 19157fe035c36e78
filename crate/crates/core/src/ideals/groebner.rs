//! Buchberger's algorithm in grevlex order with the product and chain
//! criteria, the normal selection strategy and representation tracking, so
//! that a zero normal form turns into explicit cofactors.
//!
//! For homogeneous generators a basis truncated at degree D decides
//! membership for every homogeneous polynomial of degree at most D.

use std::collections::BTreeMap;

use super::{
    check_homogeneous, screen, AttemptOutcome, MembershipResult, MembershipWitness, PowerAttempt,
    Relations,
};
use crate::error::{Error, Result};
use crate::gradedpoly::{Assignment, GradedPolynomial, Monomial, PolyRing};

/// Element of the basis as a combination of the original generators.
pub type Representation = BTreeMap<u32, GradedPolynomial>;

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    ring: PolyRing,
    elements: Vec<GradedPolynomial>,
    representation: Vec<Representation>,
    degree_bound: Option<u32>,
    work: u64,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub remainder: GradedPolynomial,
    /// One quotient per basis element.
    pub quotients: Vec<GradedPolynomial>,
}

#[derive(Clone, Debug)]
pub struct GroebnerOptions {
    pub max_power: u32,
    /// Pairs whose lcm exceeds this degree are skipped. `None` computes the
    /// whole basis.
    pub degree_bound: Option<u32>,
    /// Give up once the basis has this many elements.
    pub max_basis: usize,
    /// Give up after this many term operations in reductions.
    pub max_work: u64,
    pub screen_points: Vec<Assignment>,
}

impl Default for GroebnerOptions {
    fn default() -> Self {
        Self {
            max_power: 3,
            degree_bound: None,
            max_basis: 400,
            max_work: 20_000_000,
            screen_points: Vec::new(),
        }
    }
}

impl GroebnerBasis {
    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    /// Reduced, monic, sorted by increasing leading monomial.
    pub fn elements(&self) -> &[GradedPolynomial] {
        &self.elements
    }

    pub fn representation(&self) -> &[Representation] {
        &self.representation
    }

    pub fn degree_bound(&self) -> Option<u32> {
        self.degree_bound
    }

    /// Term operations spent computing the basis.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements
            .iter()
            .map(|g| g.leading().expect("nonzero").0.clone())
            .collect()
    }

    /// Membership test by normal form. With a degree bound only targets of
    /// degree at most the bound are decided.
    pub fn contains(&self, p: &GradedPolynomial) -> Result<bool> {
        if let (Some(bound), Some(d)) = (self.degree_bound, p.total_degree()) {
            if d > bound {
                return Err(Error::InvalidArgument(format!(
                    "degree {d} exceeds the basis truncation {bound}"
                )));
            }
        }
        Ok(normal_form(p, &self.elements)?.remainder.is_zero())
    }
}

fn leading(p: &GradedPolynomial) -> (&Monomial, u32) {
    let (m, c) = p.leading().expect("nonzero polynomial");
    (m, *c)
}

fn drop_leading(p: &GradedPolynomial) -> GradedPolynomial {
    GradedPolynomial::from_canonical(p.ring(), p.terms()[1..].to_vec())
}

/// Full reduction of `p` by `basis` (every term, not just the leading one).
pub fn normal_form(p: &GradedPolynomial, basis: &[GradedPolynomial]) -> Result<NormalForm> {
    normal_form_counted(p, basis, &mut Work::unlimited())
}

/// Term operations spent so far, against a limit.
pub(crate) struct Work {
    spent: u64,
    limit: u64,
}

impl Work {
    fn unlimited() -> Self {
        Self {
            spent: 0,
            limit: u64::MAX,
        }
    }

    fn charge(&mut self, n: usize) -> Result<()> {
        self.spent = self.spent.saturating_add(n as u64);
        if self.spent > self.limit {
            return Err(Error::BudgetExceeded(format!(
                "Gröbner computation passed {} term operations",
                self.limit
            )));
        }
        Ok(())
    }
}

fn normal_form_counted(
    p: &GradedPolynomial,
    basis: &[GradedPolynomial],
    work: &mut Work,
) -> Result<NormalForm> {
    let ring = p.ring();
    let f = ring.field();
    if basis.iter().any(|g| g.ring() != ring) {
        return Err(Error::IncompatibleRings);
    }
    if basis.iter().any(GradedPolynomial::is_zero) {
        return Err(Error::InvalidArgument("zero polynomial in basis".into()));
    }
    let inv_lc: Vec<u32> = basis
        .iter()
        .map(|g| f.inv(leading(g).1))
        .collect::<Result<_>>()?;
    let mut quotient_terms: Vec<Vec<(Monomial, u32)>> = vec![Vec::new(); basis.len()];
    let mut remainder = Vec::new();
    let mut rest = p.clone();
    while let Some((lm, lc)) = rest.leading().cloned() {
        let hit = basis.iter().position(|g| leading(g).0.divides(&lm));
        match hit {
            Some(j) => {
                let mu = lm.div(leading(&basis[j]).0).expect("divides");
                let c = f.mul(lc, inv_lc[j]);
                work.charge(rest.len() + basis[j].len())?;
                rest = rest.sub(&basis[j].mul_term(&mu, c))?;
                quotient_terms[j].push((mu, c));
            }
            None => {
                remainder.push((lm, lc));
                rest = drop_leading(&rest);
            }
        }
    }
    Ok(NormalForm {
        remainder: GradedPolynomial::from_canonical(ring, remainder),
        quotients: quotient_terms
            .into_iter()
            .map(|t| GradedPolynomial::from_terms(ring, t))
            .collect(),
    })
}

fn combine(
    ring: &PolyRing,
    acc: &Representation,
    quotients: &[GradedPolynomial],
    reps: &[Representation],
) -> Result<Representation> {
    // acc − Σ q_j · rep_j
    let mut out = acc.clone();
    for (q, rep) in quotients.iter().zip(reps) {
        if q.is_zero() {
            continue;
        }
        for (m, r) in rep {
            let entry = out
                .entry(*m)
                .or_insert_with(|| GradedPolynomial::zero(ring));
            *entry = entry.sub(&q.mul(r)?)?;
        }
    }
    Ok(out)
}

fn scale_rep(rep: &Representation, c: u32) -> Representation {
    rep.iter().map(|(m, r)| (*m, r.scale(c))).collect()
}

#[derive(Clone, Copy, Debug)]
struct Pair {
    i: usize,
    j: usize,
}

/// Computes the reduced Gröbner basis of the generators, each element
/// tracked as a combination of them. Returns [`Error::BudgetExceeded`] when
/// the basis outgrows `max_basis` or the reductions exceed `max_work` term
/// operations.
pub fn buchberger(
    generators: &Relations,
    degree_bound: Option<u32>,
    max_basis: usize,
    max_work: u64,
) -> Result<GroebnerBasis> {
    let mut work = Work {
        spent: 0,
        limit: max_work,
    };
    let ring = match generators.values().next() {
        Some(g) => g.ring().clone(),
        None => return Err(Error::InvalidArgument("no generators".into())),
    };
    if generators.values().any(|g| g.ring() != &ring) {
        return Err(Error::IncompatibleRings);
    }
    if degree_bound.is_some() {
        for (m, g) in generators {
            check_homogeneous(g, &format!("generator {m}"))?;
        }
    }
    let f = ring.field();
    let mut basis: Vec<GradedPolynomial> = Vec::new();
    let mut reps: Vec<Representation> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut lcms: BTreeMap<(usize, usize), Monomial> = BTreeMap::new();

    let within = |m: &Monomial| degree_bound.is_none_or(|b| m.degree() <= b);

    let mut pending: Vec<(GradedPolynomial, Representation)> = generators
        .iter()
        .filter(|(_, g)| !g.is_zero())
        .map(|(m, g)| {
            let rep = BTreeMap::from([(*m, GradedPolynomial::one(&ring))]);
            (g.clone(), rep)
        })
        .collect();
    // lowest degree first keeps intermediate expressions small
    pending.sort_by(|a, b| leading(&a.0).0.cmp(leading(&b.0).0));

    let queue_new = |h: GradedPolynomial,
                     rep: Representation,
                     basis: &mut Vec<GradedPolynomial>,
                     reps: &mut Vec<Representation>,
                     pairs: &mut Vec<Pair>,
                     lcms: &mut BTreeMap<(usize, usize), Monomial>,
                     work: &mut Work|
     -> Result<()> {
        let nf = normal_form_counted(&h, basis, work)?;
        if nf.remainder.is_zero() {
            return Ok(());
        }
        let rep = combine(&ring, &rep, &nf.quotients, reps)?;
        let inv = f.inv(leading(&nf.remainder).1)?;
        let h = nf.remainder.scale(inv);
        let rep = scale_rep(&rep, inv);
        let t = basis.len();
        let lt = leading(&h).0.clone();
        // chain criterion on existing pairs
        pairs.retain(|p| {
            let l = &lcms[&(p.i, p.j)];
            let li = leading(&basis[p.i]).0.lcm(&lt);
            let lj = leading(&basis[p.j]).0.lcm(&lt);
            !(lt.divides(l) && &li != l && &lj != l)
        });
        for i in 0..t {
            let li = leading(&basis[i]).0;
            if li.is_coprime(&lt) {
                continue;
            }
            let l = li.lcm(&lt);
            if within(&l) {
                lcms.insert((i, t), l);
                pairs.push(Pair { i, j: t });
            }
        }
        basis.push(h);
        reps.push(rep);
        if basis.len() > max_basis {
            return Err(Error::BudgetExceeded(format!(
                "Gröbner basis grew past {max_basis} elements"
            )));
        }
        Ok(())
    };

    for (g, rep) in pending {
        queue_new(
            g, rep, &mut basis, &mut reps, &mut pairs, &mut lcms, &mut work,
        )?;
    }

    while !pairs.is_empty() {
        // normal strategy: smallest lcm first
        let pos = (0..pairs.len())
            .min_by(|&a, &b| lcms[&(pairs[a].i, pairs[a].j)].cmp(&lcms[&(pairs[b].i, pairs[b].j)]))
            .expect("nonempty");
        let Pair { i, j } = pairs.swap_remove(pos);
        let l = lcms[&(i, j)].clone();
        let (mi, ci) = leading(&basis[i]);
        let (mj, cj) = leading(&basis[j]);
        let ui = l.div(mi).expect("lcm");
        let uj = l.div(mj).expect("lcm");
        let ai = f.inv(ci)?;
        let aj = f.inv(cj)?;
        let s = basis[i]
            .mul_term(&ui, ai)
            .sub(&basis[j].mul_term(&uj, aj))?;
        let ui_poly = GradedPolynomial::from_canonical(&ring, vec![(ui, ai)]);
        let uj_poly = GradedPolynomial::from_canonical(&ring, vec![(uj, f.neg(aj))]);
        let rep = combine(
            &ring,
            &Representation::new(),
            &[ui_poly.neg(), uj_poly.neg()],
            &[reps[i].clone(), reps[j].clone()],
        )?;
        queue_new(
            s, rep, &mut basis, &mut reps, &mut pairs, &mut lcms, &mut work,
        )?;
    }

    // minimalize: drop elements whose leading monomial another one divides
    let n = basis.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        let li = leading(&basis[i]).0;
        for j in 0..n {
            if i != j
                && keep[j]
                && leading(&basis[j]).0.divides(li)
                && (li != leading(&basis[j]).0 || j < i)
            {
                keep[i] = false;
                break;
            }
        }
    }
    let mut elems: Vec<(GradedPolynomial, Representation)> = basis
        .into_iter()
        .zip(reps)
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e)
        .collect();
    elems.sort_by(|a, b| leading(&a.0).0.cmp(leading(&b.0).0));

    // reduce tails; leading monomials are fixed so order does not matter
    for i in 0..elems.len() {
        let (head, tail) = {
            let g = &elems[i].0;
            let (m, c) = leading(g);
            (
                GradedPolynomial::from_canonical(&ring, vec![(m.clone(), c)]),
                drop_leading(g),
            )
        };
        let others: Vec<GradedPolynomial> = elems
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, e)| e.0.clone())
            .collect();
        let other_reps: Vec<Representation> = elems
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, e)| e.1.clone())
            .collect();
        let nf = normal_form_counted(&tail, &others, &mut work)?;
        let rep = combine(&ring, &elems[i].1, &nf.quotients, &other_reps)?;
        elems[i] = (head.add(&nf.remainder)?, rep);
    }

    let (elements, representation) = elems
        .into_iter()
        .map(|(g, rep)| {
            let rep = rep.into_iter().filter(|(_, r)| !r.is_zero()).collect();
            (g, rep)
        })
        .unzip();
    Ok(GroebnerBasis {
        ring,
        elements,
        representation,
        degree_bound,
        work: work.spent,
    })
}

fn homogeneous_part(p: &GradedPolynomial, degree: u32, grade: u32) -> GradedPolynomial {
    let ring = p.ring();
    let terms = p
        .terms()
        .iter()
        .filter(|(m, _)| m.degree() == degree && ring.grade(m) == grade)
        .cloned()
        .collect();
    GradedPolynomial::from_canonical(ring, terms)
}

/// Membership of POL^k for k = 1..=max_power, each through a Gröbner basis
/// truncated at deg(POL^k).
pub fn membership_groebner(
    pol: &GradedPolynomial,
    relations: &Relations,
    options: &GroebnerOptions,
) -> Result<MembershipResult> {
    check_homogeneous(pol, "POL")?;
    for (m, q) in relations {
        check_homogeneous(q, &format!("Q_{m}"))?;
    }
    if let Some(point) = screen(pol, relations, &options.screen_points)? {
        return Ok(MembershipResult::refuted(options.max_power, point));
    }
    let ring = pol.ring();
    let l = ring.modulus();
    let zero_cofactors = || {
        relations
            .keys()
            .map(|m| (*m, GradedPolynomial::zero(ring)))
            .collect::<BTreeMap<_, _>>()
    };
    if pol.is_zero() {
        return Ok(MembershipResult {
            witness: Some(MembershipWitness {
                target: pol.clone(),
                power: 1,
                cofactors: zero_cofactors(),
            }),
            attempts: vec![PowerAttempt {
                power: 1,
                outcome: AttemptOutcome::Solved,
            }],
            counterexample: None,
        });
    }
    let pol_deg = pol.total_degree().expect("nonzero");
    let pol_grade = pol.common_grade().expect("homogeneous");
    let cap = options.degree_bound.unwrap_or(u32::MAX);

    let mut attempts = Vec::new();
    let mut target = pol.clone();
    for k in 1..=options.max_power {
        if k > 1 {
            target = target.mul(pol)?;
        }
        let degree = pol_deg * k;
        if degree > cap {
            attempts.push(PowerAttempt {
                power: k,
                outcome: AttemptOutcome::ExceedsBudget {
                    unknowns: format!("degree {degree} above truncation {cap}"),
                    equations: "-".into(),
                },
            });
            continue;
        }
        // A basis truncated at deg(POL^k) decides POL^k exactly.
        let gb = match buchberger(relations, Some(degree), options.max_basis, options.max_work) {
            Ok(basis) => basis,
            Err(Error::BudgetExceeded(msg)) => {
                attempts.extend((k..=options.max_power).map(|power| PowerAttempt {
                    power,
                    outcome: AttemptOutcome::ExceedsBudget {
                        unknowns: msg.clone(),
                        equations: "-".into(),
                    },
                }));
                break;
            }
            Err(e) => return Err(e),
        };
        let nf = normal_form(&target, gb.elements())?;
        if !nf.remainder.is_zero() {
            attempts.push(PowerAttempt {
                power: k,
                outcome: AttemptOutcome::NonzeroNormalForm {
                    basis_size: gb.len() as u64,
                },
            });
            continue;
        }
        let full = combine(
            ring,
            &Representation::new(),
            &nf.quotients
                .iter()
                .map(GradedPolynomial::neg)
                .collect::<Vec<_>>(),
            gb.representation(),
        )?;
        let grade = (pol_grade as u64 * k as u64 % l as u64) as u32;
        let mut cofactors = zero_cofactors();
        for (m, r) in full {
            let q = &relations[&m];
            let part = match (q.total_degree(), q.common_grade()) {
                (Some(qd), Some(qg)) if qd <= degree => {
                    homogeneous_part(&r, degree - qd, (grade + l - qg) % l)
                }
                _ => GradedPolynomial::zero(ring),
            };
            cofactors.insert(m, part);
        }
        let witness = MembershipWitness {
            target: target.clone(),
            power: k,
            cofactors,
        };
        assert!(
            witness.verify(relations),
            "Gröbner cofactors failed the exact identity check"
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
    Ok(MembershipResult {
        witness: None,
        attempts,
        counterexample: None,
    })
}
