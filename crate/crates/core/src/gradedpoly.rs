//! Sparse polynomials over GF(ℓ) in the variables {J_i : i ∈ Jset(ℓ)}.
//!
//! Each monomial Π J_i^(e_i) carries a t-grade Σ i·e_i mod ℓ. Multiplying
//! monomials adds grades mod ℓ, which is exactly the reduction of
//! (Σ J_i tⁱ)^b modulo t^ℓ − 1, so the auxiliary variable t never appears.
//!
//! Terms are kept in graded-reverse-lexicographic order, leading term first,
//! with the variables ordered J_{i₀} > J_{i₁} > … by increasing residue.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::modfield::PrimeField;
use crate::qseries::TruncatedSeries;
use crate::residues::jset;

/// Values for (some of) the variables, keyed by the residue i of J_i.
pub type Assignment = BTreeMap<u32, u32>;

/// The ring GF(ℓ)[J_i : i ∈ vars].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    field: PrimeField,
    vars: Arc<[u32]>,
}

impl PolyRing {
    /// The ring of the method for modulus ℓ, with variables indexed by Jset(ℓ).
    pub fn for_modulus(modulus: u32) -> Result<Self> {
        if modulus == 3 {
            return Err(Error::ModulusThree);
        }
        let field = PrimeField::new(modulus)?;
        let vars = jset(modulus)?;
        Self::new(field, vars.members().to_vec())
    }

    /// A ring over an explicit, strictly increasing list of residues.
    pub fn new(field: PrimeField, vars: Vec<u32>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument(
                "a ring needs at least one variable".into(),
            ));
        }
        if !vars.windows(2).all(|w| w[0] < w[1]) || vars.iter().any(|&v| v >= field.modulus()) {
            return Err(Error::InvalidArgument(format!(
                "variables {vars:?} must be increasing residues mod {}",
                field.modulus()
            )));
        }
        Ok(Self {
            field,
            vars: vars.into(),
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn modulus(&self) -> u32 {
        self.field.modulus()
    }

    /// Residues of the variables, in variable order.
    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Position of J_i in the variable list.
    pub fn var_index(&self, residue: u32) -> Option<usize> {
        self.vars.binary_search(&residue).ok()
    }

    pub fn grade(&self, m: &Monomial) -> u32 {
        let l = self.modulus() as u64;
        let s: u64 = m
            .exps()
            .iter()
            .zip(self.vars.iter())
            .map(|(&e, &v)| e as u64 * v as u64)
            .sum();
        (s % l) as u32
    }

    /// The ring on the variables not fixed by `fixed`.
    pub fn without(&self, fixed: &Assignment) -> Result<Self> {
        let vars: Vec<u32> = self
            .vars
            .iter()
            .copied()
            .filter(|v| !fixed.contains_key(v))
            .collect();
        Self::new(self.field, vars)
    }
}

/// An exponent vector over the variables of a [`PolyRing`].
///
/// `Ord` is graded reverse lexicographic: higher total degree is greater; on
/// ties the monomial with the smaller exponent in the last differing variable
/// is greater.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[u16; 12]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exps(exps: &[u16]) -> Self {
        Self(SmallVec::from_slice(exps))
    }

    /// The variable at position `index`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[index] = 1;
        m
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `self / divisor` when `divisor` divides `self`.
    pub fn div(&self, divisor: &Monomial) -> Option<Monomial> {
        if !divisor.divides(self) {
            return None;
        }
        Some(Monomial(
            self.0
                .iter()
                .zip(divisor.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(&a, &b)| a == 0 || b == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in GF(ℓ)[J_i] in canonical form: distinct monomials, nonzero
/// coefficients, leading (largest) term first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedPolynomial {
    ring: PolyRing,
    terms: Vec<(Monomial, u32)>,
}

impl fmt::Debug for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedPolynomial({self})")
    }
}

impl GradedPolynomial {
    pub fn zero(ring: &PolyRing) -> Self {
        Self {
            ring: ring.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: &PolyRing, c: u32) -> Self {
        let c = c % ring.modulus();
        Self::from_canonical(
            ring,
            if c == 0 {
                vec![]
            } else {
                vec![(Monomial::one(ring.nvars()), c)]
            },
        )
    }

    pub fn one(ring: &PolyRing) -> Self {
        Self::constant(ring, 1)
    }

    /// The variable J_i.
    pub fn variable(ring: &PolyRing, residue: u32) -> Result<Self> {
        let idx = ring
            .var_index(residue)
            .ok_or(Error::MissingAssignment(residue))?;
        Ok(Self::from_canonical(
            ring,
            vec![(Monomial::var(ring.nvars(), idx), 1)],
        ))
    }

    /// Σ J_i over all variables of the ring; J_i has grade i.
    pub fn generator(ring: &PolyRing) -> Self {
        let terms = (0..ring.nvars())
            .map(|k| (Monomial::var(ring.nvars(), k), 1))
            .collect();
        Self::from_terms(ring, terms)
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms(ring: &PolyRing, terms: Vec<(Monomial, u32)>) -> Self {
        let f = ring.field();
        let mut map: FxHashMap<Monomial, u32> = FxHashMap::default();
        for (m, c) in terms {
            debug_assert_eq!(m.exps().len(), ring.nvars());
            let e = map.entry(m).or_insert(0);
            *e = f.add(*e, c % f.modulus());
        }
        Self::from_map(ring, map)
    }

    fn from_map(ring: &PolyRing, map: FxHashMap<Monomial, u32>) -> Self {
        let mut terms: Vec<(Monomial, u32)> = map.into_iter().filter(|(_, c)| *c != 0).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Self::from_canonical(ring, terms)
    }

    pub(crate) fn from_canonical(ring: &PolyRing, terms: Vec<(Monomial, u32)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| *c != 0));
        Self {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn terms(&self) -> &[(Monomial, u32)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Monomial, u32)> {
        self.terms.first()
    }

    /// Coefficient of `m` (zero if absent).
    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms
            .binary_search_by(|(t, _)| m.cmp(t))
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.degree())
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m, _)) => {
                let d = m.degree();
                self.terms.iter().all(|(t, _)| t.degree() == d)
            }
        }
    }

    /// The common grade of all terms, if there is one.
    pub fn common_grade(&self) -> Option<u32> {
        let g = self.ring.grade(&self.terms.first()?.0);
        self.terms
            .iter()
            .all(|(m, _)| self.ring.grade(m) == g)
            .then_some(g)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::IncompatibleRings);
        }
        Ok(())
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let f = self.ring.field();
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let adj = |c: u32| if negate_other { f.neg(c) } else { c };
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((other.terms[j].0.clone(), adj(other.terms[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = f.add(self.terms[i].1, adj(other.terms[j].1));
                    if c != 0 {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend(other.terms[j..].iter().map(|(m, c)| (m.clone(), adj(*c))));
        Self::from_canonical(&self.ring, out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.merge(other, false))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.merge(other, true))
    }

    pub fn neg(&self) -> Self {
        let f = self.ring.field();
        Self::from_canonical(
            &self.ring,
            self.terms
                .iter()
                .map(|(m, c)| (m.clone(), f.neg(*c)))
                .collect(),
        )
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = self.ring.field();
        let c = c % f.modulus();
        if c == 0 {
            return Self::zero(&self.ring);
        }
        Self::from_canonical(
            &self.ring,
            self.terms
                .iter()
                .map(|(m, x)| (m.clone(), f.mul(*x, c)))
                .collect(),
        )
    }

    /// `c · m · self`; monomial multiplication preserves the order.
    pub fn mul_term(&self, m: &Monomial, c: u32) -> Self {
        let f = self.ring.field();
        let c = c % f.modulus();
        if c == 0 {
            return Self::zero(&self.ring);
        }
        Self::from_canonical(
            &self.ring,
            self.terms
                .iter()
                .map(|(t, x)| (t.mul(m), f.mul(*x, c)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_filtered(other, None))
    }

    /// The grade-`grade` component of `self · other`, computed without forming
    /// the other components.
    pub fn mul_projected(&self, other: &Self, grade: u32) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_filtered(other, Some(grade % self.ring.modulus())))
    }

    fn mul_filtered(&self, other: &Self, target: Option<u32>) -> Self {
        let ring = &self.ring;
        let l = ring.modulus();
        let p = l as u64;
        // Bucket the right operand by grade so a projection only pairs grades
        // summing to the target.
        let mut right_by_grade: Vec<Vec<(&Monomial, u64)>> = vec![Vec::new(); l as usize];
        for (m, c) in &other.terms {
            right_by_grade[ring.grade(m) as usize].push((m, *c as u64));
        }
        let mut acc: FxHashMap<Monomial, u64> = FxHashMap::default();
        for (lm, lc) in &self.terms {
            let g = ring.grade(lm);
            let lc = *lc as u64;
            let mut visit = |bucket: &Vec<(&Monomial, u64)>| {
                for (rm, rc) in bucket {
                    let e = acc.entry(lm.mul(rm)).or_insert(0);
                    *e = (*e + lc * rc) % p;
                }
            };
            match target {
                Some(t) => visit(&right_by_grade[((t + l - g) % l) as usize]),
                None => right_by_grade.iter().for_each(&mut visit),
            }
        }
        let map: FxHashMap<Monomial, u32> = acc.into_iter().map(|(m, c)| (m, c as u32)).collect();
        Self::from_map(ring, map)
    }

    /// `self^e` by binary exponentiation.
    pub fn power(&self, mut e: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_filtered(&base, None);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_filtered(&base, None);
            }
        }
        acc
    }

    /// Terms whose grade is `grade` mod ℓ.
    pub fn grade_component(&self, grade: u32) -> Self {
        let g = grade % self.ring.modulus();
        Self::from_canonical(
            &self.ring,
            self.terms
                .iter()
                .filter(|(m, _)| self.ring.grade(m) == g)
                .cloned()
                .collect(),
        )
    }

    /// Value at a point that assigns every variable.
    pub fn evaluate(&self, point: &Assignment) -> Result<u32> {
        let ring = &self.ring;
        let f = ring.field();
        let values: Vec<u32> = ring
            .vars()
            .iter()
            .map(|v| {
                point
                    .get(v)
                    .map(|x| x % f.modulus())
                    .ok_or(Error::MissingAssignment(*v))
            })
            .collect::<Result<_>>()?;
        let mut acc = 0u32;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (k, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = f.mul(t, f.pow(values[k], e as u64));
                }
            }
            acc = f.add(acc, t);
        }
        Ok(acc)
    }

    /// Substitutes constants for the variables in `fixed`, giving a
    /// polynomial in the remaining variables.
    pub fn specialize(&self, fixed: &Assignment, target: &PolyRing) -> Result<Self> {
        let f = self.ring.field();
        let keep: Vec<Option<usize>> = self
            .ring
            .vars()
            .iter()
            .map(|v| {
                if fixed.contains_key(v) {
                    None
                } else {
                    target.var_index(*v)
                }
            })
            .collect();
        for (v, k) in self.ring.vars().iter().zip(&keep) {
            if k.is_none() && !fixed.contains_key(v) {
                return Err(Error::MissingAssignment(*v));
            }
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut coeff = *c;
            let mut out = Monomial::one(target.nvars());
            for (idx, &e) in m.exps().iter().enumerate() {
                match keep[idx] {
                    Some(k) => out.0[k] = e,
                    None if e > 0 => {
                        let v = fixed[&self.ring.vars()[idx]];
                        coeff = f.mul(coeff, f.pow(v, e as u64));
                    }
                    None => {}
                }
            }
            terms.push((out, coeff));
        }
        Ok(Self::from_terms(target, terms))
    }

    /// Re-expresses the polynomial in `target`, a ring with a superset of
    /// this ring's variables.
    pub fn embed(&self, target: &PolyRing) -> Result<Self> {
        if target.field() != self.ring.field() {
            return Err(Error::IncompatibleRings);
        }
        let map: Vec<usize> = self
            .ring
            .vars()
            .iter()
            .map(|v| target.var_index(*v).ok_or(Error::IncompatibleRings))
            .collect::<Result<_>>()?;
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut out = Monomial::one(target.nvars());
                for (k, &e) in m.exps().iter().enumerate() {
                    out.0[map[k]] = e;
                }
                (out, *c)
            })
            .collect();
        Ok(Self::from_terms(target, terms))
    }

    /// Replaces each J_i by a truncated series and evaluates.
    ///
    /// When every assigned series for J_i is supported on exponents ≡ i
    /// (mod ℓ), as the components of E(q)³ are, the products are formed in
    /// the variable q^ℓ, which is ℓ² times cheaper.
    pub fn substitute_series(
        &self,
        assignment: &BTreeMap<u32, TruncatedSeries>,
    ) -> Result<TruncatedSeries> {
        let ring = &self.ring;
        let mut series: Vec<&TruncatedSeries> = Vec::with_capacity(ring.nvars());
        for v in ring.vars() {
            series.push(assignment.get(v).ok_or(Error::MissingAssignment(*v))?);
        }
        let order = series[0].order();
        for s in &series {
            if s.field() != ring.field() {
                return Err(Error::ModulusMismatch {
                    left: ring.modulus(),
                    right: s.modulus(),
                });
            }
            if s.order() != order {
                return Err(Error::IncompatibleSeries(format!(
                    "truncation orders {} and {} differ",
                    order,
                    s.order()
                )));
            }
        }
        let l = ring.modulus() as usize;
        let aligned = ring
            .vars()
            .iter()
            .zip(&series)
            .all(|(&v, s)| s.terms().all(|(n, _)| n % l == v as usize));
        let (stride, offsets): (usize, Vec<usize>) = if aligned {
            (l, ring.vars().iter().map(|&v| v as usize).collect())
        } else {
            (1, vec![0; ring.nvars()])
        };
        let decimated: Vec<Vec<u32>> = series
            .iter()
            .zip(&offsets)
            .map(|(s, &off)| {
                (0..=order / stride)
                    .map(|t| {
                        let n = off + stride * t;
                        if n <= order {
                            s.coeff(n)
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(substitute_decimated(
            self, &decimated, &offsets, stride, order,
        ))
    }

    /// Canonical text, e.g. `3*J0^2*J1 + 10*J3*J6^2`; the zero polynomial is `0`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Parses the canonical text form (whitespace-insensitive, `+`-separated
    /// terms; coefficients are reduced mod ℓ).
    pub fn parse(ring: &PolyRing, text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if compact == "0" {
            return Ok(Self::zero(ring));
        }
        let f = ring.field();
        let mut terms = Vec::new();
        for term in compact.split('+') {
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {text:?}")));
            }
            let mut coeff = 1u32;
            let mut m = Monomial::one(ring.nvars());
            for factor in term.split('*') {
                if let Some(var) = factor.strip_prefix('J') {
                    let (idx, exp) = match var.split_once('^') {
                        Some((i, e)) => (i, e),
                        None => (var, "1"),
                    };
                    let residue: u32 = idx
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad variable {factor:?}")))?;
                    let exp: u16 = exp
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent {factor:?}")))?;
                    let k = ring.var_index(residue).ok_or_else(|| {
                        Error::Parse(format!("J{residue} is not a ring variable"))
                    })?;
                    m.0[k] = m.0[k]
                        .checked_add(exp)
                        .ok_or_else(|| Error::Parse("exponent overflow".into()))?;
                } else {
                    let c: u64 = factor
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient {factor:?}")))?;
                    coeff = f.mul(coeff, f.reduce_u64(c));
                }
            }
            terms.push((m, coeff));
        }
        Ok(Self::from_terms(ring, terms))
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if *c != 1 || m.is_one() {
                factors.push(c.to_string());
            }
            for (k, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("J{}", self.ring.vars()[k])),
                    _ => factors.push(format!("J{}^{}", self.ring.vars()[k], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

fn mul_truncated(field: PrimeField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let len = a.len();
    let p = field.modulus() as u64;
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let x = x as u64;
        for (slot, &y) in out[i..].iter_mut().zip(b) {
            *slot = (*slot + x * y as u64) % p;
        }
    }
    out.into_iter().map(|v| v as u32).collect()
}

/// Evaluates `poly` with J_k = q^(offset_k) · K_k(q^stride), where
/// `decimated[k]` holds the coefficients of K_k. Terms are visited in
/// lexicographic exponent order so shared prefixes reuse partial products.
fn substitute_decimated(
    poly: &GradedPolynomial,
    decimated: &[Vec<u32>],
    offsets: &[usize],
    stride: usize,
    order: usize,
) -> TruncatedSeries {
    let field = poly.ring().field();
    let nv = decimated.len();
    let len = order / stride + 1;
    let mut out = vec![0u32; order + 1];

    let mut power_cache: FxHashMap<(usize, u16), Vec<u32>> = FxHashMap::default();
    let mut power = |k: usize, e: u16| -> Vec<u32> {
        if let Some(v) = power_cache.get(&(k, e)) {
            return v.clone();
        }
        let mut acc = vec![0u32; len];
        acc[0] = 1;
        for _ in 0..e {
            acc = mul_truncated(field, &acc, &decimated[k]);
        }
        power_cache.insert((k, e), acc.clone());
        acc
    };

    let mut order_terms: Vec<&(Monomial, u32)> = poly.terms().iter().collect();
    order_terms.sort_by(|a, b| a.0.exps().cmp(b.0.exps()));

    // prefix[k] = product of the factors for variables 0..k of `prev`.
    let mut one = vec![0u32; len];
    one[0] = 1;
    let mut prefix: Vec<Vec<u32>> = vec![one; nv + 1];
    let mut prev: Option<&Monomial> = None;
    for (m, c) in order_terms {
        let shift: usize = m
            .exps()
            .iter()
            .zip(offsets)
            .map(|(&e, &o)| e as usize * o)
            .sum();
        if shift > order {
            continue;
        }
        let common = match prev {
            Some(p) => p
                .exps()
                .iter()
                .zip(m.exps())
                .take_while(|(a, b)| a == b)
                .count(),
            None => 0,
        };
        for k in common..nv {
            let e = m.exps()[k];
            prefix[k + 1] = if e == 0 {
                prefix[k].clone()
            } else {
                mul_truncated(field, &prefix[k], &power(k, e))
            };
        }
        prev = Some(m);
        let product = &prefix[nv];
        for (t, &v) in product.iter().enumerate() {
            let n = shift + stride * t;
            if n > order {
                break;
            }
            if v != 0 {
                out[n] = field.add(out[n], field.mul(v, *c));
            }
        }
    }
    TruncatedSeries::from_raw(field, out)
}

/// Counts of monomials by (degree, grade) over a suffix of the variables;
/// used to size linear systems and to enumerate monomials of a given degree
/// and grade without generating the rest.
pub struct MonomialTable {
    ring: PolyRing,
    max_degree: u32,
    // counts[k][d][g]: monomials in variables k.. of degree d and grade g.
    counts: Vec<Vec<Vec<u128>>>,
}

impl MonomialTable {
    pub fn new(ring: &PolyRing, max_degree: u32) -> Self {
        let l = ring.modulus() as usize;
        let nv = ring.nvars();
        let dmax = max_degree as usize;
        let mut counts = vec![vec![vec![0u128; l]; dmax + 1]; nv + 1];
        counts[nv][0][0] = 1;
        for k in (0..nv).rev() {
            let v = ring.vars()[k] as usize;
            for d in 0..=dmax {
                for g in 0..l {
                    let mut total = 0u128;
                    for e in 0..=d {
                        let rest_g = (g + l * (e + 1) - (v * e) % l) % l;
                        total = total.saturating_add(counts[k + 1][d - e][rest_g]);
                    }
                    counts[k][d][g] = total;
                }
            }
        }
        Self {
            ring: ring.clone(),
            max_degree,
            counts,
        }
    }

    /// Number of monomials of the given degree (and grade, when given).
    pub fn count(&self, degree: u32, grade: Option<u32>) -> u128 {
        if degree > self.max_degree {
            return 0;
        }
        let row = &self.counts[0][degree as usize];
        match grade {
            Some(g) => row[(g % self.ring.modulus()) as usize],
            None => row.iter().fold(0u128, |a, &b| a.saturating_add(b)),
        }
    }

    /// All monomials of the given degree and grade, in increasing
    /// lexicographic exponent order.
    pub fn enumerate(&self, degree: u32, grade: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        if degree > self.max_degree {
            return out;
        }
        let mut cur = Monomial::one(self.ring.nvars());
        self.walk(
            0,
            degree as usize,
            (grade % self.ring.modulus()) as usize,
            &mut cur,
            &mut out,
        );
        out
    }

    fn walk(&self, k: usize, d: usize, g: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if self.counts[k][d][g] == 0 {
            return;
        }
        let nv = self.ring.nvars();
        if k == nv {
            out.push(cur.clone());
            return;
        }
        let l = self.ring.modulus() as usize;
        let v = self.ring.vars()[k] as usize;
        for e in 0..=d {
            let rest_g = (g + l * (e + 1) - (v * e) % l) % l;
            cur.0[k] = e as u16;
            self.walk(k + 1, d - e, rest_g, cur, out);
        }
        cur.0[k] = 0;
    }
}

/// Shared cache of powers of the generator Σ J_i of one ring.
///
/// Readers run concurrently; a missing power is computed outside the lock and
/// inserted under the write lock.
pub struct GeneratorPowers {
    ring: PolyRing,
    cache: RwLock<BTreeMap<u32, Arc<GradedPolynomial>>>,
}

impl GeneratorPowers {
    pub fn new(ring: &PolyRing) -> Self {
        Self {
            ring: ring.clone(),
            cache: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    /// (Σ J_i)^e.
    pub fn power(&self, e: u32) -> Arc<GradedPolynomial> {
        if let Some(p) = self.cache.read().expect("power cache poisoned").get(&e) {
            return Arc::clone(p);
        }
        let value = match e {
            0 => GradedPolynomial::one(&self.ring),
            1 => GradedPolynomial::generator(&self.ring),
            _ => {
                let lo = self.power(e / 2);
                let hi = self.power(e - e / 2);
                lo.mul_filtered(&hi, None)
            }
        };
        let mut w = self.cache.write().expect("power cache poisoned");
        Arc::clone(w.entry(e).or_insert_with(|| Arc::new(value)))
    }

    /// Grade-`grade` component of (Σ J_i)^e, projected in the final product
    /// so the full power is never formed.
    pub fn power_component(&self, e: u32, grade: u32) -> GradedPolynomial {
        if let Some(p) = self.cache.read().expect("power cache poisoned").get(&e) {
            return p.grade_component(grade);
        }
        if e < 2 {
            return self.power(e).grade_component(grade);
        }
        let lo = self.power(e / 2);
        let hi = self.power(e - e / 2);
        lo.mul_filtered(&hi, Some(grade % self.ring.modulus()))
    }
}
