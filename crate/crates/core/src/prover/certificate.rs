//! Proof certificates, failure reports and the independent verifier.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{build_pol, build_relations, j_series};
use crate::error::{Error, Result};
use crate::gradedpoly::{GradedPolynomial, PolyRing};
use crate::ideals::{CounterexamplePoint, MembershipWitness, PowerAttempt};
use crate::modfield::PrimeField;
use crate::qseries::p_minus_a;
use crate::residues::{derive_parameters, eset, MethodParameters};

pub const CERTIFICATE_FORMAT: &str = "partcong-certificate/1";
pub const FAILURE_FORMAT: &str = "partcong-failure/1";

/// Polynomials with more terms than this are summarized, not printed, in
/// the human-readable proof.
const DISPLAY_TERMS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterBlock {
    pub alpha: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl From<MethodParameters> for ParameterBlock {
    fn from(p: MethodParameters) -> Self {
        Self {
            alpha: p.alpha,
            b: p.b,
            c: p.c,
            d: p.d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofStyle {
    /// POL is the zero polynomial.
    Ramanujan,
    /// POL^k = Σ R_m Q_m.
    Hirschhorn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CofactorEntry {
    pub m: u32,
    pub cofactor: String,
}

/// Everything needed to re-check a proof without re-running any search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub format: String,
    pub a: u32,
    pub l: u32,
    pub r: u32,
    pub parameters: ParameterBlock,
    pub style: ProofStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cofactors: Vec<CofactorEntry>,
    /// Series order N used by the numerical checks.
    pub truncation_order: usize,
    pub tool_version: String,
}

impl ProofCertificate {
    pub(crate) fn ramanujan(params: MethodParameters, r: u32, order: usize) -> Self {
        Self {
            format: CERTIFICATE_FORMAT.into(),
            a: params.a,
            l: params.modulus,
            r,
            parameters: params.into(),
            style: ProofStyle::Ramanujan,
            power: None,
            cofactors: Vec::new(),
            truncation_order: order,
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub(crate) fn hirschhorn(
        params: MethodParameters,
        r: u32,
        witness: &MembershipWitness,
        order: usize,
    ) -> Self {
        Self {
            style: ProofStyle::Hirschhorn,
            power: Some(witness.power),
            cofactors: witness
                .cofactors
                .iter()
                .map(|(m, p)| CofactorEntry {
                    m: *m,
                    cofactor: p.render(),
                })
                .collect(),
            ..Self::ramanujan(params, r, order)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedCertificate(e.to_string()))
    }

    /// Cofactors parsed into `ring`; relations without an entry get zero.
    pub fn parse_cofactors(
        &self,
        ring: &PolyRing,
        indices: &[u32],
    ) -> Result<BTreeMap<u32, GradedPolynomial>> {
        let mut out: BTreeMap<u32, GradedPolynomial> = indices
            .iter()
            .map(|m| (*m, GradedPolynomial::zero(ring)))
            .collect();
        for entry in &self.cofactors {
            if !out.contains_key(&entry.m) {
                return Err(Error::MalformedCertificate(format!(
                    "cofactor for Q_{} but {} is in Eset({})",
                    entry.m, entry.m, self.l
                )));
            }
            let p = GradedPolynomial::parse(ring, &entry.cofactor)
                .map_err(|e| Error::MalformedCertificate(format!("cofactor R_{}: {e}", entry.m)))?;
            out.insert(entry.m, p);
        }
        Ok(out)
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedCertificate(msg));
        if self.format != CERTIFICATE_FORMAT {
            return bad(format!("unknown format {:?}", self.format));
        }
        if self.l == 3 || PrimeField::new(self.l).is_err() {
            return bad(format!(
                "modulus {} is not an odd prime other than 3",
                self.l
            ));
        }
        if self.r >= self.l {
            return bad(format!("residue {} not below modulus {}", self.r, self.l));
        }
        if self.a == 0 {
            return bad("a must be at least 1".into());
        }
        match self.style {
            ProofStyle::Ramanujan if self.power.is_some() || !self.cofactors.is_empty() => {
                bad("a ramanujan certificate carries no power or cofactors".into())
            }
            ProofStyle::Hirschhorn if self.power.unwrap_or(0) == 0 => {
                bad("a hirschhorn certificate needs a power k ≥ 1".into())
            }
            _ => Ok(()),
        }
    }
}

/// Why no certificate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No proof within the configured powers and budgets; nothing more is
    /// claimed.
    NotFoundWithinBounds,
    /// A counterexample point rules out POL^k ∈ (Q_m) for every k.
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    pub format: String,
    pub a: u32,
    pub l: u32,
    pub r: u32,
    pub parameters: ParameterBlock,
    pub verdict: Verdict,
    pub route: String,
    pub pol_terms: Option<usize>,
    pub attempts: Vec<PowerAttempt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexamplePoint>,
    pub seed: u64,
    pub random_trials: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub tool_version: String,
}

impl FailureReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "no proof of p_-{}({}n + {}) ≡ 0 (mod {})",
            self.a, self.l, self.r, self.l
        );
        match (&self.verdict, &self.counterexample) {
            (Verdict::Refuted, Some(c)) => {
                let coords: Vec<String> = c.assignment.values().map(u32::to_string).collect();
                let _ = write!(
                    s,
                    ": refuted for every power; at J = ({}) all Q_m vanish and POL = {}",
                    coords.join(", "),
                    c.pol_value
                );
            }
            _ => s.push_str(": not found within bounds"),
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub a: u32,
    pub l: u32,
    pub r: u32,
    pub style: ProofStyle,
    pub truncation_order: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    /// No check failed (skipped checks are fine).
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "certificate for p_-{}({}n + {}) ≡ 0 (mod {}), N = {}\n",
            self.a, self.l, self.r, self.l, self.truncation_order
        );
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            let _ = writeln!(s, "  [{tag}] {}: {}", c.name, c.detail);
        }
        let _ = writeln!(
            s,
            "{}",
            if self.all_passed() {
                "verified"
            } else {
                "REJECTED"
            }
        );
        s
    }
}

fn result(name: &str, ok: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        status: if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail,
    }
}

/// Recomputes everything from (a, ℓ, r) and the certificate's own data:
///
/// - `parameters`: α, b, c, d satisfy their defining identities;
/// - `identity`: POL = 0, or POL^k = Σ R_m Q_m exactly;
/// - `series`: p₋ₐ(ℓn + r) ≡ 0 for every ℓn + r ≤ N;
/// - `relations`: every Q_m vanishes as a q-series up to q^N (hirschhorn
///   only).
///
/// Structural problems are errors; failed checks are reported.
pub fn verify_certificate(cert: &ProofCertificate, order: usize) -> Result<VerificationReport> {
    cert.check_structure()?;
    let (a, l, r) = (cert.a, cert.l, cert.r);
    let field = PrimeField::new(l)?;
    let mut checks = Vec::new();

    let params = derive_parameters(a, l)?;
    let block = ParameterBlock::from(params);
    let params_ok = params.check() && block == cert.parameters;
    checks.push(result(
        "parameters",
        params_ok,
        format!(
            "alpha={} b={} c={} d={} (recorded alpha={} b={} c={} d={})",
            block.alpha,
            block.b,
            block.c,
            block.d,
            cert.parameters.alpha,
            cert.parameters.b,
            cert.parameters.c,
            cert.parameters.d
        ),
    ));

    let pol = build_pol(a, l, r)?;
    match cert.style {
        ProofStyle::Ramanujan => {
            checks.push(result(
                "identity",
                pol.is_zero(),
                format!("POL has {} terms", pol.len()),
            ));
        }
        ProofStyle::Hirschhorn => {
            let relations = build_relations(l)?;
            let indices: Vec<u32> = relations.keys().copied().collect();
            let cofactors = cert.parse_cofactors(pol.ring(), &indices)?;
            let power = cert.power.expect("checked");
            let witness = MembershipWitness {
                target: pol.power(power),
                power,
                cofactors,
            };
            checks.push(result(
                "identity",
                witness.verify(&relations),
                format!("POL^{power} − Σ R_m Q_m over {} relations", relations.len()),
            ));
        }
    }

    let series = p_minus_a(a, order, field)?;
    let slice = series.arith_progression_slice(l, r)?;
    let bad = slice.iter().position(|&v| v != 0);
    checks.push(result(
        "series",
        bad.is_none(),
        match bad {
            None => format!(
                "p_-{a}({l}n + {r}) ≡ 0 for 0 ≤ n ≤ {}",
                slice.len().saturating_sub(1)
            ),
            Some(n) => format!("p_-{a}({l}·{n} + {r}) ≡ {} (mod {l})", slice[n]),
        },
    ));

    match cert.style {
        ProofStyle::Ramanujan => checks.push(CheckResult {
            name: "relations".into(),
            status: CheckStatus::Skipped,
            detail: "no relations used".into(),
        }),
        ProofStyle::Hirschhorn => {
            let js = j_series(l, order)?;
            let relations = build_relations(l)?;
            let mut nonzero = Vec::new();
            for (m, q) in &relations {
                if !q.substitute_series(&js)?.is_zero() {
                    nonzero.push(*m);
                }
            }
            checks.push(result(
                "relations",
                nonzero.is_empty(),
                if nonzero.is_empty() {
                    format!("all {} Q_m vanish up to q^{order}", relations.len())
                } else {
                    format!("Q_m does not vanish for m in {nonzero:?}")
                },
            ));
        }
    }

    Ok(VerificationReport {
        a,
        l,
        r,
        style: cert.style,
        truncation_order: order,
        checks,
    })
}

fn show(p: &GradedPolynomial) -> String {
    if p.len() <= DISPLAY_TERMS {
        p.render()
    } else {
        format!("<{} terms>", p.len())
    }
}

/// The proof written out as a short narrative.
pub fn render_proof(cert: &ProofCertificate) -> Result<String> {
    cert.check_structure()?;
    let (a, l, r) = (cert.a, cert.l, cert.r);
    let p = cert.parameters;
    let mut s = String::new();
    let _ = writeln!(s, "Theorem. p_-{a}({l}n + {r}) ≡ 0 (mod {l}).");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Proof. Write 1/E(q)^{a} = (E(q)^3)^{} / E(q)^{}, since {a} + 3·{} = {}·{l}.",
        p.b,
        p.alpha * l,
        p.b,
        p.alpha
    );
    let _ = writeln!(
        s,
        "Modulo {l}, E(q)^{} ≡ E(q^{l})^{}, so only (E(q)^3)^{} matters on exponents ≡ {r} (mod {l}).",
        p.alpha * l,
        p.alpha,
        p.b
    );
    let _ = writeln!(
        s,
        "Split E(q)^3 = Σ J_i with J_i supported on exponents ≡ i (mod {l}), i ∈ Jset({l}) = {}.",
        crate::residues::jset(l)?
    );
    let pol = build_pol(a, l, r)?;
    match cert.style {
        ProofStyle::Ramanujan => {
            let _ = writeln!(
                s,
                "POL = Coeff_t^{r} (Σ J_i t^i)^{} is the zero polynomial over GF({l}),",
                p.b
            );
            let _ = writeln!(
                s,
                "so no term of (E(q)^3)^{} lands on exponents ≡ {r} (mod {l}).",
                p.b
            );
        }
        ProofStyle::Hirschhorn => {
            let k = cert.power.expect("checked");
            let _ = writeln!(s, "POL = Coeff_t^{r} (Σ J_i t^i)^{} = {}", p.b, show(&pol));
            let _ = writeln!(
                s,
                "Since 3·{} = 1 + {}·{l}, (E(q)^3)^{} ≡ E(q)·E(q^{l})^{} (mod {l}), and for m ∉ Eset({l}) = {}",
                p.c,
                p.d,
                p.c,
                p.d,
                eset(l)?
            );
            let _ = writeln!(
                s,
                "the relations Q_m = Coeff_t^m (Σ J_i t^i)^{} vanish as q-series.",
                p.c
            );
            let relations = build_relations(l)?;
            for (m, q) in &relations {
                let _ = writeln!(s, "  Q_{m} = {}", show(q));
            }
            let _ = writeln!(s, "Then POL^{k} = Σ R_m Q_m with");
            let indices: Vec<u32> = relations.keys().copied().collect();
            for (m, rm) in cert.parse_cofactors(pol.ring(), &indices)? {
                let _ = writeln!(s, "  R_{m} = {}", show(&rm));
            }
            let _ = writeln!(
                s,
                "so POL^{k}, and hence POL, vanishes as a q-series modulo {l}."
            );
        }
    }
    let _ = writeln!(s, "QED");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::{prove, ProofOutcome, ProveOptions};

    fn cert(a: u32, l: u32, r: u32) -> ProofCertificate {
        match prove(a, l, r, &ProveOptions::default()).unwrap() {
            ProofOutcome::Proved(c) => c,
            ProofOutcome::Failed(f) => panic!("{}", f.summary()),
        }
    }

    #[test]
    fn json_round_trip_keeps_field_order() {
        let c = cert(1, 11, 6);
        let text = c.to_json();
        let keys = [
            "\"format\"",
            "\"a\"",
            "\"l\"",
            "\"r\"",
            "\"parameters\"",
            "\"style\"",
            "\"power\"",
            "\"cofactors\"",
            "\"truncation_order\"",
            "\"tool_version\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert_eq!(ProofCertificate::from_json(&text).unwrap(), c);
    }

    #[test]
    fn corrupted_cofactor_fails_identity() {
        let mut c = cert(1, 11, 6);
        let entry = c.cofactors.iter_mut().find(|e| e.cofactor != "0").unwrap();
        let ring = PolyRing::for_modulus(11).unwrap();
        let p = GradedPolynomial::parse(&ring, &entry.cofactor).unwrap();
        let (m, coeff) = p.terms()[0].clone();
        let bumped = p
            .add(&GradedPolynomial::from_terms(&ring, vec![(m, 1)]))
            .unwrap();
        assert_ne!(coeff, 0);
        entry.cofactor = bumped.render();
        let report = verify_certificate(&c, 200).unwrap();
        assert_eq!(report.check("identity").unwrap().status, CheckStatus::Fail);
        assert_eq!(report.check("series").unwrap().status, CheckStatus::Pass);
        assert!(!report.all_passed());
    }

    #[test]
    fn wrong_residue_fails_series_check() {
        let mut c = cert(1, 5, 4);
        c.r = 3;
        let report = verify_certificate(&c, 200).unwrap();
        assert_eq!(report.check("identity").unwrap().status, CheckStatus::Fail);
        assert_eq!(report.check("series").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn tampered_parameters_detected() {
        let mut c = cert(1, 7, 5);
        c.parameters.b += 7;
        let report = verify_certificate(&c, 100).unwrap();
        assert_eq!(
            report.check("parameters").unwrap().status,
            CheckStatus::Fail
        );
    }

    #[test]
    fn structural_errors() {
        let mut c = cert(1, 7, 5);
        c.l = 9;
        assert!(matches!(
            verify_certificate(&c, 100),
            Err(Error::MalformedCertificate(_))
        ));
        let mut c = cert(1, 7, 5);
        c.power = Some(1);
        assert!(matches!(
            verify_certificate(&c, 100),
            Err(Error::MalformedCertificate(_))
        ));
        assert!(ProofCertificate::from_json("{\"format\": 3}").is_err());
        let mut c = cert(1, 11, 6);
        c.cofactors[0].cofactor = "J2^3".into();
        assert!(matches!(
            verify_certificate(&c, 100),
            Err(Error::MalformedCertificate(_))
        ));
        let mut c = cert(1, 11, 6);
        c.cofactors[0].m = 0;
        assert!(matches!(
            verify_certificate(&c, 100),
            Err(Error::MalformedCertificate(_))
        ));
    }

    #[test]
    fn rendered_proofs_end_in_qed() {
        for (a, l, r) in [(1, 5, 4), (1, 11, 6)] {
            let text = render_proof(&cert(a, l, r)).unwrap();
            assert!(text.starts_with(&format!("Theorem. p_-{a}({l}n + {r})")));
            assert!(text.trim_end().ends_with("QED"));
        }
        let text = render_proof(&cert(1, 11, 6)).unwrap();
        assert!(text.contains("R_3 = "));
        assert!(text.contains("Q_10 = "));
    }
}
