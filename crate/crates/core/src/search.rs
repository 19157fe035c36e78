//! Numerical search for congruences p₋ₐ(ℓn + r) ≡ 0 (mod ℓ).
//!
//! Each (a, ℓ) cell computes 1/E(q)^a mod ℓ once and tests every residue
//! class. Cells are independent and run on a rayon pool; results are sorted
//! by (a, ℓ, r), so the output does not depend on scheduling.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modfield::{odd_primes_in, PrimeField};
use crate::prover::{
    prove, FailureReport, ProofCertificate, ProofOutcome, ProofStyle, ProveOptions,
};
use crate::qseries::p_minus_a;

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "PARTCONG_WORKERS";

/// Largest a accepted without [`ScanOptions::long_run`].
pub const DESK_A_MAX: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Empirical,
    ProvedRamanujan,
    ProvedHirschhorn,
    Disproved,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Empirical => "empirical",
            Status::ProvedRamanujan => "proved-ramanujan",
            Status::ProvedHirschhorn => "proved-hirschhorn",
            Status::Disproved => "disproved",
        }
    }

    pub fn is_proved(self) -> bool {
        matches!(self, Status::ProvedRamanujan | Status::ProvedHirschhorn)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceCandidate {
    pub a: u32,
    pub l: u32,
    pub r: u32,
    pub status: Status,
    /// Largest n with ℓn + r ≤ N that was checked.
    pub tested_up_to: u64,
    /// For disproved candidates: some n with p₋ₐ(ℓn + r) ≢ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<u64>,
}

/// Which primes ℓ are scanned for a given a.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeRule {
    /// ℓ ≥ 2a + 1.
    TwiceAPlusOne,
    /// ℓ ≥ the given bound, whatever a is.
    AtLeast(u32),
}

impl PrimeRule {
    fn admits(self, a: u32, l: u32) -> bool {
        match self {
            PrimeRule::TwiceAPlusOne => l as u64 > 2 * a as u64,
            PrimeRule::AtLeast(lo) => l >= lo,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub rule: PrimeRule,
    /// Only odd a when set.
    pub odd_a_only: bool,
    /// Worker threads; `None` reads [`WORKERS_ENV`], else rayon's default.
    pub workers: Option<usize>,
    /// Required for a beyond [`DESK_A_MAX`].
    pub long_run: bool,
    /// Called once per finished (a, ℓ) cell with (done, total).
    pub progress: Option<fn(usize, usize)>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            rule: PrimeRule::TwiceAPlusOne,
            odd_a_only: false,
            workers: None,
            long_run: false,
            progress: None,
        }
    }
}

fn worker_count(requested: Option<usize>) -> Option<usize> {
    requested.or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n: &usize| n > 0)
    })
}

fn tested_up_to(l: u32, r: u32, order: usize) -> u64 {
    ((order - r as usize) / l as usize) as u64
}

fn scan_cell(a: u32, l: u32, order: usize) -> Result<Vec<CongruenceCandidate>> {
    let field = PrimeField::new(l)?;
    let series = p_minus_a(a, order, field)?;
    let mut out = Vec::new();
    for r in 0..l {
        let slice = series.arith_progression_slice(l, r)?;
        if slice.iter().all(|&v| v == 0) {
            out.push(CongruenceCandidate {
                a,
                l,
                r,
                status: Status::Empirical,
                tested_up_to: tested_up_to(l, r, order),
                witness: None,
            });
        }
    }
    Ok(out)
}

/// Every (a, ℓ, r) with a in `a_range`, ℓ an odd prime ≠ 3 in `l_range`
/// admitted by the rule, and p₋ₐ(ℓn + r) ≡ 0 for all ℓn + r ≤ `order`.
pub fn scan(
    a_range: RangeInclusive<u32>,
    l_range: RangeInclusive<u32>,
    order: usize,
    options: &ScanOptions,
) -> Result<Vec<CongruenceCandidate>> {
    if *a_range.start() == 0 {
        return Err(Error::InvalidArgument("a starts at 1".into()));
    }
    if *a_range.end() > DESK_A_MAX && !options.long_run {
        return Err(Error::InvalidArgument(format!(
            "a up to {} needs the long-run flag (desk limit {DESK_A_MAX})",
            a_range.end()
        )));
    }
    let l_max = *l_range.end();
    if order < 10 * l_max as usize {
        return Err(Error::InvalidArgument(format!(
            "truncation order {order} is below 10·ℓ_max = {}",
            10 * l_max
        )));
    }
    let primes: Vec<u32> = odd_primes_in(*l_range.start() as u64, l_max as u64)
        .into_iter()
        .filter(|&l| l != 3)
        .collect();
    let cells: Vec<(u32, u32)> = a_range
        .filter(|a| !options.odd_a_only || a % 2 == 1)
        .flat_map(|a| {
            primes
                .iter()
                .filter(move |&&l| options.rule.admits(a, l))
                .map(move |&l| (a, l))
        })
        .collect();

    let total = cells.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let run = || -> Result<Vec<CongruenceCandidate>> {
        let per_cell: Vec<Vec<CongruenceCandidate>> = cells
            .par_iter()
            .map(|&(a, l)| {
                let found = scan_cell(a, l, order);
                if let Some(report) = options.progress {
                    let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                    report(n, total);
                }
                found
            })
            .collect::<Result<_>>()?;
        let mut all: Vec<CongruenceCandidate> = per_cell.into_iter().flatten().collect();
        all.sort_by_key(|c| (c.a, c.l, c.r));
        Ok(all)
    };
    match worker_count(options.workers) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Tests one (a, ℓ, r) up to `order`: empirical if the slice vanishes,
/// otherwise disproved with the first nonzero index.
pub fn check_candidate(a: u32, l: u32, r: u32, order: usize) -> Result<CongruenceCandidate> {
    if r >= l {
        return Err(Error::InvalidArgument(format!(
            "residue {r} must be below {l}"
        )));
    }
    let series = p_minus_a(a, order, PrimeField::new(l)?)?;
    let slice = series.arith_progression_slice(l, r)?;
    let witness = slice.iter().position(|&v| v != 0).map(|n| n as u64);
    Ok(CongruenceCandidate {
        a,
        l,
        r,
        status: if witness.is_some() {
            Status::Disproved
        } else {
            Status::Empirical
        },
        tested_up_to: tested_up_to(l, r, order),
        witness,
    })
}

/// A candidate after a proof attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttemptedCandidate {
    pub candidate: CongruenceCandidate,
    pub certificate: Option<ProofCertificate>,
    pub failure: Option<FailureReport>,
}

/// Runs the prover on each candidate. Proofs upgrade the status; a failure
/// leaves it empirical and attaches the report.
pub fn attempt_proofs(
    candidates: &[CongruenceCandidate],
    options: &ProveOptions,
) -> Result<Vec<AttemptedCandidate>> {
    candidates
        .par_iter()
        .map(|c| {
            let mut candidate = c.clone();
            if candidate.status == Status::Disproved {
                return Ok(AttemptedCandidate {
                    candidate,
                    certificate: None,
                    failure: None,
                });
            }
            Ok(match prove(c.a, c.l, c.r, options)? {
                ProofOutcome::Proved(cert) => {
                    candidate.status = match cert.style {
                        ProofStyle::Ramanujan => Status::ProvedRamanujan,
                        ProofStyle::Hirschhorn => Status::ProvedHirschhorn,
                    };
                    AttemptedCandidate {
                        candidate,
                        certificate: Some(cert),
                        failure: None,
                    }
                }
                ProofOutcome::Failed(report) => AttemptedCandidate {
                    candidate,
                    certificate: None,
                    failure: Some(report),
                },
            })
        })
        .collect()
}

/// Fixed-width table with proved and empirical rows in separate sections.
pub fn render_table(candidates: &[CongruenceCandidate], order: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# N = {order}");
    let sections: [(&str, fn(Status) -> bool); 3] = [
        ("proved", Status::is_proved),
        ("empirical (not proved)", |st| st == Status::Empirical),
        ("disproved", |st| st == Status::Disproved),
    ];
    for (title, keep) in sections {
        let rows: Vec<&CongruenceCandidate> =
            candidates.iter().filter(|c| keep(c.status)).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(s, "## {title}");
        let _ = writeln!(
            s,
            "{:>4} {:>5} {:>5}  {:<18} {:>12}",
            "a", "l", "r", "status", "tested_up_to"
        );
        for c in rows {
            let _ = writeln!(
                s,
                "{:>4} {:>5} {:>5}  {:<18} {:>12}",
                c.a,
                c.l,
                c.r,
                c.status.as_str(),
                c.tested_up_to
            );
        }
    }
    s
}

/// One JSON object per line.
pub fn render_jsonl(candidates: &[CongruenceCandidate]) -> String {
    candidates
        .iter()
        .map(|c| serde_json::to_string(c).expect("candidate serializes") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triples(cs: &[CongruenceCandidate]) -> Vec<(u32, u32, u32)> {
        cs.iter().map(|c| (c.a, c.l, c.r)).collect()
    }

    #[test]
    fn ramanujan_congruences() {
        let got = scan(1..=1, 2..=11, 500, &ScanOptions::default()).unwrap();
        assert_eq!(triples(&got), vec![(1, 5, 4), (1, 7, 5), (1, 11, 6)]);
        assert!(got.iter().all(|c| c.status == Status::Empirical));
    }

    #[test]
    fn a_equals_three() {
        let got = scan(3..=3, 2..=17, 500, &ScanOptions::default()).unwrap();
        assert_eq!(triples(&got), vec![(3, 11, 7), (3, 17, 15)]);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let one = ScanOptions {
            workers: Some(1),
            ..Default::default()
        };
        let four = ScanOptions {
            workers: Some(4),
            ..Default::default()
        };
        assert_eq!(
            scan(1..=7, 2..=29, 400, &one).unwrap(),
            scan(1..=7, 2..=29, 400, &four).unwrap()
        );
    }

    #[test]
    fn plain_lower_bound_rule() {
        let opts = ScanOptions {
            rule: PrimeRule::AtLeast(5),
            ..Default::default()
        };
        let got = triples(&scan(4..=4, 2..=7, 200, &opts).unwrap());
        // ℓ = 5 < 2·4 + 1 is only reached under the plain bound
        assert!(got.iter().any(|&(_, l, _)| l == 5));
        let default = triples(&scan(4..=4, 2..=7, 200, &ScanOptions::default()).unwrap());
        assert!(default.iter().all(|&(_, l, _)| l >= 9));
    }

    #[test]
    fn long_run_gate_and_order_guard() {
        assert!(scan(1..=99, 2..=11, 1000, &ScanOptions::default()).is_err());
        assert!(scan(1..=1, 2..=47, 100, &ScanOptions::default()).is_err());
    }

    #[test]
    fn check_candidate_statuses() {
        let c = check_candidate(1, 5, 4, 500).unwrap();
        assert_eq!(c.status, Status::Empirical);
        assert_eq!(c.tested_up_to, 99);
        let d = check_candidate(1, 5, 3, 500).unwrap();
        assert_eq!(d.status, Status::Disproved);
        // p(3) = 3
        assert_eq!(d.witness, Some(0));
    }

    #[test]
    fn outputs_segregate_and_serialize() {
        let mut cs = scan(1..=1, 2..=11, 500, &ScanOptions::default()).unwrap();
        cs[0].status = Status::ProvedRamanujan;
        let table = render_table(&cs, 500);
        let proved = table.find("## proved").unwrap();
        let empirical = table.find("## empirical").unwrap();
        assert!(proved < empirical);
        let jsonl = render_jsonl(&cs);
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            r#"{"a":1,"l":5,"r":4,"status":"proved-ramanujan","tested_up_to":99}"#
        );
    }
}
