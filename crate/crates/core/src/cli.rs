//! Command-line front end.
//!
//! Exit codes: 0 success or verified, 1 method failure (no proof, a failed
//! check, an unverified lemma instance), 2 usage or internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gradedpoly::{Assignment, PolyRing};
use crate::modfield::odd_primes_in;
use crate::prover::{
    cheap_family, check_elementary_lemma, proposition_instance, prove, render_proof,
    verify_certificate, ProofCertificate, ProofOutcome, PropositionInstance, ProveOptions, Route,
    DEFAULT_ORDER,
};
use crate::search::{
    attempt_proofs, render_jsonl, render_table, scan, PrimeRule, ScanOptions, DESK_A_MAX,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// Line-delimited JSON records.
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Linear,
    Groebner,
    Auto,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Linear => Route::Linear,
            RouteArg::Groebner => Route::Groebner,
            RouteArg::Auto => Route::Auto,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// ℓ ≥ 2a + 1
    TwiceAPlusOne,
    /// ℓ ≥ --l-min only
    Plain,
}

#[derive(Debug, Parser)]
#[command(
    name = "partcong",
    version,
    about = "Find and prove congruences p_-a(ln + r) = 0 mod l"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the main output here instead of stdout (for `prove`: the
    /// certificate or failure report).
    #[arg(short = 'o', long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prove p_-a(ln + r) = 0 (mod l) and emit a certificate.
    Prove(ProveArgs),
    /// Re-check a certificate from scratch.
    Verify(VerifyArgs),
    /// Scan (a, l) for congruences.
    Search(SearchArgs),
    /// Check the triangular-sum lemma for primes up to --l-max.
    Lemma(LemmaArgs),
    /// Ramanujan-style certificates for a = l - 3.
    CheapFamily(FamilyArgs),
    /// The (a, r) = (l - 6, (l - 6)/24) instance for l = 7, 11 mod 12.
    Proposition(PropositionArgs),
}

#[derive(Debug, Args)]
pub struct ProveArgs {
    #[arg(short = 'a')]
    pub a: u32,
    #[arg(short = 'l')]
    pub l: u32,
    #[arg(short = 'r')]
    pub r: u32,
    /// Series order N for the numerical checks.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub depth: usize,
    /// Largest power k of POL to try.
    #[arg(long, default_value_t = 3)]
    pub max_power: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    #[arg(long, default_value_t = 6_000)]
    pub max_unknowns: u128,
    #[arg(long, default_value_t = 500)]
    pub random_trials: u64,
    /// Screening point: values of J_i in increasing i, comma separated.
    #[arg(long = "point")]
    pub points: Vec<String>,
    /// Skip the built-in screening points.
    #[arg(long)]
    pub no_known_points: bool,
    /// Print the human-readable proof (text format, no -o).
    #[arg(long)]
    pub proof: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub certificate: PathBuf,
    /// Series order; defaults to the one recorded in the certificate.
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    pub a_min: u32,
    #[arg(long)]
    pub a_max: u32,
    #[arg(long, default_value_t = 5)]
    pub l_min: u32,
    #[arg(long)]
    pub l_max: u32,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::TwiceAPlusOne)]
    pub rule: RuleArg,
    #[arg(long)]
    pub odd_only: bool,
    /// Worker threads (default: PARTCONG_WORKERS or all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Allow a beyond the desk-scale limit; reports progress on stderr.
    #[arg(long)]
    pub long_run: bool,
    /// Run the prover on every candidate.
    #[arg(long)]
    pub prove: bool,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 2000)]
    pub l_max: u32,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(short = 'l')]
    pub l: u32,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct PropositionArgs {
    #[arg(short = 'l')]
    pub l: u32,
}

struct Output {
    text: String,
    code: i32,
}

fn record(v: serde_json::Value) -> String {
    v.to_string() + "\n"
}

fn parse_point(ring: &PolyRing, text: &str) -> Result<Assignment> {
    let values: Vec<u32> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("bad point coordinate {s:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != ring.nvars() {
        return Err(Error::InvalidArgument(format!(
            "a point needs {} coordinates (J_i for i in {:?}), got {}",
            ring.nvars(),
            ring.vars(),
            values.len()
        )));
    }
    Ok(ring
        .vars()
        .iter()
        .zip(values)
        .map(|(&v, x)| (v, x % ring.modulus()))
        .collect())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn cmd_prove(cli: &Cli, args: &ProveArgs) -> Result<Output> {
    let ring = PolyRing::for_modulus(args.l)?;
    let points = args
        .points
        .iter()
        .map(|p| parse_point(&ring, p))
        .collect::<Result<Vec<_>>>()?;
    let options = ProveOptions {
        route: args.route.into(),
        max_power: args.max_power,
        max_unknowns: args.max_unknowns,
        random_trials: args.random_trials,
        seed: cli.seed,
        points,
        use_known_points: !args.no_known_points,
        truncation_order: args.depth,
        ..Default::default()
    };
    let outcome = prove(args.a, args.l, args.r, &options)?;
    let (document, code) = match &outcome {
        ProofOutcome::Proved(c) => (c.to_json(), EXIT_OK),
        ProofOutcome::Failed(f) => (f.to_json(), EXIT_FAILURE),
    };
    let summary_record = match &outcome {
        ProofOutcome::Proved(c) => json!({
            "result": "proved",
            "a": c.a, "l": c.l, "r": c.r,
            "style": c.style,
            "power": c.power,
            "truncation_order": c.truncation_order,
            "seed": cli.seed,
        }),
        ProofOutcome::Failed(f) => json!({
            "result": "failed",
            "a": f.a, "l": f.l, "r": f.r,
            "verdict": f.verdict,
            "seed": cli.seed,
        }),
    };
    let summary_text = match &outcome {
        ProofOutcome::Proved(c) => {
            let style = match c.power {
                Some(k) => format!("hirschhorn, k = {k}, {} cofactors", c.cofactors.len()),
                None => "ramanujan".into(),
            };
            format!(
                "proved p_-{}({}n + {}) ≡ 0 (mod {}): {style}\nseed: {}\n",
                c.a, c.l, c.r, c.l, cli.seed
            )
        }
        ProofOutcome::Failed(f) => {
            let mut s = f.summary() + "\n";
            for att in &f.attempts {
                s += &format!(
                    "  k = {}: {}\n",
                    att.power,
                    serde_json::to_string(&att.outcome).expect("serializes")
                );
            }
            for n in &f.notes {
                s += &format!("  note: {n}\n");
            }
            s += &format!("seed: {}\n", cli.seed);
            s
        }
    };
    let text = match (&cli.output, cli.format) {
        (Some(path), fmt) => {
            write_file(path, &document)?;
            match fmt {
                Format::Text => format!("{summary_text}written to {}\n", path.display()),
                Format::Json => record(summary_record),
            }
        }
        (None, Format::Json) => {
            let doc: serde_json::Value = serde_json::from_str(&document).expect("valid json");
            record(summary_record) + &record(doc)
        }
        (None, Format::Text) => match (&outcome, args.proof) {
            (ProofOutcome::Proved(c), true) => summary_text + "\n" + &render_proof(c)?,
            _ => summary_text + "\n" + &document + "\n",
        },
    };
    Ok(Output { text, code })
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<Output> {
    let text = fs::read_to_string(&args.certificate).map_err(|e| {
        Error::InvalidArgument(format!("cannot read {}: {e}", args.certificate.display()))
    })?;
    let cert = ProofCertificate::from_json(&text)?;
    let order = args.depth.unwrap_or(cert.truncation_order);
    let report = verify_certificate(&cert, order)?;
    let code = if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    let text = match cli.format {
        Format::Text => report.render(),
        Format::Json => record(json!({
            "verified": report.all_passed(),
            "report": report,
        })),
    };
    Ok(Output { text, code })
}

fn cmd_search(cli: &Cli, args: &SearchArgs) -> Result<Output> {
    if args.a_min > args.a_max || args.l_min > args.l_max {
        return Err(Error::InvalidArgument("empty search range".into()));
    }
    let progress: Option<fn(usize, usize)> = if args.long_run {
        Some(|done, total| eprintln!("[{done}/{total}] cells scanned"))
    } else {
        None
    };
    let options = ScanOptions {
        rule: match args.rule {
            RuleArg::TwiceAPlusOne => PrimeRule::TwiceAPlusOne,
            RuleArg::Plain => PrimeRule::AtLeast(args.l_min),
        },
        odd_a_only: args.odd_only,
        workers: args.workers,
        long_run: args.long_run,
        progress,
    };
    if args.a_max > DESK_A_MAX && !args.long_run {
        return Err(Error::InvalidArgument(format!(
            "--a-max above {DESK_A_MAX} needs --long-run"
        )));
    }
    let mut candidates = scan(
        args.a_min..=args.a_max,
        args.l_min..=args.l_max,
        args.depth,
        &options,
    )?;
    if args.prove {
        let prove_options = ProveOptions {
            seed: cli.seed,
            truncation_order: args.depth,
            ..Default::default()
        };
        candidates = attempt_proofs(&candidates, &prove_options)?
            .into_iter()
            .map(|c| c.candidate)
            .collect();
    }
    let text = match cli.format {
        Format::Text => format!(
            "{}# {} candidates, seed {}\n",
            render_table(&candidates, args.depth),
            candidates.len(),
            cli.seed
        ),
        Format::Json => render_jsonl(&candidates),
    };
    Ok(Output {
        text,
        code: EXIT_OK,
    })
}

fn cmd_lemma(cli: &Cli, args: &LemmaArgs) -> Result<Output> {
    let mut text = String::new();
    let mut all = true;
    let mut count = 0;
    for l in odd_primes_in(5, args.l_max as u64) {
        let rep = check_elementary_lemma(l)?;
        if !rep.applicable {
            continue;
        }
        count += 1;
        all &= rep.verified;
        match cli.format {
            Format::Text => {
                text += &format!(
                    "l = {:>4}  r = {:>4}  pairs = {}  {}\n",
                    l,
                    rep.r.expect("applicable"),
                    rep.pairs,
                    if rep.verified { "verified" } else { "FAILED" }
                )
            }
            Format::Json => text += &record(serde_json::to_value(&rep).expect("serializes")),
        }
    }
    if cli.format == Format::Text {
        text += &format!(
            "{count} applicable primes up to {}: {}\n",
            args.l_max,
            if all { "all verified" } else { "some FAILED" }
        );
    }
    Ok(Output {
        text,
        code: if all { EXIT_OK } else { EXIT_FAILURE },
    })
}

fn cmd_cheap_family(cli: &Cli, args: &FamilyArgs) -> Result<Output> {
    let members = cheap_family(args.l, args.depth)?;
    let text = match cli.format {
        Format::Text => {
            let mut s = format!(
                "a = {}: 1/E(q)^{} ≡ E(q)^3/E(q^{}) (mod {})\n",
                args.l - 3,
                args.l - 3,
                args.l,
                args.l
            );
            for m in &members {
                s += &format!(
                    "p_-{}({}n + {}) ≡ 0 (mod {})  ramanujan, verified to N = {}\n",
                    m.a, args.l, m.r, args.l, args.depth
                );
            }
            s
        }
        Format::Json => members
            .iter()
            .map(|m| record(serde_json::to_value(&m.certificate).expect("serializes")))
            .collect(),
    };
    Ok(Output {
        text,
        code: EXIT_OK,
    })
}

fn cmd_proposition(cli: &Cli, args: &PropositionArgs) -> Result<Output> {
    let inst = proposition_instance(args.l)?;
    let text = match cli.format {
        Format::Json => record(serde_json::to_value(&inst).expect("serializes")),
        Format::Text => match inst {
            PropositionInstance::Applicable {
                l,
                a,
                r,
                outside_sumset,
            } => format!(
                "p_-{a}({l}n + {r}) ≡ 0 (mod {l}); r ∉ Jset + Jset: {}\n",
                if outside_sumset { "yes" } else { "NO" }
            ),
            PropositionInstance::NotApplicable { l } => {
                format!("not applicable: {l} ≢ 7, 11 (mod 12)\n")
            }
        },
    };
    let code = match inst {
        PropositionInstance::Applicable {
            outside_sumset: false,
            ..
        } => EXIT_FAILURE,
        _ => EXIT_OK,
    };
    Ok(Output { text, code })
}

fn dispatch(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Prove(a) => cmd_prove(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Search(a) => cmd_search(cli, a),
        Command::Lemma(a) => cmd_lemma(cli, a),
        Command::CheapFamily(a) => cmd_cheap_family(cli, a),
        Command::Proposition(a) => cmd_proposition(cli, a),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let written = match (&cli.output, &cli.command) {
                (Some(path), c) if !matches!(c, Command::Prove(_)) => write_file(path, &o.text),
                _ => out
                    .write_all(o.text.as_bytes())
                    .map_err(|e| Error::InvalidArgument(e.to_string())),
            };
            match written {
                Ok(()) => o.code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("partcong").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&[]).0, EXIT_ERROR);
        assert_eq!(call(&["prove", "-a", "1"]).0, EXIT_ERROR);
        assert_eq!(
            call(&["prove", "-a", "x", "-l", "5", "-r", "4"]).0,
            EXIT_ERROR
        );
        let (code, _, err) = call(&["prove", "-a", "1", "-l", "9", "-r", "4"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("not an odd prime"));
        assert_eq!(
            call(&["prove", "-a", "1", "-l", "5", "-r", "5"]).0,
            EXIT_ERROR
        );
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn prove_and_verify_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let p = path.to_str().unwrap();
        let (code, out, _) = call(&[
            "prove", "-a", "1", "-l", "11", "-r", "6", "--depth", "300", "-o", p,
        ]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("hirschhorn, k = 1, 5 cofactors"));
        assert!(out.contains("seed: 0"));
        let (code, out, _) = call(&["verify", p]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.trim_end().ends_with("verified"));
    }

    #[test]
    fn failure_exits_1() {
        let (code, out, _) = call(&[
            "--format", "json", "prove", "-a", "3", "-l", "17", "-r", "15", "--depth", "200",
        ]);
        assert_eq!(code, EXIT_FAILURE);
        let first: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        assert_eq!(first["result"], "failed");
        assert_eq!(first["verdict"], "refuted");
    }

    #[test]
    fn output_is_deterministic() {
        let args = [
            "--seed", "7", "prove", "-a", "1", "-l", "11", "-r", "5", "--depth", "200",
        ];
        assert_eq!(call(&args), call(&args));
        let (code, out, _) = call(&args);
        assert_eq!(code, EXIT_FAILURE);
        assert!(out.contains("seed: 7"));
    }

    #[test]
    fn point_parsing() {
        let ring = PolyRing::for_modulus(17).unwrap();
        let p = parse_point(&ring, "1,1,2,10,9,11,15,12").unwrap();
        assert_eq!(p[&15], 12);
        assert!(parse_point(&ring, "1,2").is_err());
        assert!(parse_point(&ring, "1,x,2,10,9,11,15,12").is_err());
    }

    #[test]
    fn small_commands() {
        let (code, out, _) = call(&["lemma", "--l-max", "100"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("all verified"));
        let (code, out, _) = call(&["proposition", "-l", "11"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("p_-5(11n + 8)"));
        let (code, out, _) = call(&["cheap-family", "-l", "7", "--depth", "100"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 1 + 4);
        let (code, out, _) = call(&[
            "--format", "json", "search", "--a-max", "1", "--l-max", "11", "--depth", "200",
        ]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 3);
    }
}
