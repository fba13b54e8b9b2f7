//! `fibnim`: analyze positions, dump words and partial sums, compute the
//! complementary-value table, run verification suites and start the play
//! service.
//!
//! Exit codes: 0 success, 1 a check failed or a classifier disagreed with the
//! oracle, 2 bad usage, 3 the solver's state budget ran out.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fibnim_core::classify::{applicable_verdicts, classify_classic, ClassicWinner, ClassifierVerdict, ClassifyError};
use fibnim_core::record::OutcomeRecord;
use fibnim_core::solver::{CompValue, SolveError, BUDGET_ENV};
use fibnim_core::verify::{self, Report, VerifyError};
use fibnim_core::word::{HybridRules, LetterStream, SigmaPairing, SpecialParity, WordError, WordSpec};
use fibnim_core::{Dynamic, ExtNat, Move, Outcome, Position, Solver};
use serde::Serialize;

// Stdout writes ignore errors so a closed pipe (`| head`) ends quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "fibnim", version, about = "Fibonacci nim and power-of-two nim analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a position and compare every applicable classifier with the oracle.
    Analyze(AnalyzeArgs),
    /// Complementary values b with (i, j, b; inf) in P, as a CSV matrix.
    CompTable {
        #[arg(long, default_value_t = 15)]
        max_n: u64,
        /// Largest b searched before a cell is reported as ?>cap.
        #[arg(long, default_value_t = 1000)]
        cap: u64,
    },
    /// List pairs i <= j <= max-n with no complementary value up to the cap.
    MissingComp {
        #[arg(long, default_value_t = 20)]
        max_n: u64,
        #[arg(long, default_value_t = 500)]
        cap: u64,
    },
    /// Print letters (as values) or partial sums of a Fibonacci or hybrid word.
    Word(WordArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Start the HTTP play service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Comma-separated pile sizes, in any order.
    #[arg(long, value_delimiter = ',', required = true)]
    piles: Vec<u64>,
    /// Move bound: a number or `inf`.
    #[arg(long, default_value = "inf")]
    bound: ExtNat,
    /// `2` or `fibonacci`, `1` or `pow2`.
    #[arg(long = "dyn", default_value = "2", value_parser = parse_dynamic)]
    dynamic: Dynamic,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_dynamic(s: &str) -> Result<Dynamic, String> {
    match s.to_ascii_lowercase().as_str() {
        "2" | "fib" | "fibonacci" => Ok(Dynamic::Fibonacci),
        "1" | "pow2" | "power-of-two" | "power_of_two" => Ok(Dynamic::PowerOfTwo),
        _ => Err(format!("unknown dynamic {s:?}; use 2 (fibonacci) or 1 (pow2)")),
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
#[command(group = clap::ArgGroup::new("extent").required(true))]
struct WordArgs {
    /// w_a over the letters (F_{a+1}, F_a).
    #[arg(long, group = "source")]
    sturm: Option<u32>,
    /// The word classifying (m, m + k; r), given as `m,r`.
    #[arg(long, group = "source", value_delimiter = ',', value_name = "M,R")]
    hybrid: Option<Vec<u64>>,
    /// Number of letters.
    #[arg(long, group = "extent")]
    length: Option<usize>,
    /// Emit letters or partial sums up to this total.
    #[arg(long, group = "extent")]
    bound: Option<u64>,
    /// Print partial sums (starting at 0) instead of letters.
    #[arg(long)]
    ps: bool,
    #[command(flatten)]
    rules: RuleArgs,
}

#[derive(Args, Clone, Copy)]
struct RuleArgs {
    /// Which parity selects the special-level rule for hybrid words.
    #[arg(long, value_enum, default_value_t = ParityArg::Alpha)]
    parity: ParityArg,
    /// Which Fibonacci-word level serves alpha > 0.
    #[arg(long, value_enum, default_value_t = PairingArg::Upper)]
    pairing: PairingArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Alpha,
    PPlusAlpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Upper,
    Lower,
}

impl RuleArgs {
    fn rules(self) -> HybridRules {
        HybridRules {
            parity: match self.parity {
                ParityArg::Alpha => SpecialParity::Alpha,
                ParityArg::PPlusAlpha => SpecialParity::PPlusAlpha,
            },
            pairing: match self.pairing {
                PairingArg::Upper => SigmaPairing::UpperPair,
                PairingArg::Lower => SigmaPairing::LowerPair,
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Table1,
    OnePile,
    TwoPile,
    ThreeFour,
    Beatty,
    Remarks,
    Pow2,
    Words,
    Lemma4,
    Identities,
    Families,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Largest smaller pile (two-pile).
    #[arg(long, default_value_t = 60)]
    m: u64,
    /// Largest pile difference (two-pile).
    #[arg(long, default_value_t = 120)]
    k: u64,
    /// Largest move bound (two-pile, pow2).
    #[arg(long)]
    r: Option<u64>,
    /// Largest pile or third pile (one-pile, three-four, pow2, families).
    #[arg(long)]
    n: Option<u64>,
    /// Range for word and identity suites.
    #[arg(long, default_value_t = 10_000)]
    bound: u64,
    /// Search cap for the table.
    #[arg(long, default_value_t = 1000)]
    cap: u64,
    /// Include the slowest remark positions.
    #[arg(long)]
    long: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    rules: RuleArgs,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory holding the built web UI.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Sessions are saved here on shutdown and restored on start.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Idle sessions are dropped after this many seconds.
    #[arg(long, default_value_t = 6 * 3600)]
    ttl_secs: u64,
}

enum Failure {
    Usage(String),
    Check(String),
    Budget(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Usage(m) => (2, m),
            Failure::Check(m) => (1, m),
            Failure::Budget(m) => (3, m),
        };
        eprintln!("fibnim: {msg}");
        ExitCode::from(code)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => Failure::Budget(format!("{e}; raise {BUDGET_ENV} to search further")),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<WordError> for Failure {
    fn from(e: WordError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solve(s) => s.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::CompTable { max_n, cap } => comp_table(max_n, cap),
        Command::MissingComp { max_n, cap } => missing_comp(max_n, cap),
        Command::Word(args) => word(args),
        Command::Verify(args) => run_verify(args),
        Command::Serve(args) => serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

#[derive(Serialize)]
struct VerdictOut {
    #[serde(flatten)]
    verdict: ClassifierVerdict,
    agrees: bool,
}

#[derive(Serialize)]
struct AnalyzeOut {
    line: String,
    record: OutcomeRecord,
    classifiers: Vec<VerdictOut>,
}

fn move_text(pos: &Position, mv: Move) -> String {
    format!("{}:{}", pos.piles()[mv.pile], mv.take)
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let pos = Position::new(args.piles, args.bound, args.dynamic);
    let mut solver = Solver::from_env();
    let record = solver.analyze(&pos)?;

    let mut verdicts = applicable_verdicts(&pos)?;
    if let ([n], Dynamic::Fibonacci) = (pos.piles(), pos.dynamic()) {
        if *n > 0 && pos.bound() == ExtNat::Finite(n - 1) {
            let outcome = match classify_classic(*n)? {
                ClassicWinner::FirstPlayer => Outcome::N,
                ClassicWinner::SecondPlayer => Outcome::P,
            };
            verdicts.push(ClassifierVerdict {
                classifier: "classic".into(),
                outcome,
                suggested: None,
            });
        }
    }
    let verdicts: Vec<VerdictOut> = verdicts
        .into_iter()
        .map(|v| {
            let move_ok = v.suggested.is_none_or(|m| record.winning_moves.contains(&m));
            VerdictOut {
                agrees: v.outcome == record.outcome && move_ok,
                verdict: v,
            }
        })
        .collect();

    match args.format {
        Format::Text => {
            out!("{record}");
            out!("outcome: {} (position {pos})", record.outcome);
            for v in &verdicts {
                let suggestion = v.verdict.suggested.map(|m| format!(", move {}", move_text(&pos, m)));
                out!(
                    "classifier {}: {}{} [{}]",
                    v.verdict.classifier,
                    v.verdict.outcome,
                    suggestion.unwrap_or_default(),
                    if v.agrees { "agrees" } else { "DISAGREES" }
                );
            }
        }
        Format::Json => {
            let out = AnalyzeOut {
                line: record.to_string(),
                record: record.clone(),
                classifiers: verdicts.iter().map(|v| VerdictOut { verdict: v.verdict.clone(), agrees: v.agrees }).collect(),
            };
            out!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Csv => {
            out!("piles,bound,dyn,outcome,moves");
            let piles: Vec<String> = pos.piles().iter().map(u64::to_string).collect();
            let moves: Vec<String> = record.winning_moves.iter().map(|&m| move_text(&pos, m)).collect();
            out!(
                "\"{}\",{},{},{},\"{}\"",
                piles.join(","),
                pos.bound(),
                pos.dynamic().multiplier(),
                record.outcome,
                moves.join(";")
            );
        }
    }
    let bad: Vec<&VerdictOut> = verdicts.iter().filter(|v| !v.agrees).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = bad
            .iter()
            .map(|v| format!("{} says {}", v.verdict.classifier, v.verdict.outcome))
            .collect();
        Err(Failure::Check(format!("oracle says {}, but {}", record.outcome, names.join("; "))))
    }
}

fn comp_table(max_n: u64, cap: u64) -> Result<(), Failure> {
    let mut solver = Solver::from_env();
    let table = solver.comp_table(max_n, cap)?;
    out!("{}", table.to_csv().trim_end());
    Ok(())
}

fn missing_comp(max_n: u64, cap: u64) -> Result<(), Failure> {
    let mut solver = Solver::from_env();
    let cap = cap.max(max_n);
    let mut found = 0;
    for i in 0..=max_n {
        for j in i..=max_n {
            if let CompValue::NoneUpTo(c) = solver.complementary_value(&[i, j], cap)? {
                out!("({i},{j}): none up to {c}");
                found += 1;
            }
        }
    }
    out!("{found} pair(s) without a complementary value up to {cap}");
    Ok(())
}

fn word(args: WordArgs) -> Result<(), Failure> {
    let rules = args.rules.rules();
    let spec = match (args.sturm, args.hybrid.as_deref()) {
        (Some(a), _) => WordSpec::sturm(a)?,
        (None, Some(&[m, r])) => WordSpec::for_position(m, r, rules)?,
        _ => return Err(Failure::Usage("give --sturm a or --hybrid m,r".into())),
    };
    let mut stream = LetterStream::with_rules(spec, rules);
    let values: Vec<u64> = match (args.length, args.bound) {
        (Some(len), _) => {
            let letters = stream.values(len);
            if args.ps {
                std::iter::once(0)
                    .chain(letters.iter().scan(0u64, |acc, &v| {
                        *acc += v;
                        Some(*acc)
                    }))
                    .collect()
            } else {
                letters
            }
        }
        (None, Some(bound)) => {
            if args.ps {
                stream.partial_sums(bound).members().to_vec()
            } else {
                let mut out = Vec::new();
                let mut total = 0;
                let mut len = 64;
                loop {
                    let letters = stream.values(len);
                    for &v in &letters[out.len()..] {
                        if total + v > bound {
                            break;
                        }
                        total += v;
                        out.push(v);
                    }
                    if out.len() < letters.len() {
                        break out;
                    }
                    len *= 2;
                }
            }
        }
        (None, None) => return Err(Failure::Usage("give --length or --bound".into())),
    };
    // Partial sums are a comma-separated set, letters a space-separated word.
    let text: Vec<String> = values.iter().map(u64::to_string).collect();
    out!("{}", text.join(if args.ps { "," } else { " " }));
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let mut solver = Solver::from_env();
    let rules = args.rules.rules();
    let suites: Vec<Suite> = if args.suite == Suite::All {
        vec![
            Suite::Table1,
            Suite::OnePile,
            Suite::TwoPile,
            Suite::ThreeFour,
            Suite::Beatty,
            Suite::Remarks,
            Suite::Pow2,
            Suite::Words,
            Suite::Identities,
            Suite::Families,
        ]
    } else {
        vec![args.suite]
    };
    let mut reports: Vec<Report> = Vec::new();
    for suite in suites {
        let report = match suite {
            Suite::Table1 => verify::table1(&mut solver, args.cap)?,
            Suite::OnePile => verify::one_pile(&mut solver, args.n.unwrap_or(500))?,
            Suite::TwoPile => verify::two_pile(&mut solver, args.m, args.k, args.r.unwrap_or(60), rules)?,
            Suite::ThreeFour => verify::three_four(&mut solver, args.n.unwrap_or(300))?,
            Suite::Beatty => verify::beatty(args.n.unwrap_or(1000)),
            Suite::Remarks => verify::remarks(&mut solver, args.long)?,
            Suite::Pow2 => verify::pow2(&mut solver, 3, args.n.unwrap_or(40), args.r.unwrap_or(40))?,
            Suite::Words => verify::words(args.bound)?,
            Suite::Lemma4 => {
                let mut report = Report::new("lemma4");
                for a in 1..=12 {
                    report.merge(verify::lemma4(a, args.bound)?);
                }
                report
            }
            Suite::Identities => verify::identities(args.bound),
            Suite::Families => verify::families(&mut solver, args.n.unwrap_or(200))?,
            Suite::All => unreachable!("expanded above"),
        };
        if let Format::Text = args.format {
            out!("{report}");
        }
        reports.push(report);
    }
    match args.format {
        Format::Json => out!("{}", serde_json::to_string_pretty(&reports).expect("serializable")),
        Format::Csv => {
            out!("suite,checked,failed");
            for r in &reports {
                out!("\"{}\",{},{}", r.suite, r.checked, r.failed);
            }
        }
        Format::Text => {}
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", failed.join(", "))))
    }
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    use fibnim_service::{AppState, ServiceConfig};
    let config = ServiceConfig {
        static_dir: args.static_dir,
        snapshot: args.snapshot,
        ttl: Duration::from_secs(args.ttl_secs),
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::Usage(format!("cannot listen on {addr}: {e}")))?;
        eprintln!("fibnim: serving on http://{addr}");
        fibnim_service::serve(listener, AppState::new(config))
            .await
            .map_err(|e| Failure::Check(format!("service stopped: {e}")))
    })
}
