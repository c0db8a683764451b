//! Command-line surface for the induction and entropy engine: Rauzy-class
//! enumeration, orbit traces, entropy solvers, and the uniform-expansion
//! verifier, with reproducible file-oriented output.

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use zorich_core::entropy::{bernoulli_flow_entropy, estimate_htop_flow, maximize_entropy_finite};
use zorich_core::error::Error;
use zorich_core::iet::IetPoint;
use zorich_core::montecarlo::{margulis_check, mb_returns_for, MargulisReport, MonteCarloConfig};
use zorich_core::perm::{Permutation, RauzyClass};
use zorich_core::words::{format_word, parse_word, AlphabetGraph, SymbolLetter, Word};
use zorich_core::Scalar;

#[derive(Parser)]
#[command(name = "zorich", version, about = "Rauzy-Veech-Zorich induction and entropy tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Auto,
    Float,
    Rational,
}

#[derive(Args)]
struct OutputArgs {
    /// output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// output path; stdout when omitted
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Rauzy class of a permutation and export its diagram
    Rauzy {
        /// permutation image list, e.g. 3,2,1
        #[arg(long)]
        perm: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Trace an orbit of the accelerated induction: letters, roofs, lengths
    Orbit {
        /// lengths: fractions "7/10,3/10", decimals "0.7,0.3", or "golden"
        #[arg(long)]
        lambda: String,
        /// permutation image list
        #[arg(long, default_value = "2,1")]
        perm: String,
        /// number of accelerated steps to trace
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// induction-step cap per accelerated step
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        #[arg(long, value_enum, default_value = "auto")]
        backend: Backend,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Entropy solvers
    Entropy {
        #[command(subcommand)]
        kind: EntropyKind,
    },
    /// Verify the uniform-expansion identity on cylinder measures
    Margulis {
        /// permutation fixing the Rauzy class
        #[arg(long, default_value = "2,1")]
        perm: String,
        /// base word in the letter grammar, e.g. "a:1.b:1"
        #[arg(long, default_value = "a:1.b:1")]
        q: String,
        /// simple positive prefix p' (defaults to q)
        #[arg(long)]
        p_prime: Option<String>,
        /// base cylinder word p (defaults to p')
        #[arg(long)]
        p: Option<String>,
        /// weight bound for enumerating return words (0 = automatic)
        #[arg(long, default_value_t = 0)]
        bound: u32,
        /// number of return words
        #[arg(long, default_value_t = 12)]
        returns: usize,
        #[arg(long, default_value_t = 10_000_000)]
        iterations: u64,
        #[arg(long, default_value_t = 177)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Subcommand)]
enum EntropyKind {
    /// Maximal entropy over finitely many roof values: solves F_n(beta) = 1
    Finite {
        /// comma-separated roof values; "log2" means ln 2
        #[arg(long)]
        roofs: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Countable Bernoulli flow entropy from a monotone roof enumeration
    Bernoulli {
        /// explicit roofs (comma-separated); or use --zeta
        #[arg(long)]
        roofs: Option<String>,
        /// roof family c_i = s log i
        #[arg(long)]
        zeta: Option<f64>,
        /// enumeration budget
        #[arg(long, default_value_t = 40_000)]
        budget: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Truncated estimate of the flow's topological entropy over A_q
    Flow {
        #[arg(long, default_value = "2,1")]
        perm: String,
        /// base word, e.g. "a:1.b:1"
        #[arg(long, default_value = "a:1.b:1")]
        q: String,
        /// total induction-weight bound for return letters
        #[arg(long, default_value_t = 16)]
        bound: u32,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Serialize)]
struct RauzyOut {
    schema: &'static str,
    perm: Permutation,
    size: usize,
    members: Vec<String>,
    edges: Vec<(usize, String, usize)>,
}

#[derive(Serialize)]
struct OrbitRow {
    step: usize,
    c: char,
    n: u32,
    /// roof increment at the step's starting point
    tau0: f64,
    /// roof of the full accelerated step
    tau1: f64,
    lambda: Vec<f64>,
}

#[derive(Serialize)]
struct OrbitOut {
    schema: &'static str,
    perm: Permutation,
    backend: String,
    word: Vec<SymbolLetter>,
    word_text: String,
    rows: Vec<OrbitRow>,
    total_roof: f64,
    truncated: Option<String>,
}

#[derive(Serialize)]
struct FiniteEntropyOut {
    schema: &'static str,
    roofs: Vec<f64>,
    beta: f64,
    weights: Vec<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct TaggedOut<T: Serialize> {
    schema: &'static str,
    #[serde(flatten)]
    report: T,
}

#[derive(Serialize)]
struct MargulisOut {
    schema: &'static str,
    #[serde(flatten)]
    report: MargulisReport,
}

fn parse_roofs(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if let Some(rest) = t.strip_prefix("log") {
                rest.parse::<f64>()
                    .map(f64::ln)
                    .map_err(|_| Error::InvalidInput(format!("bad roof token {t:?}")))
            } else {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad roof token {t:?}")))
            }
        })
        .collect()
}

fn parse_lambda_rational(s: &str) -> Result<Vec<BigRational>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let (num, den) = match t.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (t, "1"),
            };
            let n = BigInt::from_str(num)
                .map_err(|_| Error::InvalidInput(format!("bad length {t:?}")))?;
            let d = BigInt::from_str(den)
                .map_err(|_| Error::InvalidInput(format!("bad length {t:?}")))?;
            if d == BigInt::from(0) {
                return Err(Error::InvalidInput("zero denominator".into()));
            }
            Ok(BigRational::new(n, d))
        })
        .collect()
}

fn parse_lambda_float(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if let Some((n, d)) = t.split_once('/') {
                let n: f64 = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad length {t:?}")))?;
                let d: f64 = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad length {t:?}")))?;
                Ok(n / d)
            } else {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad length {t:?}")))
            }
        })
        .collect()
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization")
}

/// Runs the orbit trace, returning rows plus a diagnostic when the orbit
/// dies early on a boundary tie.
fn trace_orbit<S: Scalar>(
    point: &IetPoint<S>,
    depth: usize,
    cap: u64,
) -> (Vec<OrbitRow>, Vec<SymbolLetter>, Option<String>) {
    let mut rows = Vec::new();
    let mut letters = Vec::new();
    let mut cur = point.clone();
    let mut truncated = None;
    for step in 0..depth {
        let tau0 = cur.roof_tau0();
        match cur.step_g(cap) {
            Ok(g) => {
                rows.push(OrbitRow {
                    step,
                    c: g.letter.c.as_char(),
                    n: g.letter.n,
                    tau0,
                    tau1: g.tau1,
                    lambda: g.point.lambda().iter().map(|x| x.to_f64()).collect(),
                });
                letters.push(g.letter);
                cur = g.point;
            }
            Err(e) => {
                truncated = Some(e.to_string());
                break;
            }
        }
    }
    (rows, letters, truncated)
}

fn orbit_csv(out: &OrbitOut) -> String {
    let m = out.perm.symbols();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "step".to_string(),
        "c".into(),
        "n".into(),
        "tau0".into(),
        "tau1".into(),
    ];
    for i in 1..=m {
        header.push(format!("lambda_{i}"));
    }
    wtr.write_record(&header).expect("csv header");
    for row in &out.rows {
        let mut rec = vec![
            row.step.to_string(),
            row.c.to_string(),
            row.n.to_string(),
            format!("{:.17e}", row.tau0),
            format!("{:.17e}", row.tau1),
        ];
        for x in &row.lambda {
            rec.push(format!("{x:.17e}"));
        }
        wtr.write_record(&rec).expect("csv row");
    }
    String::from_utf8(wtr.into_inner().expect("csv flush")).expect("utf8")
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Rauzy { perm, output } => {
            let p: Permutation = perm.parse()?;
            let class = RauzyClass::enumerate(&p)?;
            eprintln!("class size {}", class.len());
            match output.format {
                Format::Dot => emit(&output, &class.to_dot()),
                Format::Json => {
                    let out = RauzyOut {
                        schema: "zorich.rauzy.v1",
                        perm: p,
                        size: class.len(),
                        members: class.members().iter().map(|m| m.to_string()).collect(),
                        edges: class
                            .edges()
                            .map(|(i, op, j)| (i, op.to_string(), j))
                            .collect(),
                    };
                    emit(&output, &to_json(&out))
                }
                Format::Csv => {
                    Err(Error::InvalidInput("rauzy supports json or dot output".into()))
                }
            }
        }
        Command::Orbit {
            lambda,
            perm,
            depth,
            cap,
            backend,
            output,
        } => {
            let pi: Permutation = perm.parse()?;
            let is_golden = lambda.trim() == "golden";
            let use_rational = match backend {
                Backend::Rational if is_golden => {
                    return Err(Error::InvalidInput(
                        "the golden point is irrational; use the float backend".into(),
                    ))
                }
                Backend::Rational => true,
                Backend::Float => false,
                Backend::Auto => !is_golden && lambda.contains('/'),
            };
            let (rows, letters, truncated) = if is_golden {
                if pi.symbols() != 2 {
                    return Err(Error::InvalidInput("golden preset needs m = 2".into()));
                }
                trace_orbit(&zorich_core::golden_point(), depth, cap)
            } else if use_rational {
                let p = IetPoint::new(parse_lambda_rational(&lambda)?, pi.clone())?;
                trace_orbit(&p, depth, cap)
            } else {
                let p = IetPoint::new(parse_lambda_float(&lambda)?, pi.clone())?;
                trace_orbit(&p, depth, cap)
            };
            let word = Word::unchecked(letters.clone());
            let out = OrbitOut {
                schema: "zorich.orbit.v1",
                perm: pi,
                backend: if use_rational { "rational" } else { "float" }.into(),
                word_text: format_word(&word),
                word: letters,
                total_roof: rows.iter().map(|r| r.tau1).sum(),
                rows,
                truncated: truncated.clone(),
            };
            match output.format {
                Format::Csv => emit(&output, &orbit_csv(&out))?,
                Format::Json => emit(&output, &to_json(&out))?,
                Format::Dot => {
                    return Err(Error::InvalidInput("orbit supports json or csv output".into()))
                }
            }
            match truncated {
                Some(msg) => Err(Error::Degenerate(format!("orbit ended early: {msg}"))),
                None => Ok(()),
            }
        }
        Command::Entropy { kind } => match kind {
            EntropyKind::Finite { roofs, output } => {
                let c = parse_roofs(&roofs)?;
                let r = maximize_entropy_finite(&c)?;
                eprintln!("beta = {:.12}", r.beta);
                let out = FiniteEntropyOut {
                    schema: "zorich.entropy.v1",
                    roofs: c,
                    beta: r.beta,
                    weights: r.weights,
                    residual: r.residual,
                };
                emit(&output, &to_json(&out))
            }
            EntropyKind::Bernoulli {
                roofs,
                zeta,
                budget,
                tolerance,
                output,
            } => {
                let report = match (roofs, zeta) {
                    (Some(list), None) => {
                        bernoulli_flow_entropy(parse_roofs(&list)?, budget, tolerance)?
                    }
                    (None, Some(s)) => {
                        let it = (1..=budget as u64 + 1).map(move |i| s * (i as f64).ln());
                        bernoulli_flow_entropy(it, budget, tolerance)?
                    }
                    _ => {
                        return Err(Error::InvalidInput(
                            "provide exactly one of --roofs or --zeta".into(),
                        ))
                    }
                };
                eprintln!("beta = {:.6} ({:?})", report.estimate.beta, report.estimate.route);
                emit(&output, &to_json(&TaggedOut { schema: "zorich.entropy.v1", report }))
            }
            EntropyKind::Flow {
                perm,
                q,
                bound,
                tolerance,
                output,
            } => {
                let pi: Permutation = perm.parse()?;
                let graph = AlphabetGraph::for_permutation(&pi)?;
                let qw = parse_word(&q, &pi)?;
                let report = estimate_htop_flow(&graph, &qw, bound, tolerance)?;
                eprintln!(
                    "beta = {:.6}, envelope [{:.6}, {:.6}]",
                    report.estimate.beta, report.envelope.0, report.envelope.1
                );
                emit(&output, &to_json(&TaggedOut { schema: "zorich.entropy.v1", report }))
            }
        },
        Command::Margulis {
            perm,
            q,
            p_prime,
            p,
            bound,
            returns,
            iterations,
            seed,
            threads,
            output,
        } => {
            let pi: Permutation = perm.parse()?;
            let graph = AlphabetGraph::for_permutation(&pi)?;
            let qw = parse_word(&q, &pi)?;
            let ppw = match p_prime {
                Some(s) => parse_word(&s, &pi)?,
                None => qw.clone(),
            };
            let pw = match p {
                Some(s) => parse_word(&s, &pi)?,
                None => ppw.clone(),
            };
            let rets = mb_returns_for(&graph, &pw, bound, returns)?;
            let cfg = MonteCarloConfig {
                threads,
                ..MonteCarloConfig::new(iterations, seed)
            };
            let report = margulis_check(&graph, &ppw, &pw, &rets, &cfg)?;
            eprintln!(
                "fitted s = {:.4} +- {:.4} over {} returns; max |R-1| = {:.4}",
                report.fitted_s,
                report.fitted_s_std_error,
                report.returns.len(),
                report.max_abs_deviation
            );
            emit(&output, &to_json(&MargulisOut { schema: "zorich.margulis.v1", report }))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
