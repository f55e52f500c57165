use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use repfib_core::kfib::write_csv;
use repfib_core::pipeline::{self, ProofLedger, RunConfig, TheoremReport};
use repfib_core::{enumerate_solutions, solve_small_n, Error, PrecisionPolicy};
use serde_json::Value;

/// k-generalized Fibonacci numbers that are concatenations of two repdigits.
#[derive(Parser, Debug)]
#[command(name = "repfib", version)]
struct Cli {
    /// Starting working precision in bits (doubles on demand).
    #[arg(long, global = true, default_value_t = PrecisionPolicy::default().start_bits)]
    precision_bits: u32,
    /// Ceiling for the working precision in bits.
    #[arg(long, global = true, default_value_t = PrecisionPolicy::default().max_bits)]
    max_precision_bits: u32,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for per-stage JSON, the ledger roll-up and CSV output.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Reuse stage files in --out-dir whose inputs match.
    #[arg(long, global = true)]
    resume: bool,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every F_n^(k) that is a two-repdigit concatenation.
    Enumerate {
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        #[arg(long, default_value_t = 50)]
        k_max: u32,
        #[arg(long, default_value_t = 500)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Solve the power-of-two regime 2 <= n <= k + 1.
    SmallN {
        /// Instantiate the families up to this k.
        #[arg(long, default_value_t = 10)]
        k_probe: u32,
    },
    /// Bound chain and both reduction rounds for 4 <= k <= 500.
    ReduceSmallK {
        /// Inclusive range such as 4-50, 4..=50 or 7.
        #[arg(long, default_value = "4-50", value_parser = parse_range)]
        k_range: (u32, u32),
        /// Stop after the first round (the bound on m).
        #[arg(long)]
        round1_only: bool,
        #[arg(long, default_value_t = 500)]
        n_max: u64,
    },
    /// Absolute bounds and both reduction rounds for k > 500.
    ReduceLargeK,
    /// Compare the enumeration with the table of solutions.
    VerifyTheorem {
        #[arg(long, default_value_t = 50)]
        k_max: u32,
        #[arg(long, default_value_t = 500)]
        n_max: u64,
    },
    /// Everything at full scale: k <= 500 in all stages. Slow.
    FullProof,
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let t = text.trim();
    let (a, b) = if let Some((a, b)) = t.split_once("..=") {
        (a, b)
    } else if let Some((a, b)) = t.split_once("..") {
        (a, b)
    } else if let Some((a, b)) = t.split_once('-') {
        (a, b)
    } else if let Some((a, b)) = t.split_once(':') {
        (a, b)
    } else {
        (t, t)
    };
    let a: u32 = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..={b}"));
    }
    Ok((a, b))
}

fn base_config(cli: &Cli) -> RunConfig {
    RunConfig {
        policy: PrecisionPolicy::new(cli.precision_bits, cli.max_precision_bits),
        jobs: cli.jobs,
        out_dir: cli.out_dir.clone(),
        resume: cli.resume,
        ..RunConfig::default()
    }
}

fn scalars(prefix: &str, v: &Value, depth: usize, out: &mut Vec<String>) {
    match v {
        Value::Object(map) if depth > 0 => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                scalars(&key, x, depth - 1, out);
            }
        }
        Value::Bool(b) => out.push(format!("{prefix}={b}")),
        Value::Number(n) => out.push(format!("{prefix}={n}")),
        Value::String(s) if s.len() <= 32 => out.push(format!("{prefix}={s}")),
        _ => {}
    }
}

fn print_ledger(ledger: &ProofLedger) {
    for s in &ledger.stages {
        let verdict = if s.holds() { "PASS" } else { "FAIL" };
        println!("{verdict} {:<20} {:>6} bits {:>9} ms  {}", s.stage, s.precision_bits, s.wall_ms, s.anchor);
        let mut facts = Vec::new();
        scalars("", &s.outputs, 3, &mut facts);
        facts.retain(|f| !f.starts_with("holds="));
        if !facts.is_empty() {
            println!("     {}", facts.join("  "));
        }
    }
}

fn print_theorem(r: &TheoremReport) {
    for e in &r.entries {
        let verdict = match (e.in_range, e.found) {
            (false, _) => "SKIP",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        println!("{verdict} F_{}^({}) = {}", e.n, e.k, e.value);
    }
    for f in &r.families {
        let ok = f.from_small_n && f.found == f.expected;
        println!(
            "{} F_{}^(k) = {} for k >= {} ({} of {} members found, power-of-two analysis: {})",
            if ok { "PASS" } else { "FAIL" },
            f.n,
            f.value,
            f.k_min,
            f.found,
            f.expected,
            f.from_small_n
        );
    }
    for s in &r.extras {
        println!("EXTRA F_{}^({}) = {}", s.n, s.k, s.value);
    }
    for (k, n, v) in &r.misses {
        println!("MISS F_{n}^({k}) = {v}");
    }
    println!(
        "{} solutions with 2 <= k <= {} and n <= {}; {} extras, {} misses",
        r.solutions,
        r.k_max,
        r.n_max,
        r.extras.len(),
        r.misses.len()
    );
}

fn finish(result: repfib_core::Result<ProofLedger>) -> anyhow::Result<ExitCode> {
    let code = pipeline::exit_code(&result);
    match result {
        Ok(ledger) => {
            print_ledger(&ledger);
            println!("all stage bounds hold");
        }
        Err(Error::Mismatch(msg)) => eprintln!("MISMATCH: {msg}"),
        Err(e) => return Err(e.into()),
    }
    Ok(ExitCode::from(code as u8))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = base_config(&cli);
    match cli.command {
        Command::Enumerate { k_min, k_max, n_max, format } => {
            let sols = enumerate_solutions(k_min..=k_max, n_max)?;
            let stdout = io::stdout();
            match format {
                Format::Csv => write_csv(&sols, stdout.lock())?,
                Format::Json => {
                    let mut out = stdout.lock();
                    serde_json::to_writer_pretty(&mut out, &sols)?;
                    writeln!(out)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SmallN { k_probe } => {
            let report = solve_small_n(k_probe);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::ReduceSmallK { k_range, round1_only, n_max } => {
            cfg.k_min = k_range.0;
            cfg.k_max = k_range.1;
            cfg.n_max = n_max;
            cfg.round2 = !round1_only;
            finish(pipeline::run_small_k(&cfg))
        }
        Command::ReduceLargeK => finish(pipeline::run_large_k(&cfg)),
        Command::VerifyTheorem { k_max, n_max } => {
            cfg.theorem_k_max = k_max;
            cfg.n_max = n_max;
            let report = pipeline::verify_theorem(&cfg)?;
            print_theorem(&report);
            if cfg.out_dir.is_some() {
                match pipeline::run_verify_theorem(&cfg) {
                    Ok(_) | Err(Error::Mismatch(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(ExitCode::from(if report.holds() { 0 } else { 2 }))
        }
        Command::FullProof => {
            eprintln!(
                "warning: full-proof runs the whole computation (k up to 500 in every stage, \
                 about 6.7 million reductions); expect about half an hour on one core"
            );
            let full = RunConfig {
                policy: cfg.policy,
                jobs: cfg.jobs,
                out_dir: cfg.out_dir,
                resume: cfg.resume,
                ..RunConfig::full()
            };
            finish(pipeline::full_proof(&full))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli).context("repfib failed") {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
