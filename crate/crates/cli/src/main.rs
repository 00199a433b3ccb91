//! `tauber`: desk-scale experiments with summability transforms, ideals on N, subsequence
//! selectors and filter games.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | i/o failure |
//! | 2 | parse error or invalid argument |
//! | 3 | scale cap or index overflow |
//! | 4 | precondition failed (e.g. the matrix is not regular for the ideal) |
//! | 5 | search cap exhausted or only a diagnostic was produced |
//! | 6 | certificate verification failed |
//! | 7 | illegal game move or unsupported input |

mod commands;
mod config;
mod runlog;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use commands::{
    AdversaryArgs, DemoArgs, DensityArgs, EscapeArgs, Failure, GameArgs, MetricArgs, OscillateArgs,
    RegularityArgs, TransformArgs, VerdictArgs, VerifyArgs,
};
use runlog::RunRecord;

#[derive(Debug, Parser)]
#[command(
    name = "tauber",
    version,
    about = "Summability, ideals and selector experiments at desk scale"
)]
struct Cli {
    /// Flat key = value file whose keys mirror long flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Append a JSON-lines run record to this file.
    #[arg(long = "run-log", global = true)]
    run_log: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Prefix density profile of a set.
    Density(DensityArgs),
    /// Membership of a set in an ideal or its dual filter.
    Verdict(VerdictArgs),
    /// Regularity conditions of a matrix relative to an ideal.
    Regularity(RegularityArgs),
    /// Exact transform values or the row profile of a matrix.
    Transform(TransformArgs),
    /// Distance between two selectors, with optional continuity moduli.
    Metric(MetricArgs),
    /// Selector through a stem whose transform defeats a bound.
    Escape(EscapeArgs),
    /// Ideal limit of a transform, or an oscillation pair for a bounded sequence.
    Oscillate(OscillateArgs),
    /// 0/1 sequence whose transform is certified not statistically convergent.
    Adversary(AdversaryArgs),
    /// Re-audit a certificate file.
    Verify(VerifyArgs),
    /// Play the filter game and adjudicate the transcript.
    Game(GameArgs),
    /// Round-by-round escapes from random basic open sets.
    Demo(DemoArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Density(_) => "density",
            Cmd::Verdict(_) => "verdict",
            Cmd::Regularity(_) => "regularity",
            Cmd::Transform(_) => "transform",
            Cmd::Metric(_) => "metric",
            Cmd::Escape(_) => "escape",
            Cmd::Oscillate(_) => "oscillate",
            Cmd::Adversary(_) => "adversary",
            Cmd::Verify(_) => "verify",
            Cmd::Game(_) => "game",
            Cmd::Demo(_) => "demo",
        }
    }

    fn run(&self, seed: u64) -> Result<commands::Report, Failure> {
        match self {
            Cmd::Density(a) => commands::density(a),
            Cmd::Verdict(a) => commands::verdict(a),
            Cmd::Regularity(a) => commands::regularity(a),
            Cmd::Transform(a) => commands::transform(a),
            Cmd::Metric(a) => commands::metric(a),
            Cmd::Escape(a) => commands::escape(a),
            Cmd::Oscillate(a) => commands::oscillate(a),
            Cmd::Adversary(a) => commands::adversary(a),
            Cmd::Verify(a) => commands::verify(a),
            Cmd::Game(a) => commands::game(a, seed),
            Cmd::Demo(a) => commands::demo(a, seed),
        }
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let file_config = match config::config_path(&raw) {
        Some(path) => match std::fs::read_to_string(&path) {
            Ok(text) => match config::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {path}: {}", e.0);
                    return ExitCode::from(2);
                }
            },
            Err(e) => {
                eprintln!("error: {path}: {e}");
                return ExitCode::from(1);
            }
        },
        None => BTreeMap::new(),
    };
    let args = match config::merge(&Cli::command(), &raw, &file_config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };

    let (output, code) = match cli.command.run(cli.seed) {
        Ok(report) => (report.body, report.exit),
        Err(failure) => {
            eprintln!("error: {failure}");
            (failure.body().unwrap_or_default(), failure.code())
        }
    };
    if !output.is_empty() {
        print!("{output}");
        if !output.ends_with('\n') {
            println!();
        }
    }
    if let Some(path) = &cli.run_log {
        let record = RunRecord::new(
            cli.command.name(),
            args[1..].to_vec(),
            file_config,
            cli.seed,
            code,
            &output,
        );
        if let Err(e) = record.append(path) {
            eprintln!("error: run log {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}
