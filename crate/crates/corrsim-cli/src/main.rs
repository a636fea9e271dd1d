//! Scenario runner and trace renderer.
//!
//! - `run <config>`: print the trace set of one scenario config
//! - `figures [--configs DIR] [--goldens DIR] [--dir OUT]`: run the full
//!   trace-study suite and diff against the golden files
//! - `check <config> <check-id>`: run one verifier check
//!
//! Exit codes: 0 ok, 1 diff or check failure, 2 configuration error.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use corrsim::studies::{default_dirs, run_suite};
use corrsim::verify::{run_check, CheckId};
use corrsim::{build_universe, render_compact, render_tokens, run, Engine};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "corrsim", version, about = "car-factory corrigibility simulator")]
struct Cli {
    /// Not supported: the engine is deterministic and probabilistic
    /// branching is enumerated, never sampled.
    #[arg(long, global = true, hide = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and print its traces.
    Run(RunArgs),
    /// Run every catalogued study row and diff against the goldens.
    Figures(FiguresArgs),
    /// Run one verifier check against a scenario config.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Space-separated token output instead of the compact grammar.
    #[arg(long)]
    tokens: bool,
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory holding the study config folders.
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Directory holding the golden files.
    #[arg(long)]
    goldens: Option<PathBuf>,
    /// Write the rendered suite into this directory.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Evaluate rows sequentially even when parallel support is built in.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct CheckArgs {
    config: PathBuf,
    /// One of C1 CC1 C2 C3 D1.1 D1.2 D5 DD1.1 DD1.2 DD5 E1.1 E1.2 EE1.1
    /// EE1.2 RS.
    check_id: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seed.is_some() {
        eprintln!(
            "error: --seed is not supported; the engine is deterministic and \
             probabilistic branching is enumerated exhaustively"
        );
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run(args) => {
            let text = std::fs::read_to_string(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let cfg = corrsim::config::parse_config(&text)
                .with_context(|| format!("parsing {}", args.config.display()))?;
            let universe = build_universe(cfg)?;
            let ts = run::<f64>(&universe)?;
            if args.tokens {
                println!("{}", render_tokens(&ts));
            } else {
                println!("{}", render_compact(&ts));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Figures(args) => {
            let (def_configs, def_goldens) = default_dirs();
            let configs = args.configs.unwrap_or(def_configs);
            let goldens = args.goldens.unwrap_or(def_goldens);
            let report = run_suite(&configs, &goldens, args.dir.as_deref(), !args.sequential)?;
            for d in &report.diffs {
                println!("MISMATCH {}/{}", d.study, d.row);
                println!("  expected: {}", d.expected.replace('\n', " | "));
                println!("  actual:   {}", d.actual.replace('\n', " | "));
            }
            println!(
                "{} studies, {} rows, {} mismatches, {:.3}s total",
                report.studies_run,
                report.rows_run,
                report.diffs.len(),
                report.elapsed.as_secs_f64()
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Check(args) => {
            let id = CheckId::parse(&args.check_id)
                .with_context(|| format!("unknown check id {:?}", args.check_id))?;
            let text = std::fs::read_to_string(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let cfg = corrsim::config::parse_config(&text)
                .with_context(|| format!("parsing {}", args.config.display()))?;
            let agent = cfg.agent;
            let universe = build_universe(cfg)?;
            let engine: Engine<f64> = Engine::new(&universe, agent);
            let report = run_check(&engine, id)?;
            print!("{}", report.render());
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
