use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmd;
mod parse;
mod report;

use report::{Failure, Format, Report};

/// Exact-arithmetic toolkit for Lusin schemes, open maps, topological games
/// and scattered spaces.
#[derive(Parser)]
#[command(name = "lusin", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Strict Lusin scheme audits and addresses
    #[command(subcommand)]
    Scheme(cmd::scheme::Command),
    /// The open map onto a Polish space and its ball family
    #[command(subcommand)]
    Map(cmd::map::Command),
    /// Choquet-type games
    #[command(subcommand)]
    Game(cmd::game::Command),
    /// Fiber amplification on the Baire space
    #[command(subcommand)]
    Fiber(cmd::fiber::Command),
    /// Cantor-Bendixson analysis and maps onto countable compact spaces
    #[command(subcommand)]
    Cb(cmd::cb::Command),
    /// Nested segment schemes
    #[command(subcommand)]
    Cantor(cmd::cantor::Command),
}

#[derive(Args, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn dispatch(group: Group) -> Result<(Report, Output), Failure> {
    match group {
        Group::Scheme(c) => cmd::scheme::run(c),
        Group::Map(c) => cmd::map::run(c),
        Group::Game(c) => cmd::game::run(c),
        Group::Fiber(c) => cmd::fiber::run(c),
        Group::Cb(c) => cmd::cb::run(c),
        Group::Cantor(c) => cmd::cantor::run(c),
    }
}

fn emit(report: &Report, out: &Output) -> Result<(), Failure> {
    let text = report.render(out.format)?;
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {}", path.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 on --help
    let cli = Cli::parse();
    let result = dispatch(cli.group).and_then(|(report, out)| emit(&report, &out).map(|_| report.ok));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            if let Failure::Usage(_) = e {
                eprintln!("\nFor more information, try '--help'.");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
