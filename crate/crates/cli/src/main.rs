use std::path::PathBuf;
use std::process::ExitCode;

use ambientforge_cli::commands::{self, Normalization, Options};
use ambientforge_cli::report::Report;
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Curvature,
    WalkerCheck,
    Expand,
    Verify,
    Example,
}

/// Ambient metrics of pseudo-Riemannian conformal structures.
#[derive(Debug, Parser)]
#[command(name = "ambientforge", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// Metric file, or the example name for `example`.
    target: Option<String>,
    /// Expansion or verification order.
    #[arg(long)]
    order: Option<usize>,
    /// Rank of the null distribution.
    #[arg(long)]
    rank: Option<usize>,
    /// Also write the JSON report to this file ("-" for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Obstruction normalization: obstruction=paper or obstruction=canonical.
    #[arg(long, value_parser = Normalization::parse, default_value = "obstruction=paper")]
    normalization: Normalization,
    /// Trace-free choice file with entries `c[a,b] = <expr>` (expand).
    #[arg(long)]
    even_choice: Option<PathBuf>,
}

fn input_error(msg: String) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let even_choice = match &cli.even_choice {
        None => None,
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some((p.display().to_string(), t)),
            Err(e) => return input_error(format!("{}: {}", p.display(), e)),
        },
    };
    let opts = Options {
        order: cli.order,
        rank: cli.rank,
        normalization: cli.normalization,
        even_choice,
    };
    let Some(target) = cli.target else {
        return input_error("missing file path or example name".into());
    };
    let report: Report = match cli.command {
        Command::Example => commands::example(&target, &opts),
        other => {
            let text = match std::fs::read_to_string(&target) {
                Ok(t) => t,
                Err(e) => return input_error(format!("{}: {}", target, e)),
            };
            let name = match other {
                Command::Curvature => "curvature",
                Command::WalkerCheck => "walker-check",
                Command::Expand => "expand",
                Command::Verify => "verify",
                Command::Example => unreachable!(),
            };
            commands::run(name, Some(&target), &text, &opts)
        }
    };
    match &cli.json {
        Some(p) if p.as_os_str() == "-" => println!("{}", report.to_json()),
        Some(p) => {
            if let Err(e) = std::fs::write(p, report.to_json() + "\n") {
                return input_error(format!("{}: {}", p.display(), e));
            }
            print!("{}", report.to_text());
        }
        None => print!("{}", report.to_text()),
    }
    if let Some(e) = &report.error {
        eprintln!("error: {}", e.message);
    }
    ExitCode::from(report.exit_code() as u8)
}
