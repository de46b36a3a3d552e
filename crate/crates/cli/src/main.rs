use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use insightkit_cli::commands::{self, ExportFormat, Options, Source};
use insightkit_cli::scenarios::ScenarioId;
use insightkit_cli::spec_file::parse_data_flag;
use insightkit_cli::CliError;

/// Build, run and inspect insight graphs.
#[derive(Debug, Parser)]
#[command(name = "insightkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Replace or add a dataset, as name=path (repeatable).
    #[arg(long = "data", value_name = "NAME=PATH", value_parser = parse_data_flag, global = true)]
    data: Vec<(String, PathBuf)>,
    /// Seed for isolation forest models.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output to this file instead of stdout.
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// Spec file to load.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Bundled scenario to load.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioId>,
}

impl GraphSource {
    fn source(&self) -> Source {
        match (&self.spec, self.scenario) {
            (Some(path), _) => Source::Spec(path.clone()),
            (None, Some(id)) => Source::Scenario(id),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a spec file's graph, execute it and print it as JSON.
    Run { spec: PathBuf },
    /// Build a bundled scenario and check it against its golden file.
    Scenario {
        #[arg(value_enum)]
        id: ScenarioId,
    },
    /// Print depth and breadth of a node.
    Metrics {
        node: String,
        #[command(flatten)]
        source: GraphSource,
    },
    /// Export the graph as DOT, or an analytic node's result as CSV.
    Export {
        #[arg(long, value_enum)]
        format: Format,
        /// Analytic node whose result to export (csv only).
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        source: GraphSource,
    },
    /// List the insights satisfying an objective.
    Match {
        objective: String,
        #[command(flatten)]
        source: GraphSource,
    },
}

fn execute(cli: &Cli) -> Result<(String, bool), CliError> {
    let opts = Options {
        data: cli.data.clone(),
        seed: cli.seed,
    };
    match &cli.command {
        Command::Run { spec } => Ok((commands::run(spec, &opts)?, true)),
        Command::Scenario { id } => {
            let (report, passed, graph) = commands::scenario(*id, &opts)?;
            match &cli.out {
                Some(path) => {
                    write_file(path, &graph)?;
                    print!("{report}");
                    Ok((String::new(), passed))
                }
                None => Ok((report, passed)),
            }
        }
        Command::Metrics { node, source } => Ok((commands::metrics(&source.source(), node, &opts)?, true)),
        Command::Export { format, target, source } => {
            let format = match format {
                Format::Dot => ExportFormat::Dot,
                Format::Csv => ExportFormat::Csv,
            };
            Ok((
                commands::export(&source.source(), format, target.as_deref(), &opts)?,
                true,
            ))
        }
        Command::Match { objective, source } => {
            let (names, warning) = commands::match_objective(&source.source(), objective, &opts)?;
            if let Some(w) = warning {
                eprintln!("warning: {w}");
            }
            Ok((names, true))
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&cli).and_then(|(text, passed)| {
        match (&cli.out, &cli.command) {
            (_, Command::Scenario { .. }) => print!("{text}"),
            (Some(path), _) => write_file(path, &text)?,
            (None, _) => print!("{text}"),
        }
        Ok(passed)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
