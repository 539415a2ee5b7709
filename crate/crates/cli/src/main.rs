use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use sitecalc::corpus::CorpusBounds;
use sitecalc_cli::commands::{parse_args, parse_flat_mode, run, RunOptions, COMMANDS};
use sitecalc_cli::corpus::corpus_documents;
use sitecalc_cli::{parse, print, CliError};

/// Checks on finite sites written in the sitecalc text format.
#[derive(Parser, Debug)]
#[command(name = "sitecalc", version, about)]
struct Cli {
    /// Document to read.
    #[arg(long)]
    input: Option<std::path::PathBuf>,
    /// One of the checks, or `print` to canonicalize the input, or `corpus`
    /// to write the enumerated corpus.
    #[arg(long)]
    command: String,
    /// Command arguments, `k=v`, repeated or comma separated.
    #[arg(long = "args")]
    args: Vec<String>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Filters per object before the cofree site reports a bound.
    #[arg(long, default_value_t = sitecalc::comonad::DEFAULT_MAX_FILTERS)]
    bound_filters: usize,
    /// `reduced` or `exhaustive:N`.
    #[arg(long, default_value = "reduced")]
    flat_mode: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match go(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn go(cli: &Cli) -> Result<ExitCode, CliError> {
    let args = parse_args(cli.args.iter().map(String::as_str))?;
    if cli.command == "corpus" {
        let num = |k: &str, d: usize| -> Result<usize, CliError> {
            args.get(k)
                .map(|v| v.parse().map_err(|_| CliError::Args(format!("`{k}` needs a number"))))
                .unwrap_or(Ok(d))
        };
        let bounds = CorpusBounds {
            max_objects: num("max_objects", 2)?,
            max_arrows: num("max_arrows", 4)?,
            max_topologies: num("max_topologies", 64)?,
        };
        let docs: Vec<String> = corpus_documents(bounds)?.iter().map(print).collect();
        emit(&docs.join("\n"));
        return Ok(ExitCode::SUCCESS);
    }
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Args("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Args(format!("cannot read {}: {e}", path.display())))?;
    let doc = parse(&text)?;
    if cli.command == "print" {
        emit(&print(&doc));
        return Ok(ExitCode::SUCCESS);
    }
    if !COMMANDS.contains(&cli.command.as_str()) {
        return Err(CliError::UnknownCommand(cli.command.clone()));
    }
    let opts = RunOptions {
        bound_filters: cli.bound_filters,
        flat_mode: parse_flat_mode(&cli.flat_mode)?,
    };
    let report = run(&cli.command, &doc, &args, &opts)?;
    if cli.json {
        emit(&(report.to_json() + "\n"));
    } else {
        emit(&report.to_text());
    }
    Ok(match report.verdict {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
        }
    }
}
