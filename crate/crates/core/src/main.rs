use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use opencover::cli::{self, Job, Params};
use opencover::Error;

/// Runs one construction on a JSON input document and writes an exact
/// certificate report. Exit code 0 when every check passes, 1 when some
/// check fails, 2 on errors.
#[derive(Parser)]
#[command(name = "opencover", version)]
struct Args {
    /// One of the supported subcommands, e.g. measure, p2 or main-lemma.
    subcommand: String,
    /// Input document; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

fn read_input(path: Option<&PathBuf>) -> Result<serde_json::Value, Error> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    if text.trim().is_empty() {
        return Ok(serde_json::Value::Object(Default::default()));
    }
    Ok(serde_json::from_str(&text)?)
}

fn write(path: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut job = Job { subcommand: args.subcommand, input: serde_json::Value::Null, params: args.params };
    let result = if cli::is_known(&job.subcommand) {
        read_input(args.input.as_ref()).and_then(|input| {
            job.input = input;
            cli::dispatch(&job)
        })
    } else {
        Err(Error::UnknownSubcommand(job.subcommand.clone()))
    };
    let (text, code) = match result {
        Ok(report) => (report.render(), if report.pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            (cli::render(&cli::error_document(&job, &e)), 2)
        }
    };
    if let Err(e) = write(args.output.as_ref(), &text) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
