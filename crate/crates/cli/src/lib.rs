//! Command-line front end: `synth`, `fit`, `bench` and `score`.
//!
//! Every command except `score` writes its outputs and a `manifest.json`
//! with input and output SHA-256 digests into the `--out` directory.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::Parser;

pub use error::{CliError, Result};

use args::{Cli, Command};

/// What a successful run produced.
#[derive(Debug)]
pub enum Outcome {
    Manifest(output::RunManifest),
    Score(commands::ScoreOutput),
    /// Help or version text was requested.
    Text(String),
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, S>(argv: I) -> Result<Outcome>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return Ok(Outcome::Text(e.to_string()));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let rest = argv.get(1..).unwrap_or_default();
    let go = || -> Result<Outcome> {
        match &cli.command {
            Command::Synth(a) => commands::synth(a, rest).map(Outcome::Manifest),
            Command::Fit(a) => commands::fit(a, rest).map(Outcome::Manifest),
            Command::Bench(a) => commands::bench(a, rest).map(Outcome::Manifest),
            Command::Score(a) => commands::score(a).map(Outcome::Score),
        }
    };
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(go),
        None => go(),
    }
}
