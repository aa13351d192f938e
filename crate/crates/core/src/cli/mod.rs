//! Command-line front end: flag parsing, config files and run execution.

mod config;
mod run;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::parser::ValueSource;
use clap::{Arg, ArgAction};

pub use config::{key_help, Command, EngineKind, ModelKind, RunConfig, SteinVariant, ALL_KEYS};
pub use run::{execute, resolve_workers, with_defaults, RunOutcome, WORKERS_ENV};

use crate::error::{Error, Result};

/// What the command line asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run(RunConfig),
    /// Help or version text to print before exiting successfully.
    Info(String),
}

pub fn command() -> clap::Command {
    let mut app = clap::Command::new("spinglass")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Exact and Monte Carlo free energies of the Hopfield and SK models")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in Command::all() {
        let mut sub = clap::Command::new(c.name()).about(c.about());
        for key in c.keys() {
            sub = sub.arg(
                Arg::new(key)
                    .long(key)
                    .value_name(key.to_ascii_uppercase().replace('-', "_"))
                    .help(key_help(key))
                    .allow_negative_numbers(true)
                    .action(ArgAction::Set),
            );
        }
        sub = sub.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value settings file; flags take precedence"),
        );
        app = app.subcommand(sub);
    }
    app
}

/// A run manifest doubles as a config file: only its `config.` lines count.
fn settings_text(text: &str) -> String {
    let is_manifest = text.lines().any(|l| l.trim_start().starts_with("config."));
    if !is_manifest {
        return text.to_string();
    }
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix("config."))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Parse argv (program name first). Config-file values are applied before
/// flags, so flags win.
pub fn parse_invocation<I, T>(argv: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Invocation::Info(e.to_string())),
                _ => {
                    let text = e.to_string();
                    let text = text.strip_prefix("error: ").unwrap_or(&text);
                    Err(Error::Usage(text.trim_end().to_string()))
                }
            }
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command: Command = name.parse()?;
    let mut cfg = RunConfig::new(command);
    if let Some(path) = sub.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let text = settings_text(&text);
        let from_file = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix("subcommand="))
            .next_back()
            .map(str::trim);
        if from_file.is_some_and(|s| s != command.name()) {
            return Err(Error::Usage(format!(
                "config file {path} is for '{}', not '{}'",
                from_file.unwrap_or_default(),
                command.name()
            )));
        }
        cfg.apply_config_str(&text)?;
    }
    for key in command.keys() {
        if sub.value_source(key) == Some(ValueSource::CommandLine) {
            let v = sub.get_one::<String>(key).expect("flag takes a value");
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(Invocation::Run(cfg))
}

/// Parse argv into a validated configuration; help and version requests are
/// reported as usage errors.
pub fn parse_cli<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_invocation(argv)? {
        Invocation::Run(cfg) => Ok(cfg),
        Invocation::Info(text) => Err(Error::Usage(text)),
    }
}
