//! `framegate` command-line harness.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

// Guards such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, ColorChoice, Command};

pub mod commands;
pub mod config;
pub mod output;

use config::{flag_name, keys, Config, COMMANDS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<framegate::Error> for CliError {
    fn from(e: framegate::Error) -> Self {
        match e {
            framegate::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Wraps an I/O or parse failure with the path involved.
pub(crate) fn data_err(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn subcommand(name: &'static str) -> Command {
    let mut cmd = Command::new(name).about(config::about(name)).arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("Plain-text key = value file; flags override it")
            .value_parser(clap::value_parser!(PathBuf)),
    );
    for k in keys(name) {
        let help = if k.default.is_empty() {
            format!("[key {}] {}", k.name, k.help)
        } else {
            format!("[key {}] {} [default: {}]", k.name, k.help, k.default)
        };
        cmd = cmd.arg(
            Arg::new(k.name)
                .long(flag_name(k.name))
                .value_name("VALUE")
                .action(ArgAction::Set)
                .help(help),
        );
    }
    cmd
}

pub fn cli() -> Command {
    let color = if std::env::var_os("NO_COLOR").is_some() { ColorChoice::Never } else { ColorChoice::Auto };
    let mut app = Command::new("framegate")
        .about("Geometric-utility frame gating: labelling, distillation, gating and evaluation")
        .version(env!("CARGO_PKG_VERSION"))
        .color(color)
        .subcommand_required(true)
        .arg_required_else_help(true);
    for name in COMMANDS {
        app = app.subcommand(subcommand(name));
    }
    app
}

fn resolve(name: &'static str, m: &ArgMatches) -> Result<Config, CliError> {
    let flags: Vec<(String, String)> = keys(name)
        .iter()
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    Config::resolve(name, m.get_one::<PathBuf>("config").map(PathBuf::as_path), &flags)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let name = COMMANDS.iter().copied().find(|c| *c == name).expect("registered subcommand");
    let result = resolve(name, sub).and_then(|cfg| match name {
        "label" => commands::label(&cfg),
        "train" => commands::train(&cfg),
        "gate" => commands::gate(&cfg),
        "eval-traj" => commands::eval_traj(&cfg),
        "eval-recon" => commands::eval_recon(&cfg),
        "report" => commands::report(&cfg),
        _ => unreachable!("registered subcommand"),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
