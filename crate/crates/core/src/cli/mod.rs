//! The `causalkg` command line.
//!
//! Exit codes: 0 success, 2 domain or validation error, 3 I/O or format
//! error.

mod commands;

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Set to disable ANSI styling of diagnostics.
pub const NO_COLOR_ENV: &str = "CAUSALKG_NO_COLOR";

#[derive(Debug, Parser)]
#[command(name = "causalkg", version, about = "Causal knowledge graphs from causal Bayesian networks")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Seed for commands that sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file; findings go to stderr.
    Validate { model: PathBuf },
    /// Estimate CPTs for a model skeleton from a CSV dataset.
    Fit {
        skeleton: PathBuf,
        data: PathBuf,
        #[arg(long, default_value_t = crate::cbn::DEFAULT_ALPHA)]
        alpha: f64,
        /// Write the fitted model here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Total, natural direct and natural indirect effects.
    Effects {
        model: PathBuf,
        #[arg(long)]
        treatment: String,
        #[arg(long)]
        outcome: String,
        #[arg(long)]
        mediator: Option<String>,
        #[arg(long, requires = "t1")]
        t0: Option<String>,
        #[arg(long, requires = "t0")]
        t1: Option<String>,
    },
    /// Build the causal knowledge graph as Turtle-star.
    Build {
        model: PathBuf,
        #[arg(long)]
        roles: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one query.
    Query {
        model: PathBuf,
        query: String,
        /// Knowledge graph used for explanations.
        #[arg(long)]
        kg: Option<PathBuf>,
        /// Append a textual explanation (needs --kg).
        #[arg(long, requires = "kg")]
        explain: bool,
    },
    /// Read queries line by line from stdin; `:quit` ends the session.
    Shell {
        model: PathBuf,
        #[arg(long)]
        kg: Option<PathBuf>,
    },
    /// Write a bundled example (model, roles, README) into a directory.
    Example {
        name: String,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Draw records from a model by ancestral sampling (uses --seed).
    Sample {
        model: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1000)]
        rows: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Streams and terminal settings for one invocation.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    pub color: bool,
    /// Show a prompt in `shell`.
    pub interactive: bool,
}

#[derive(Debug)]
pub(crate) enum Failure {
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let use_stderr = e.use_stderr();
            let text = if io.color { e.render().ansi().to_string() } else { e.render().to_string() };
            let sink: &mut dyn Write = if use_stderr { io.stderr } else { io.stdout };
            let _ = write!(sink, "{text}");
            return if use_stderr { EXIT_DOMAIN } else { EXIT_OK };
        }
    };
    match commands::dispatch(&cli, io) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            report_error(io, failure.message());
            failure.code()
        }
    }
}

pub(crate) fn report_error(io: &mut Io<'_>, message: &str) {
    let label = if io.color { "\x1b[1;31merror\x1b[0m" } else { "error" };
    let _ = writeln!(io.stderr, "{label}: {}", message.trim_end());
}
