//! Experiment harness behind the `qwild` binary.
//!
//! [`run`] parses the arguments, merges an optional JSON config file under
//! them, runs one subcommand and emits its document. It never exits the
//! process; the caller gets the exit status.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

pub mod commands;
pub mod determinism;
pub mod emit;

pub use emit::{Document, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_STRICT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qwild",
    version,
    about = "Query-complexity experiments for search with wildcards and group testing",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gram spectrum, √G row and distance law for each (n, k).
    Gram(GramArgs),
    /// Expected PGM distance and success probability across sizes.
    DkSweep(SweepArgs),
    /// Monte Carlo runs of the staged wildcard search.
    Sww(SwwArgs),
    /// Monte Carlo runs of quantum group testing.
    Cgt(CgtArgs),
    /// Monte Carlo runs of classical binary-search group testing.
    CgtClassical(CgtArgs),
    /// Enumerated adversary bound for small n.
    Adversary(AdversaryArgs),
    /// Wildcard instances solved through group testing.
    Reduce(ReduceArgs),
    /// Runs the acceptance criteria.
    AllAcceptance(AcceptanceArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the document here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON object of flag values; flags on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Exit with status 3 if any precision alarm is raised.
    #[arg(long)]
    pub strict: bool,
}

/// Problem sizes: an explicit list or an inclusive range.
#[derive(Args, Debug, Clone)]
pub struct Sizes {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_min", "n_max"])]
    pub n: Vec<u64>,
    #[arg(long, requires = "n_max")]
    pub n_min: Option<u64>,
    #[arg(long, requires = "n_min")]
    pub n_max: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct GramArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    /// Comma-separated subset sizes; all of 0..=n when omitted.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    /// Compare against the dense matrix square root (small n only).
    #[arg(long)]
    pub brute_check: bool,
    /// Relative error budget per √G entry.
    #[arg(long)]
    pub budget: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    /// Comma-separated subset sizes; n - ⌈√n⌉ when omitted.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    #[arg(long)]
    pub budget: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SwwArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include every oracle call in the records.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub budget: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CgtArgs {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Comma-separated bounds on the number of ones.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Hidden weight; uniform on 0..=k when omitted.
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AdversaryArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReduceSolver {
    Classical,
    Quantum,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct ReduceArgs {
    /// Comma-separated wildcard string lengths.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Zero positions appended to the group-testing input.
    #[arg(long, default_value_t = 0)]
    pub padding: usize,
    #[arg(long, value_enum, default_value_t = ReduceSolver::Both)]
    pub solver: ReduceSolver,
    /// Random hidden strings per length; every string when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AcceptanceArgs {
    /// Comma-separated criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Gram(a) => &a.output,
            Command::DkSweep(a) => &a.output,
            Command::Sww(a) => &a.output,
            Command::Cgt(a) | Command::CgtClassical(a) => &a.output,
            Command::Adversary(a) => &a.output,
            Command::Reduce(a) => &a.output,
            Command::AllAcceptance(a) => &a.output,
        }
    }
}

/// Bad input from the user: reported with exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.downcast_ref::<UsageError>().is_some()
        || matches!(e.downcast_ref::<qwild::Error>(), Some(qwild::Error::Parameter(_)))
}

/// Config keys that select the same thing as a flag given on the command line.
fn shadowed_by(id: &str) -> &'static [&'static str] {
    match id {
        "n" => &["n_min", "n_max"],
        "n_min" | "n_max" => &["n"],
        _ => &[],
    }
}

/// Turns a config object into flags for `sub`, leaving out any key the
/// command line already sets.
fn config_flags(config: &Value, sub: &clap::Command, given: &ArgMatches) -> Result<Vec<OsString>> {
    let map = config
        .as_object()
        .ok_or_else(|| usage("the config file must hold a JSON object"))?;
    let mut flags = Vec::new();
    for (key, value) in map {
        let id = key.replace('-', "_");
        if id == "config" || !sub.get_arguments().any(|a| a.get_id().as_str() == id) {
            return Err(usage(format!("unknown config key `{key}` for `{}`", sub.get_name())));
        }
        let on_command_line = |id: &str| {
            sub.get_arguments().any(|a| a.get_id().as_str() == id)
                && given.value_source(id) == Some(ValueSource::CommandLine)
        };
        if on_command_line(&id) || shadowed_by(&id).iter().any(|s| on_command_line(s)) {
            continue;
        }
        let flag = format!("--{}", id.replace('_', "-"));
        let text = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(usage(format!("config key `{key}` holds an unsupported value"))),
        };
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => flags.push(flag.into()),
            Value::Array(items) => {
                let parts = items.iter().map(text).collect::<Result<Vec<_>>>()?;
                flags.push(format!("{flag}={}", parts.join(",")).into());
            }
            v => flags.push(format!("{flag}={}", text(v)?).into()),
        }
    }
    Ok(flags)
}

/// Parses `args`, folding in the config file named by `--config`.
pub fn parse<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let matches = Cli::command().try_get_matches_from(&args)?;
    let Some((name, sub_matches)) = matches.subcommand() else {
        return Cli::from_arg_matches(&matches);
    };
    let Some(path) = sub_matches.get_one::<PathBuf>("config") else {
        return Cli::from_arg_matches(&matches);
    };
    let to_clap = |e: anyhow::Error| Cli::command().error(clap::error::ErrorKind::InvalidValue, format!("{e:#}"));
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(to_clap)?;
    let config: Value = serde_json::from_str(&text)
        .with_context(|| format!("config {} is not valid JSON", path.display()))
        .map_err(to_clap)?;
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("parsed subcommand exists");
    let extra = config_flags(&config, sub, sub_matches).map_err(to_clap)?;
    // Subcommand first, then config flags, then the user's own flags.
    let mut merged = args[..2].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[2..]);
    let matches = Cli::command().try_get_matches_from(&merged)?;
    Cli::from_arg_matches(&matches)
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayHelpOnMissingArgumentOrSubcommand, DisplayVersion};
            let text = e.render().to_string();
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if is_usage(&e) {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let outcome = commands::dispatch(&cli.command)?;
    let output = cli.command.output();
    emit::ensure_nonempty(&outcome.doc)?;
    let bytes = outcome.doc.encode(output.format)?;
    emit::write_output(&bytes, output.out.as_deref(), stdout)?;
    for w in &outcome.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    // Keep standard output parseable when the document goes there.
    if output.out.is_some() {
        writeln!(stdout, "{}", outcome.summary_line)?;
    } else {
        writeln!(stderr, "{}", outcome.summary_line)?;
    }
    if let Some(reason) = &outcome.failure {
        writeln!(stderr, "error: {reason}")?;
        return Ok(EXIT_RUNTIME);
    }
    if output.strict && !outcome.warnings.is_empty() {
        writeln!(
            stderr,
            "error: {} precision alarm(s) under --strict",
            outcome.warnings.len()
        )?;
        return Ok(EXIT_STRICT);
    }
    Ok(EXIT_OK)
}

/// Runs `args` and returns `(status, stdout, stderr)`.
pub fn run_captured<I, T>(args: I) -> (i32, Vec<u8>, Vec<u8>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (code, out, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_keys_map_to_flags() {
        let cmd = Cli::command();
        let sub = cmd.find_subcommand("cgt").unwrap();
        let given = sub.clone().try_get_matches_from(["cgt", "--seed", "3"]).unwrap();
        let cfg = serde_json::json!({"n": [10, 20], "k": 2, "seed": 9, "trace": true, "strict": false});
        let flags: Vec<String> = config_flags(&cfg, sub, &given)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(flags, ["--k=2", "--n=10,20", "--trace"]);
        assert!(config_flags(&serde_json::json!({"bogus": 1}), sub, &given).is_err());
        assert!(config_flags(&serde_json::json!({"config": "x"}), sub, &given).is_err());
        assert!(config_flags(&serde_json::json!([1]), sub, &given).is_err());
    }
}
