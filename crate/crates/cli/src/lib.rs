//! Command-line front end: argument model and subcommand implementations.
//!
//! Each `cmd_*` function returns the text for standard output, so the
//! binary only has to print and map errors to exit codes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use sparqlprov::provenance::{
    apply_trust, count_check_with, run_counts, run_provenance, write_check_tsv, write_counts_json, write_counts_tsv,
    write_json, write_tsv, TrustAssignment,
};
use sparqlprov::{parse_nquads, parse_query, translate_query, Dataset, Query, RAExpr};

#[derive(Debug, Parser)]
#[command(name = "sparqlprov", version, about = "How-provenance for SPARQL queries over N-Quads data")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a query and print each answer with its annotation
    Run(RunArgs),
    /// Print the relational algebra translation of a query
    Translate(QueryArgs),
    /// Print the parsed query as an s-expression
    Parse(QueryArgs),
    /// Compare translated multiplicities with the reference evaluator
    Check(InputArgs),
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// SPARQL query file
    #[arg(long)]
    pub query: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// N-Quads data file
    #[arg(long)]
    pub data: PathBuf,
    /// SPARQL query file
    #[arg(long)]
    pub query: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = SemiringKind::Free)]
    pub semiring: SemiringKind,
    /// Trust values such as `t3=0,g0=1`; unlisted identifiers are trusted
    #[arg(long, value_delimiter = ',', value_parser = parse_trust_entry)]
    pub trust: Vec<(String, bool)>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SemiringKind {
    Free,
    Bool,
    Nat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: sparqlprov::Error },
    #[error("--trust only applies with --semiring bool")]
    TrustWithoutBool,
    #[error(transparent)]
    Engine(#[from] sparqlprov::Error),
    #[error("{0} row(s) differ between the translation and the reference evaluator")]
    Mismatch(usize),
}

impl CliError {
    /// 2 for I/O failures, 1 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn parse_trust_entry(s: &str) -> Result<(String, bool), String> {
    match s.split_once('=') {
        Some((id, "0")) if !id.is_empty() => Ok((id.to_string(), false)),
        Some((id, "1")) if !id.is_empty() => Ok((id.to_string(), true)),
        _ => Err(format!("expected id=0 or id=1, got '{s}'")),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load_query(path: &Path) -> Result<Query, CliError> {
    parse_query(&read(path)?).map_err(|e| CliError::Input { path: path.to_path_buf(), source: e.into() })
}

pub fn load_data(path: &Path) -> Result<Dataset, CliError> {
    parse_nquads(&read(path)?).map_err(|e| CliError::Input { path: path.to_path_buf(), source: e.into() })
}

pub fn cmd_run(args: &RunArgs) -> Result<String, CliError> {
    if !args.trust.is_empty() && args.semiring != SemiringKind::Bool {
        return Err(CliError::TrustWithoutBool);
    }
    let q = load_query(&args.input.query)?;
    let d = load_data(&args.input.data)?;
    if args.semiring == SemiringKind::Nat {
        let r = run_counts(&q, &d)?;
        return Ok(match args.format {
            Format::Tsv => write_counts_tsv(&r),
            Format::Json => write_counts_json(&r),
        });
    }
    let r = run_provenance(&q, &d)?;
    let trust = (args.semiring == SemiringKind::Bool).then(|| {
        let ta = args.trust.iter().fold(TrustAssignment::default(), |ta, (id, t)| ta.set(id.clone(), *t));
        apply_trust(&r, &ta).into_iter().map(|(_, t)| t).collect::<Vec<_>>()
    });
    Ok(match args.format {
        Format::Tsv => write_tsv(&r, trust.as_deref()),
        Format::Json => write_json(&r, trust.as_deref()),
    })
}

pub fn cmd_translate(args: &QueryArgs) -> Result<String, CliError> {
    let q = load_query(&args.query)?;
    Ok(translate_query(&q).map_err(sparqlprov::Error::from)?.to_tree_string())
}

pub fn cmd_parse(args: &QueryArgs) -> Result<String, CliError> {
    Ok(sparqlprov::sparql::to_sexpr(&load_query(&args.query)?))
}

/// Result of `check`: the per-row report, and whether every row agreed.
#[derive(Debug)]
pub struct CheckOutcome {
    pub report: String,
    pub mismatches: usize,
}

impl CheckOutcome {
    pub fn into_result(self) -> (String, Result<(), CliError>) {
        let status = if self.mismatches == 0 { Ok(()) } else { Err(CliError::Mismatch(self.mismatches)) };
        (self.report, status)
    }
}

pub fn cmd_check(args: &InputArgs) -> Result<CheckOutcome, CliError> {
    cmd_check_with(args, |q| translate_query(q).map_err(Into::into))
}

/// `check` with a caller-supplied translator.
pub fn cmd_check_with(
    args: &InputArgs,
    translate: impl Fn(&Query) -> sparqlprov::Result<RAExpr>,
) -> Result<CheckOutcome, CliError> {
    let q = load_query(&args.query)?;
    let d = load_data(&args.data)?;
    let report = count_check_with(&q, &d, &translate(&q)?)?;
    Ok(CheckOutcome { report: write_check_tsv(&report), mismatches: report.mismatches().count() })
}

/// Runs a parsed command line, returning standard output text or the
/// error to report.
pub fn execute(cfg: &CliConfig) -> (String, Result<(), CliError>) {
    let done = |r: Result<String, CliError>| match r {
        Ok(s) => (s, Ok(())),
        Err(e) => (String::new(), Err(e)),
    };
    match &cfg.command {
        Command::Run(a) => done(cmd_run(a)),
        Command::Translate(a) => done(cmd_translate(a)),
        Command::Parse(a) => done(cmd_parse(a)),
        Command::Check(a) => match cmd_check(a) {
            Ok(outcome) => outcome.into_result(),
            Err(e) => (String::new(), Err(e)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trust_entries() {
        assert_eq!(parse_trust_entry("t3=0"), Ok(("t3".into(), false)));
        assert_eq!(parse_trust_entry("g0=1"), Ok(("g0".into(), true)));
        assert!(parse_trust_entry("t3").is_err());
        assert!(parse_trust_entry("=1").is_err());
        assert!(parse_trust_entry("t3=2").is_err());
    }

    #[test]
    fn trust_list_parses_commas() {
        let cfg = CliConfig::try_parse_from([
            "sparqlprov",
            "run",
            "--data",
            "d",
            "--query",
            "q",
            "--semiring",
            "bool",
            "--trust",
            "t3=0,g0=1",
        ])
        .unwrap();
        let Command::Run(a) = cfg.command else { panic!("expected run") };
        assert_eq!(a.trust, [("t3".to_string(), false), ("g0".to_string(), true)]);
    }

    #[test]
    fn run_requires_data() {
        assert!(CliConfig::try_parse_from(["sparqlprov", "run", "--query", "q"]).is_err());
        assert!(CliConfig::try_parse_from(["sparqlprov", "parse", "--query", "q"]).is_ok());
    }

    #[test]
    fn exit_codes() {
        let io = CliError::Io { path: "x".into(), source: io::Error::from(io::ErrorKind::NotFound) };
        assert_eq!(io.exit_code(), 2);
        assert_eq!(CliError::Mismatch(1).exit_code(), 1);
        assert_eq!(CliError::TrustWithoutBool.exit_code(), 1);
    }
}
