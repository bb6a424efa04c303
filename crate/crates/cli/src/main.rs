//! `nmlkit`: default and autoepistemic reasoning, MSO encodings and treewidth
//! tools from the command line.
//!
//! Exit codes: 0 when a result was computed (whatever the verdict), 2 for
//! usage, I/O and parse errors, 3 when a resource limit stopped the run.

mod bench;
mod commands;
mod error;
mod gen;
mod report;
mod tw;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nmlkit_core::limits::Limits;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::Context;

#[derive(Parser)]
#[command(
    name = "nmlkit",
    version,
    about = "Treewidth-based reasoning for default and autoepistemic logic"
)]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propositional satisfiability and implication.
    #[command(subcommand)]
    Fmt(FmtCommand),
    /// Stable extensions of default theories.
    #[command(subcommand)]
    Dl(DlCommand),
    /// Stable expansions of autoepistemic theories.
    #[command(subcommand)]
    Ael(AelCommand),
    /// Relational structures built from formulas and theories.
    #[command(name = "struct", subcommand)]
    Struct(StructCommand),
    /// Tree decompositions.
    #[command(subcommand)]
    Tw(tw::TwCommand),
    /// Instance families.
    #[command(subcommand)]
    Gen(gen::GenCommand),
    /// MSO model checking.
    #[command(subcommand)]
    Mso(MsoCommand),
    /// Run the acceptance checks and invariant sweeps.
    VerifyPaper(VerifyArgs),
    /// Time solvers on an instance family and emit CSV.
    Bench(bench::BenchArgs),
}

#[derive(Subcommand)]
enum FmtCommand {
    /// Satisfiability of a `.fs` formula set.
    CheckSat(CheckSatArgs),
    /// Whether the premises of an `.imp` file entail every conclusion.
    CheckImp(CheckImpArgs),
}

#[derive(Args)]
struct BasisArg {
    /// Comma separated connectives, e.g. `not,and,or` (default: all).
    #[arg(long)]
    basis: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SatMethod {
    Brute,
    Dp,
}

#[derive(Args)]
struct CheckSatArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "brute")]
    method: SatMethod,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Args)]
struct CheckImpArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "brute")]
    method: SatMethod,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Brute,
    Twdp,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Corrected,
    AsPrinted,
}

#[derive(Subcommand)]
enum DlCommand {
    Solve(DlSolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DlMethod {
    Enum,
    Mso,
}

#[derive(Args)]
struct DlSolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "enum")]
    method: DlMethod,
    #[arg(long, value_enum, default_value = "twdp")]
    oracle: OracleArg,
    /// Formula variant for `--method mso`.
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Subcommand)]
enum AelCommand {
    Solve(AelSolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AelMethod {
    Fullsets,
    Mso,
}

#[derive(Args)]
struct AelSolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "fullsets")]
    method: AelMethod,
    #[arg(long, value_enum, default_value = "twdp")]
    oracle: OracleArg,
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// `.fs` formula set.
    Prop,
    /// `.imp` premises and conclusions.
    Imp,
    /// `.dt` default theory.
    Dl,
    /// `.ae` autoepistemic theory.
    Ae,
}

#[derive(Subcommand)]
enum StructCommand {
    /// Build the structure of an input file.
    Build(StructBuildArgs),
}

#[derive(Args)]
struct StructBuildArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Print the Gaifman graph in `.gr` format, with labels as comments.
    #[arg(long)]
    gaifman: bool,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Subcommand)]
enum MsoCommand {
    /// Evaluate a closed MSO sentence on the structure of an input file.
    Eval(MsoEvalArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("sentence").required(true))]
struct MsoEvalArgs {
    file: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// One of struc, sat, imp, extension, full_exists.
    #[arg(long, group = "sentence")]
    paper: Option<String>,
    /// Sentence text, e.g. `E X. A x. (x in X -> var(x))`.
    #[arg(long, group = "sentence")]
    formula: Option<String>,
    /// File holding the sentence text.
    #[arg(long, group = "sentence")]
    formula_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    /// Include the sentence text in the output.
    #[arg(long)]
    show: bool,
    #[command(flatten)]
    basis: BasisArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Smaller samples.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Skip the invariant sweeps.
    #[arg(long)]
    criteria_only: bool,
}

fn dispatch(command: Command, ctx: &mut Context) -> Result<Output, CliError> {
    match command {
        Command::Fmt(FmtCommand::CheckSat(a)) => commands::check_sat(ctx, &a),
        Command::Fmt(FmtCommand::CheckImp(a)) => commands::check_imp(ctx, &a),
        Command::Dl(DlCommand::Solve(a)) => commands::dl_solve(ctx, &a),
        Command::Ael(AelCommand::Solve(a)) => commands::ael_solve(ctx, &a),
        Command::Struct(StructCommand::Build(a)) => commands::struct_build(ctx, &a),
        Command::Mso(MsoCommand::Eval(a)) => commands::mso_eval(ctx, &a),
        Command::Tw(c) => tw::run(ctx, c),
        Command::Gen(c) => gen::run(ctx, c),
        Command::VerifyPaper(a) => commands::verify_paper(ctx, &a),
        Command::Bench(a) => bench::run(ctx, &a),
    }
}

/// What a command computed: the JSON fields and the text rendering.
pub struct Output {
    pub json: Value,
    pub text: String,
}

/// Writes to stdout, ignoring a closed pipe (`nmlkit … | head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let limits = match Limits::from_env() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // Echo the command as `nmlkit …` whatever path it was invoked through.
    let mut echo = argv;
    echo[0] = "nmlkit".into();
    let mut ctx = Context::new(echo, limits);
    let outcome = dispatch(cli.command, &mut ctx);
    match outcome {
        Ok(out) => {
            if cli.json {
                let report = ctx.report(out.json, Vec::new());
                emit(&format!(
                    "{}\n",
                    serde_json::to_string(&report).expect("reports serialise")
                ));
            } else {
                emit(&out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if cli.json {
                let hit = if e.is_resource_limit() {
                    vec![e.to_string()]
                } else {
                    Vec::new()
                };
                let report = ctx.report(json!({ "error": e.to_string() }), hit);
                emit(&format!(
                    "{}\n",
                    serde_json::to_string(&report).expect("reports serialise")
                ));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
