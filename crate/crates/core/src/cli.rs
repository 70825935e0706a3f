//! Command-line front end. [`run_cli`] returns the exit status and the text
//! to print so the binary stays a thin wrapper.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::chase::{chase, check_kds, consistency_of};
use crate::classify::classify;
use crate::emit::{metrics, to_datalog, to_sql, TableMap};
use crate::error::Error;
use crate::normalize::normalize;
use crate::parser::{parse_program, Program};
use crate::rewrite::{rewrite, RewriteOptions, Rewriting, StepKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ontorew",
    version,
    about = "Rewrite conjunctive queries under existential rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize, classify and rewrite a query into a union of CQs.
    Rewrite(RewriteArgs),
    /// Report linear, guarded and sticky membership.
    Check {
        #[arg(long)]
        ontology: PathBuf,
    },
    /// Chase a database and print the resulting instance.
    Chase(ChaseArgs),
    /// Rewrite with a derivation trace and per-CQ provenance.
    Explain {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        query: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Ucq,
    Sql,
    Datalog,
}

#[derive(Debug, Args)]
struct RewriteArgs {
    #[arg(long)]
    ontology: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, value_enum, default_value = "off")]
    elimination: Switch,
    #[arg(long, value_enum, default_value = "on")]
    factorization: Switch,
    #[arg(long = "nc-pruning", value_enum, default_value = "on")]
    nc_pruning: Switch,
    #[arg(long = "max-rounds")]
    max_rounds: Option<usize>,
    #[arg(long, value_enum, default_value = "ucq")]
    emit: Emit,
    #[arg(long)]
    metrics: bool,
    #[arg(long)]
    trace: bool,
    /// Also report queries over predicates introduced by normalization.
    #[arg(long = "keep-auxiliary")]
    keep_auxiliary: bool,
}

#[derive(Debug, Args)]
struct ChaseArgs {
    #[arg(long)]
    ontology: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    consistency: bool,
    #[arg(long)]
    kds: bool,
}

/// Exit status and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> Self {
        CliOutput {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn failure(err: &Error) -> Self {
        let code = match err {
            Error::NoTerminationGuarantee { .. }
            | Error::EliminationRequiresLinear { .. }
            | Error::StickyJoinUnsupported => EXIT_REFUSED,
            _ => EXIT_USAGE,
        };
        CliOutput {
            code,
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        }
    }
}

fn load(path: &Path) -> Result<Program, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| match e {
        Error::Syntax { line, column, message } => Error::Syntax {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Parses both files and rewrites, returning the rewriting and the schema
/// of the normalized rules.
fn run_rewrite(ontology: &Path, query: &Path, options: RewriteOptions) -> Result<(Rewriting, Program), Error> {
    let mut program = load(ontology)?;
    let queries = load(query)?;
    let q = queries.query()?.clone();
    program.schema.declare_atoms(q.body())?;
    let (rules, schema) = normalize(&program.tgds, &program.schema);
    let result = rewrite(&q, &rules, &program.ncs, &schema, options)?;
    program.schema = schema;
    program.tgds = rules;
    Ok((result, program))
}

fn rewrite_command(args: &RewriteArgs) -> Result<CliOutput, Error> {
    let options = RewriteOptions {
        factorization: args.factorization.on(),
        elimination: args.elimination.on(),
        nc_pruning: args.nc_pruning.on(),
        max_rounds: args.max_rounds,
        trace: args.trace,
        keep_auxiliary: args.keep_auxiliary,
    };
    let (result, program) = run_rewrite(&args.ontology, &args.query, options)?;
    let mut out = String::new();
    for line in &result.trace {
        writeln!(out, "{line}").expect("write to string");
    }
    match args.emit {
        Emit::Ucq => {
            for q in &result.queries {
                writeln!(out, "{q}").expect("write to string");
            }
        }
        Emit::Datalog => out.push_str(&to_datalog(&result.queries)),
        Emit::Sql => {
            out.push_str(&to_sql(&result.queries, &TableMap::from_schema(&program.schema))?);
            out.push('\n');
        }
    }
    if args.metrics {
        writeln!(out, "{}", metrics(&result.queries)).expect("write to string");
    }
    let mut output = CliOutput::ok(out);
    if !result.complete {
        output.code = EXIT_INCOMPLETE;
        output.stderr = format!(
            "warning: stopped after {} rounds; the rewriting may be incomplete\n",
            result.state.rounds
        );
    }
    Ok(output)
}

fn check_command(ontology: &Path) -> Result<CliOutput, Error> {
    let program = load(ontology)?;
    Ok(CliOutput::ok(classify(&program.tgds).to_string()))
}

fn chase_command(args: &ChaseArgs) -> Result<CliOutput, Error> {
    let program = load(&args.ontology)?;
    let data = load(&args.data)?;
    let result = chase(&data.facts, &program.tgds, args.depth);
    let mut out = result.instance.to_string();
    writeln!(out, "saturated={} rounds={}", result.saturated, result.rounds_used).expect("write to string");
    if args.consistency {
        writeln!(out, "consistency={}", consistency_of(&result, &program.ncs)).expect("write to string");
    }
    if args.kds {
        let kds: Vec<_> = program.kds.iter().chain(&data.kds).cloned().collect();
        let verdict = if check_kds(&data.facts, &kds) {
            "satisfied"
        } else {
            "violated"
        };
        writeln!(out, "kds={verdict}").expect("write to string");
    }
    let mut output = CliOutput::ok(out);
    if !result.saturated {
        output.code = EXIT_INCOMPLETE;
    }
    Ok(output)
}

fn explain_command(ontology: &Path, query: &Path) -> Result<CliOutput, Error> {
    let options = RewriteOptions {
        trace: true,
        ..RewriteOptions::default()
    };
    let (result, _) = run_rewrite(ontology, query, options)?;
    let mut out = String::new();
    for line in &result.trace {
        writeln!(out, "{line}").expect("write to string");
    }
    for (q, id) in result.queries.iter().zip(result.output_ids()) {
        writeln!(out, "{q}").expect("write to string");
        for d in result.state.provenance(id) {
            let verb = match d.kind {
                StepKind::Factorize => "factorized",
                StepKind::Rewrite => "rewritten",
            };
            writeln!(
                out,
                "  {verb} by {} from {}",
                d.rule,
                result.state.entries()[d.parent].key
            )
            .expect("write to string");
        }
    }
    let mut output = CliOutput::ok(out);
    if !result.complete {
        output.code = EXIT_INCOMPLETE;
    }
    Ok(output)
}

/// Runs one invocation. `args` includes the program name.
pub fn run_cli<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutput::ok(text)
            };
        }
    };
    let result = match &cli.command {
        Command::Rewrite(args) => rewrite_command(args),
        Command::Check { ontology } => check_command(ontology),
        Command::Chase(args) => chase_command(args),
        Command::Explain { ontology, query } => explain_command(ontology, query),
    };
    result.unwrap_or_else(|e| CliOutput::failure(&e))
}
