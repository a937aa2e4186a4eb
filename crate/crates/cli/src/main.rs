mod commands;
mod seqfile;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use uhatforge::error::{Error, Result};
use uhatforge::Caps;

use commands::{CompileArgs, EquivArgs, LowerArgs, Outcome};

/// Compile temporal formulas to hard-attention transformers, lower them to
/// polynomial constraints and rationalize the result.
#[derive(Parser)]
#[command(name = "uhatforge", version)]
struct Cli {
    /// Output style for reports.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a sequence file.
    Eval {
        formula: PathBuf,
        sequence: PathBuf,
        /// Vector width; defaults to the width of the sequence rows.
        #[arg(long)]
        dim: Option<usize>,
        /// Extra positional predicates (JSON registry).
        #[arg(long)]
        preds: Option<PathBuf>,
    },
    /// Compile a formula to a machine file.
    Compile {
        formula: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        preds: Option<PathBuf>,
        /// Compare the machine with the formula on this many random sequences.
        #[arg(long, default_value_t = 0)]
        self_check: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the output rows of a machine.
    Run { uhat: PathBuf, sequence: PathBuf },
    /// Decide acceptance; exit status 0 accepts, 1 rejects.
    Accepts { uhat: PathBuf, sequence: PathBuf },
    /// Lower a machine at a fixed length to a constraint file.
    Lower {
        uhat: PathBuf,
        #[arg(long)]
        n: usize,
        /// Keep only the first K layers; requires --accept-vector.
        #[arg(long, value_name = "K")]
        layers: Option<usize>,
        /// Acceptance vector overriding the one stored in the machine.
        #[arg(long)]
        accept_vector: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a machine with a constraint on random and grid inputs.
    CheckEquiv {
        uhat: PathBuf,
        pc: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also test every input with integer entries in [-G, G].
        #[arg(long)]
        grid: Option<i64>,
        /// Same meaning as for `lower`.
        #[arg(long, value_name = "K")]
        layers: Option<usize>,
        #[arg(long)]
        accept_vector: Option<String>,
    },
    /// Replace irrational coefficients of a constraint by rational ones.
    Rationalize {
        pc: PathBuf,
        #[arg(long)]
        m: u64,
        /// Destination; the input file is rewritten when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the exhaustive comparison on small inputs.
        #[arg(long)]
        no_verify: bool,
    },
    /// List or write bundled machines and formulas.
    Examples {
        name: Option<String>,
        /// Output file, or a directory receiving every example when no name is given.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "sqrt2")]
        alpha: String,
        #[arg(long, default_value = "sqrt2")]
        beta: String,
    },
}

fn caps() -> Result<Caps> {
    match std::env::var("UHATFORGE_CAPS") {
        Ok(text) => Caps::default().parse_overrides(&text),
        Err(_) => Ok(Caps::default()),
    }
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Eval {
            formula,
            sequence,
            dim,
            preds,
        } => commands::eval(formula, sequence, *dim, preds.as_deref()),
        Command::Compile {
            formula,
            dim,
            out,
            preds,
            self_check,
            seed,
        } => commands::compile(&CompileArgs {
            formula,
            dim: *dim,
            preds: preds.as_deref(),
            out: out.as_deref(),
            self_check: *self_check,
            seed: *seed,
        }),
        Command::Run { uhat, sequence } => commands::run(uhat, sequence),
        Command::Accepts { uhat, sequence } => commands::accepts(uhat, sequence),
        Command::Lower {
            uhat,
            n,
            layers,
            accept_vector,
            out,
        } => commands::lower(
            &LowerArgs {
                uhat,
                n: *n,
                layers: *layers,
                accept: accept_vector.as_deref(),
                out: out.as_deref(),
            },
            &caps()?,
        ),
        Command::CheckEquiv {
            uhat,
            pc,
            n,
            samples,
            seed,
            grid,
            layers,
            accept_vector,
        } => commands::check_equiv(
            &EquivArgs {
                uhat,
                pc,
                n: *n,
                samples: *samples,
                seed: *seed,
                grid: *grid,
                layers: *layers,
                accept: accept_vector.as_deref(),
            },
            &caps()?,
        ),
        Command::Rationalize { pc, m, out, no_verify } => {
            commands::rationalize(pc, *m, out.as_deref(), !*no_verify, &caps()?)
        }
        Command::Examples { name, out, alpha, beta } => {
            commands::examples(name.as_deref(), out.as_deref(), alpha, beta)
        }
    }
}

fn error_code(e: &Error) -> u8 {
    if e.is_resource() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            let body = match cli.format {
                Format::Text => outcome.text,
                Format::Json => format!("{}\n", outcome.json),
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            let code = error_code(&e);
            match cli.format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", json!({"error": e.to_string(), "exit": code})),
            }
            ExitCode::from(code)
        }
    }
}
