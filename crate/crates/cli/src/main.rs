//! `blocktri`: command-line front end.
//!
//! Reports go to stdout as JSON; artifacts go to `--output`. Exit status is
//! 0 on success, 1 when a check ran and came out negative, 2 on usage or
//! input errors (with a `{code, message, context}` document on stdout).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use blocktri_core::io::{to_pretty, with_schema};
use blocktri_core::Field;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "blocktri",
    version,
    about = "Block-triangular factorizations of matrices over exact fields"
)]
pub struct Cli {
    /// Field for generated matrices; overrides the field of input matrices.
    #[arg(long, global = true, value_parser = parse_field)]
    pub field: Option<Field>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_field(s: &str) -> Result<Field, String> {
    s.parse().map_err(|e: blocktri_core::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Factor a 2n x 2n matrix into six block layers.
    Factor(FactorArgs),
    /// Check a factorization against a matrix.
    Verify(VerifyArgs),
    /// Write a determinant-one matrix as a commutator X⁻¹Y⁻¹XY.
    Commutator(InputArgs),
    /// Test diagonal blocks M₁, M₄ for a five-layer obstruction.
    Obstruct(ObstructArgs),
    /// Build a matrix known to need six layers, with its certificate.
    Witness(WitnessArgs),
    /// Check every bipartition of a diagonal matrix.
    Permsweep(PermsweepArgs),
    /// Exhaustive checks over SL4(GF(2)).
    Sl4gf2(Sl4gf2Args),
    /// Export a real matrix as a depth-six linear coupling network.
    ExportCoupling(ExportArgs),
    /// Generate a random matrix.
    Random(RandomArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct FactorArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Factor an invertible matrix with a final diagonal-scaling layer.
    #[arg(long)]
    pub gl: bool,
    /// Diagonal document for --gl; defaults to diag(det M, 1, ..., 1).
    #[arg(long, requires = "gl")]
    pub diag: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub factorization: PathBuf,
    /// Relative tolerance when either side is f64.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObstructMode {
    Trace,
    Spectra,
}

#[derive(Args, Debug)]
pub struct ObstructArgs {
    #[arg(long)]
    pub m1: PathBuf,
    #[arg(long)]
    pub m4: PathBuf,
    #[arg(long, value_enum, default_value_t = ObstructMode::Trace)]
    pub mode: ObstructMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Blockdiag,
    DiagPerm,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = WitnessKind::Blockdiag)]
    pub kind: WitnessKind,
    /// Also write the witness matrix here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PermsweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("check").required(true).args(["verify_lemma5", "find_nonrepresentable"])))]
pub struct Sl4gf2Args {
    /// Every element with invertible upper-right block is an LULUL product.
    #[arg(long)]
    pub verify_lemma5: bool,
    /// List the elements that need six layers.
    #[arg(long)]
    pub find_nonrepresentable: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reach-set cache; read when present, written otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiagStrategyArg {
    Corner,
    Balanced,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Volume-preserving network; needs det M = 1 exactly.
    #[arg(long)]
    pub nice: bool,
    #[arg(long, value_enum, default_value_t = DiagStrategyArg::Corner, conflicts_with = "nice")]
    pub diag_strategy: DiagStrategyArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    General,
    Invertible,
    Special,
}

#[derive(Args, Debug)]
pub struct RandomArgs {
    #[arg(long)]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = RandomKind::Special)]
    pub kind: RandomKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failure reported with exit status 2.
#[derive(Debug)]
pub struct Failure {
    pub code: String,
    pub message: String,
    pub context: Value,
}

impl Failure {
    pub fn new(code: impl Into<String>, message: impl Into<String>, context: Value) -> Failure {
        Failure {
            code: code.into(),
            message: message.into(),
            context,
        }
    }

    fn to_json(&self) -> Value {
        with_schema(json!({ "code": self.code, "message": self.message, "context": self.context }))
    }
}

/// Exit status plus the stdout report.
pub struct Outcome {
    pub status: u8,
    pub report: Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::new(
                "usage",
                e.to_string().trim_end(),
                json!({ "kind": format!("{:?}", e.kind()) }),
            );
            print!("{}", to_pretty(&failure.to_json()));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            print!("{}", to_pretty(&with_schema(outcome.report)));
            ExitCode::from(outcome.status)
        }
        Err(failure) => {
            print!("{}", to_pretty(&failure.to_json()));
            ExitCode::from(2)
        }
    }
}
