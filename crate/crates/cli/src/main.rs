mod commands;
mod source;
mod table;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::source::SourceArgs;

#[derive(Parser, Debug)]
#[command(name = "cwtoric", version, about = "Homology, logical algebra and anyon phases of Kitaev models on CW complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Cyclic factor orders of the coefficient group, e.g. `2` or `2,3`.
    #[arg(long = "G", value_delimiter = ',', default_value = "2")]
    pub group: Vec<u64>,
    /// Starting truncation depth for stabilization.
    #[arg(long, default_value_t = cwtoric_core::homology::DEFAULT_DEPTH)]
    pub depth: usize,
    #[arg(long, default_value_t = cwtoric_core::homology::MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check incidence and attachment consistency.
    Validate(ValidateArgs),
    /// Ordinary, locally finite and at-infinity (co)homology.
    Homology(HomologyArgs),
    /// Logical algebra of the degree-n model.
    Logical(LogicalArgs),
    /// Star and plaquette parity checks.
    Stabilizers(StabilizerArgs),
    /// Charge sectors, and the data of a given excitation.
    Charges(ChargeArgs),
    /// Braiding and twist phases.
    Braid(BraidArgs),
    /// Brute-force cross-checks on a small finite complex.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Homology,
    Cohomology,
    LfHomology,
    LfCohomology,
    AtInfinity,
    CohomologyAtInfinity,
}

#[derive(Args, Debug)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Only this group (all six when absent).
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Only this dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Shorthand for `--kind at-infinity --dim K`.
    #[arg(long, conflicts_with_all = ["kind", "dim"])]
    pub dim_at_infinity: Option<usize>,
    /// Include generator representatives.
    #[arg(long)]
    pub generators: bool,
}

#[derive(Args, Debug)]
pub struct LogicalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct StabilizerArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Write one `.pcm` file per check type and cyclic factor here.
    #[arg(long)]
    pub out_dir: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct ChargeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Excitation file `{"gamma": ..., "delta": ...}` in the chains format.
    #[arg(long)]
    pub excitation: Option<std::path::PathBuf>,
    /// Radius budget for the ground-state test.
    #[arg(long, default_value_t = cwtoric_core::excitations::DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Args, Debug)]
pub struct BraidArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Explicit excitations and transport data
    /// `{"x1", "x2", "t1", "t2"}`; required outside `product_with_plane`.
    #[arg(long)]
    pub data: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Homology(a) => commands::homology(a),
        Command::Logical(a) => commands::logical(a),
        Command::Stabilizers(a) => commands::stabilizers(a),
        Command::Charges(a) => commands::charges(a),
        Command::Braid(a) => commands::braid(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.message() } });
            eprintln!("{}", serde_json::to_string_pretty(&body).expect("json"));
            ExitCode::from(1)
        }
    }
}
