//! Command runner behind the `kvar` binary.

mod commands;
pub mod record;
mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use kvar::gfq::TowerLimits;
use kvar::quotient::{OracleBudget, OracleMode};

pub use record::{render, Format, Record, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Seed used by the randomized checks unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 20_251_016;

#[derive(Debug, Parser)]
#[command(name = "kvar", version, about = "Quotient classes, nearby fibers and point-count checks")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Largest absolute degree of a counting field.
    #[arg(long, default_value_t = 64)]
    pub max_field_degree: usize,
    /// Largest number of points walked by enumeration.
    #[arg(long, default_value_t = 1 << 22)]
    pub max_points: u64,
    /// Largest characteristic accepted in towers.
    #[arg(long, default_value_t = 13)]
    pub max_characteristic: u32,
}

impl BudgetArgs {
    pub fn oracle(&self) -> OracleBudget {
        OracleBudget { max_field_degree: self.max_field_degree, max_points: self.max_points }
    }

    pub fn tower(&self) -> TowerLimits {
        TowerLimits { max_characteristic: self.max_characteristic, max_degree: self.max_field_degree }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.max_field_degree == 0 || self.max_points == 0 || self.max_characteristic < 2 {
            return Err(CliError::Parse("budget limits must be positive".into()));
        }
        Ok(())
    }
}

impl Default for BudgetArgs {
    fn default() -> Self {
        BudgetArgs { max_field_degree: 64, max_points: 1 << 22, max_characteristic: 13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Burnside,
    Enumerate,
}

impl From<ModeArg> for OracleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Burnside => OracleMode::Burnside,
            ModeArg::Enumerate => OracleMode::Enumerate,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// [V/G] with its descent trace.
    QuotientClass {
        action: PathBuf,
        #[arg(long)]
        emit_trace: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Generator of the invariant ring of a one-dimensional action.
    InvariantRing {
        action: PathBuf,
        #[arg(long)]
        emit_trace: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Number of F_{q^m}-points of the quotient, by orbit counting.
    PointCount {
        action: PathBuf,
        #[arg(long = "m", default_values_t = [1u32, 2])]
        m: Vec<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Burnside)]
        mode: ModeArg,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Hypothesis checks of an action file.
    ValidateAction {
        action: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// S_f and S_f/mu of a model.
    NearbyFiber { model: PathBuf },
    /// R(f) of a model.
    MotivicReduction { model: PathBuf },
    /// Compares S_f/mu mod L with R(f).
    CongruenceCheck { model: PathBuf },
    /// Point-count or Hodge-Deligne realization of a class or a model.
    Realize {
        #[arg(long, conflicts_with = "class", required_unless_present = "class")]
        model: Option<PathBuf>,
        /// Class expression, e.g. "2*L - 1 + [E]".
        #[arg(long)]
        class: Option<String>,
        /// Ring of the class expression.
        #[arg(long, default_value = "K0")]
        tag: String,
        /// Count points over F_q.
        #[arg(long, conflicts_with = "hd", required_unless_present = "hd")]
        q: Option<u64>,
        /// Hodge-Deligne polynomial, L -> uv.
        #[arg(long)]
        hd: bool,
        /// NAME=EXPR, an image for a symbol given as a polynomial in L.
        #[arg(long = "symbol")]
        symbols: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Runs the bundled actions and models through every check.
    VerifyCatalog {
        /// Directory of action files instead of the bundled catalog.
        #[arg(long)]
        actions: Option<PathBuf>,
        /// Directory of models that must satisfy the congruence.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Directory of models that must fail it.
        #[arg(long)]
        mutated: Option<PathBuf>,
        /// Number of randomized samples per property.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Writes the bundled actions and models to a directory.
    ExportCatalog { dir: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Parse(String),
    Budget(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Failed(_) => EXIT_CHECK_FAILED,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(s) | CliError::Budget(s) | CliError::Failed(s) => s,
        }
    }
}

/// Records plus the exit status they imply.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub exit: i32,
}

impl Outcome {
    fn from_records(records: Vec<Record>) -> Self {
        let exit = if records.iter().any(|r| matches!(r.status, Status::Fail | Status::Error)) { EXIT_CHECK_FAILED } else { EXIT_OK };
        Outcome { records, exit }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let (name, result) = match &cli.command {
        Command::QuotientClass { action, emit_trace, budget } => ("quotient-class", budget.validate().and_then(|_| commands::quotient_class(action, *emit_trace, budget))),
        Command::InvariantRing { action, emit_trace, budget } => ("invariant-ring", budget.validate().and_then(|_| commands::invariant_ring(action, *emit_trace, budget))),
        Command::PointCount { action, m, mode, budget } => ("point-count", budget.validate().and_then(|_| commands::point_count(action, m, (*mode).into(), budget))),
        Command::ValidateAction { action, budget } => ("validate-action", budget.validate().and_then(|_| commands::validate_action(action, budget))),
        Command::NearbyFiber { model } => ("nearby-fiber", commands::nearby_fiber(model)),
        Command::MotivicReduction { model } => ("motivic-reduction", commands::motivic_reduction(model)),
        Command::CongruenceCheck { model } => ("congruence-check", commands::congruence_check(model)),
        Command::Realize { model, class, tag, q, hd, symbols, budget } => (
            "realize",
            budget.validate().and_then(|_| commands::realize(model.as_deref(), class.as_deref(), tag, *q, *hd, symbols, budget)),
        ),
        Command::VerifyCatalog { actions, models, mutated, samples, budget } => (
            "verify-catalog",
            budget.validate().and_then(|_| {
                verify::verify_catalog(&verify::VerifyConfig {
                    actions: actions.clone(),
                    models: models.clone(),
                    mutated: mutated.clone(),
                    samples: *samples,
                    seed: cli.seed,
                    budget: budget.clone(),
                })
            }),
        ),
        Command::ExportCatalog { dir } => ("export-catalog", commands::export_catalog(dir)),
    };
    match result {
        Ok(records) => Outcome::from_records(records),
        Err(e) => Outcome {
            records: vec![Record::new(name, "", Status::Error).with("error", e.message())],
            exit: e.exit_code(),
        },
    }
}
