use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "pin-lab",
    version,
    about = "Quasipinning analysis of the N-Harmonium ground state"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model parameters at one coupling.
    Model(ModelArgs),
    /// Inspect or validate constraint catalogs.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Natural occupation numbers at one coupling.
    Nons(NonsArgs),
    /// Pinning analysis at one coupling.
    Pin(PinArgs),
    /// Pinning analysis over a logarithmic κ grid.
    Sweep(SweepArgs),
    /// Leading weak-coupling coefficient of a quantity in δ.
    FitWeak(FitArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// Parse and check a catalog file.
    Validate { file: PathBuf },
    /// Print a builtin catalog, or a file with --file.
    Show {
        n_particles: Option<usize>,
        dim: Option<usize>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Structured,
}

#[derive(Debug, Clone, Args)]
pub struct Coupling {
    /// Particle number.
    #[arg(long = "N")]
    pub n: usize,
    /// Coupling κ as a decimal literal.
    #[arg(long, conflicts_with = "delta", allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Coupling δ = ln(l/l̃) as a decimal literal.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long = "precision-bits", default_value_t = 64)]
    pub precision_bits: u32,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct NonsArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, default_value_t = 1e-12)]
    pub tail: f64,
    /// Number of occupation numbers to print; all when omitted.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PinArgs {
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, default_value_t = 1e-12)]
    pub tail: f64,
    /// External catalog file; repeatable.
    #[arg(long = "catalog")]
    pub catalogs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "N")]
    pub n: usize,
    /// Logarithmic grid `MIN:MAX:POINTS`.
    #[arg(long)]
    pub kappa: String,
    #[arg(long, default_value_t = 1e-12)]
    pub tail: f64,
    #[arg(long = "catalog")]
    pub catalogs: Vec<PathBuf>,
    #[arg(long = "precision-bits", default_value_t = 64)]
    pub precision_bits: u32,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long = "out-csv")]
    pub out_csv: Option<PathBuf>,
    #[arg(long = "out-svg")]
    pub out_svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long = "N")]
    pub n: usize,
    /// `dmin`, `one-minus:I`, `lambda:I` or `hf-distance`.
    #[arg(long)]
    pub quantity: String,
    /// δ grid `MIN:MAX:POINTS`, linear.
    #[arg(long)]
    pub delta: Option<String>,
    /// Highest even power in the fit; 2N + 8 when omitted.
    #[arg(long = "max-order")]
    pub max_order: Option<u32>,
    #[arg(long = "catalog")]
    pub catalogs: Vec<PathBuf>,
    #[arg(long = "precision-bits", default_value_t = 256)]
    pub precision_bits: u32,
    #[arg(long)]
    pub tail: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write the samples as CSV.
    #[arg(long = "out-csv")]
    pub out_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Structured)]
    pub format: Format,
}
