//! Batch front end for pinlab: single-point analyses, κ sweeps, catalog
//! management and weak-coupling fits.

pub mod args;
pub mod catalogs;
pub mod commands;
mod error;
pub mod svg;

use std::io::Write;

pub use error::CliError;

use args::{Cli, Command};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Model(a) => commands::cmd_model(a, out),
        Command::Catalog { action } => commands::cmd_catalog(action, out),
        Command::Nons(a) => commands::cmd_nons(a, out),
        Command::Pin(a) => commands::cmd_pin(a, out),
        Command::Sweep(a) => commands::cmd_sweep(a, out),
        Command::FitWeak(a) => commands::cmd_fit_weak(a, out),
    }
}
