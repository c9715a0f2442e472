//! `taukernel`: datasets, plots and identity checks from the command line.
//!
//! Exit codes: 0 pass, 1 numeric failure, 2 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use taukernel_core::Error;

use config::Options;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::InvalidParameter(_) | Error::Grid(_) | Error::Unsupported(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "taukernel", version, about = "Tau functions of Hankel operators and their identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Phase S(x;t) on a grid and the sinh-Gordon residual.
    SinhGordon,
    /// det(I +- Gamma) of a shifted scattering function along x.
    Tau,
    /// Hankel determinants D_n(s) of y^alpha e^{-y - s/y}.
    HankelDet,
    /// Closed-form equilibrium density sigma_0 and its endpoints.
    Equilibrium,
    /// Laguerre integrable kernel against its sum of Hankel products.
    HankelProduct,
    /// Stationary KdV recurrence residuals.
    Kdv,
    /// Runs the identity-check suite.
    Verify,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.options.resolve().and_then(|o| match cli.command {
        Command::SinhGordon => commands::sinh_gordon(&o),
        Command::Tau => commands::tau(&o),
        Command::HankelDet => commands::hankel_det_cmd(&o),
        Command::Equilibrium => commands::equilibrium(&o),
        Command::HankelProduct => commands::hankel_product(&o),
        Command::Kdv => commands::kdv(&o),
        Command::Verify => commands::verify_cmd(&o),
    });
    match result {
        Ok(out) => {
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(1)
        }
    }
}
