use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qflow::{cmd_const, cmd_gamma, cmd_jko, cmd_verify, CliError, HGrid, RunConfig, Scope, Statement, VerifyOptions};

#[derive(Parser)]
#[command(name = "qflow", version, about = "q-Gaussian gradient-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    All,
    Qmath,
    Qgaussian,
    Functionals,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence table of a rescaled J_h functional as h → 0.
    Gamma {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        statement: u8,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu0: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long)]
        sigma: f64,
        /// Geometric grid START:STOP:N with START > STOP > 0.
        #[arg(long, default_value = "1e-1:1e-6:11")]
        h_grid: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimising-movement trajectory against the exact flow.
    Jko {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu0: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closed forms against quadrature; exit status 1 on any failure.
    Verify {
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        tail_mass_bound: Option<f64>,
        #[arg(long, hide = true, allow_negative_numbers = true)]
        inject_c0_perturbation: Option<f64>,
    },
    /// Print the q-dependent constants as JSON.
    Const {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Gamma {
            statement,
            q,
            sigma0,
            mu0,
            mu,
            sigma,
            h_grid,
            format,
            out,
        } => {
            let mut cfg = RunConfig::new(q, sigma0, mu0, mu, sigma);
            cfg.h_grid = h_grid.parse::<HGrid>()?;
            let table = cmd_gamma(Statement::try_from(statement)?, &cfg)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json()?,
            };
            emit(&text, out)?;
        }
        Command::Jko {
            q,
            sigma0,
            mu0,
            h,
            steps,
            format,
            out,
        } => {
            let table = cmd_jko(q, sigma0, mu0, h, steps)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json()?,
            };
            emit(&text, out)?;
        }
        Command::Verify {
            scope,
            rel_tol,
            tail_mass_bound,
            inject_c0_perturbation,
        } => {
            let mut opts = VerifyOptions {
                scope: match scope {
                    ScopeArg::All => Scope::All,
                    ScopeArg::Qmath => Scope::Qmath,
                    ScopeArg::Qgaussian => Scope::Qgaussian,
                    ScopeArg::Functionals => Scope::Functionals,
                },
                c0_perturbation: inject_c0_perturbation,
                ..Default::default()
            };
            if let Some(t) = rel_tol {
                opts.quadrature.rel_tol = t;
            }
            if let Some(t) = tail_mass_bound {
                opts.quadrature.tail_mass_bound = t;
            }
            let report = cmd_verify(opts)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(&text, None)?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Const { q, d } => emit(&cmd_const(q, d)?, None)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
