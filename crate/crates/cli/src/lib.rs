//! Experiment driver for the q-Gaussian gradient-flow library: convergence
//! tables for the rescaled `J_h` functionals, minimising-movement
//! trajectories, and the self-check suite.

pub mod config;
pub mod error;
pub mod format;
pub mod gamma;
pub mod jko;
pub mod table;
pub mod verify;

pub use config::{HGrid, OutputFormat, RunConfig};
pub use error::{CliError, CliResult};
pub use gamma::{cmd_gamma, Statement};
pub use jko::cmd_jko;
pub use table::{ConvergenceTable, JkoTable};
pub use verify::{cmd_verify, Scope, VerifyOptions, VerifyReport};

/// `QParams` of `(q, d)` as pretty JSON.
pub fn cmd_const(q: f64, d: u32) -> CliResult<String> {
    let p = qflow_core::make_params(q, d)?;
    let mut s = serde_json::to_string_pretty(&p)?;
    s.push('\n');
    Ok(s)
}
