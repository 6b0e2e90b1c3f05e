//! Minimising-movement trajectories compared with the exact flow.

use qflow_core::functionals::jko_step;
use qflow_core::pme_flow::evolve_sigma;
use qflow_core::{make_params, QGaussian1D};

use crate::error::{CliError, CliResult};
use crate::table::{JkoMeta, JkoRow, JkoTable, JKO_SCHEMA};

/// `steps` iterations of [`jko_step`] from `N_q(μ₀, Cσ₀²)` with step `h`.
pub fn cmd_jko(q: f64, sigma0: f64, mu0: f64, h: f64, steps: usize) -> CliResult<JkoTable> {
    if steps == 0 {
        return Err(CliError::Config("steps must be at least 1".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::Config(format!("h must be positive, got {h}")));
    }
    let mut g = QGaussian1D::new(mu0, sigma0, make_params(q, 1)?)?;
    let mut rows = Vec::with_capacity(steps);
    for n in 1..=steps {
        g = jko_step(&g, h)?;
        let exact = evolve_sigma(sigma0, n as f64 * h, q);
        rows.push(JkoRow {
            n,
            mu: g.mu(),
            sigma: g.sigma(),
            sigma_exact: exact,
            abs_error: (g.sigma() - exact).abs(),
        });
    }
    Ok(JkoTable {
        schema_version: JKO_SCHEMA,
        metadata: JkoMeta::new(q, sigma0, mu0, h, steps),
        rows,
    })
}
