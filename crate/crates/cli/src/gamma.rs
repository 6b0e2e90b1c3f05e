//! Convergence tables for the three rescalings of `J_h`.

use rayon::prelude::*;

use qflow_core::functionals::{entropy_diff, rescaled_first, rescaled_second, rescaled_third, wasserstein2_sq};
use qflow_core::{make_params, QGaussian1D};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::table::{ConvergenceMeta, ConvergenceRow, ConvergenceTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statement {
    /// `a D^{1/q} J_h → W₂²`
    First,
    /// `ab D^{(1−q)/q} J_h − (b/D) W₂² → E_q(N) − E_q(N₀)`
    Second,
    /// `ab D^{(1−q)/q} J_h − W₂²/(2h)`, bounded below by the second; `0 < q < 1`
    Third,
}

impl Statement {
    pub fn id(self) -> u8 {
        match self {
            Self::First => 1,
            Self::Second => 2,
            Self::Third => 3,
        }
    }
}

impl TryFrom<u8> for Statement {
    type Error = CliError;
    fn try_from(v: u8) -> CliResult<Self> {
        match v {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            3 => Ok(Self::Third),
            _ => Err(CliError::Config(format!("statement must be 1, 2 or 3, got {v}"))),
        }
    }
}

/// Evaluates the rescaled functional of `statement` on the h grid of `cfg`,
/// with the target `N_q(μ, Cσ²)` and initial datum `N_q(μ₀, Cσ₀²)`.
pub fn cmd_gamma(statement: Statement, cfg: &RunConfig) -> CliResult<ConvergenceTable> {
    cfg.validate()?;
    if statement == Statement::Third && !(cfg.q > 0.0 && cfg.q < 1.0) {
        return Err(CliError::Config(format!(
            "statement 3 holds only for 0 < q < 1, got q = {}",
            cfg.q
        )));
    }
    let p = make_params(cfg.q, 1)?;
    let g0 = QGaussian1D::new(cfg.mu0, cfg.sigma0, p)?;
    let g = QGaussian1D::new(cfg.mu, cfg.sigma, p)?;
    let limit = match statement {
        Statement::First => wasserstein2_sq(&g, &g0)?,
        Statement::Second | Statement::Third => entropy_diff(&g, &g0)?,
    };

    let rows = cfg
        .h_grid
        .values()
        .into_par_iter()
        .map(|h| -> CliResult<ConvergenceRow> {
            let row = match statement {
                Statement::First => ConvergenceRow::new(h, rescaled_first(&g, &g0, h)?, limit, None),
                Statement::Second => ConvergenceRow::new(h, rescaled_second(&g, &g0, h)?, limit, None),
                Statement::Third => {
                    let third = rescaled_third(&g, &g0, h)?;
                    let second = rescaled_second(&g, &g0, h)?;
                    ConvergenceRow::new(h, third, limit, Some(third - second))
                }
            };
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let meta = ConvergenceMeta::new(
        statement.id(),
        cfg.q,
        cfg.sigma0,
        cfg.mu0,
        cfg.mu,
        cfg.sigma,
        cfg.h_grid.to_string(),
    );
    Ok(ConvergenceTable::new(meta, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_statement_converges() {
        let t = cmd_gamma(Statement::First, &RunConfig::new(0.8, 1.0, 0.0, 0.3, 1.4)).unwrap();
        assert_eq!(t.rows.len(), 11);
        assert!(t.rows.windows(2).all(|w| w[0].h > w[1].h && w[0].abs_error > w[1].abs_error));
        assert!(t.rows.last().unwrap().abs_error < 1e-4 * t.rows[0].limit);
    }

    #[test]
    fn initial_datum_target() {
        // W₂² and the limit vanish; the rescaled values are O(h), not 0.
        let t = cmd_gamma(Statement::First, &RunConfig::new(0.8, 1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(t.rows.iter().all(|r| r.limit == 0.0));
        let last = t.rows.last().unwrap();
        assert!(last.value.abs() < 1e-5, "{last:?}");
        assert!(t.rows.windows(2).all(|w| w[0].value.abs() > w[1].value.abs()));
    }

    #[test]
    fn third_statement_gap_column() {
        let t = cmd_gamma(Statement::Third, &RunConfig::new(0.8, 1.0, 0.0, 0.3, 1.4)).unwrap();
        assert!(t.rows.iter().all(|r| r.gap.unwrap() >= -1e-12));
        let err = cmd_gamma(Statement::Third, &RunConfig::new(1.2, 1.0, 0.0, 0.3, 1.4)).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn near_gaussian_entropy_limit() {
        // q → 1: the limit tends to the Boltzmann entropy difference −log(σ/σ₀).
        let t = cmd_gamma(Statement::Second, &RunConfig::new(0.999, 1.0, 0.0, 0.3, 1.4)).unwrap();
        let classical = -(1.4f64).ln();
        assert!((t.rows[0].limit - classical).abs() < 2e-3, "{}", t.rows[0].limit);
    }

    #[test]
    fn rejects_unknown_statement() {
        assert!(Statement::try_from(4).is_err());
    }
}
