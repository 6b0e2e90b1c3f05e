//! Run configuration shared by the subcommands.

use std::fmt;
use std::str::FromStr;

use qflow_core::oracle::QuadratureConfig;

use crate::error::{CliError, CliResult};
use crate::format::fmt_f64;

/// Geometric grid of step sizes, `start` down to `stop` in `points` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for HGrid {
    fn default() -> Self {
        Self {
            start: 1e-1,
            stop: 1e-6,
            points: 11,
        }
    }
}

impl HGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> CliResult<Self> {
        let grid = Self { start, stop, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.start.is_finite() && self.stop > 0.0 && self.start > self.stop) {
            return Err(CliError::Config(format!(
                "h grid needs start > stop > 0, got {}:{}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(CliError::Config("h grid needs at least 2 points".into()));
        }
        Ok(())
    }

    /// Strictly decreasing values, with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let (l0, l1) = (self.start.log10(), self.stop.log10());
        (0..n)
            .map(|i| match i {
                0 => self.start,
                i if i == n - 1 => self.stop,
                i => 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64),
            })
            .collect()
    }
}

impl FromStr for HGrid {
    type Err = CliError;

    /// `START:STOP:N`, e.g. `1e-1:1e-6:11`.
    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(CliError::Config(format!("expected START:STOP:N, got {s:?}")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad number {t:?} in h grid: {e}")))
        };
        let points = n
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::Config(format!("bad point count {n:?}: {e}")))?;
        Self::new(num(a)?, num(b)?, points)
    }
}

impl fmt::Display for HGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", fmt_f64(self.start), fmt_f64(self.stop), self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Initial datum `N_q(μ₀, Cσ₀²)`, target `N_q(μ, Cσ²)` and the h grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub sigma0: f64,
    pub mu0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub h_grid: HGrid,
    pub format: OutputFormat,
    pub quadrature: QuadratureConfig,
}

impl RunConfig {
    pub fn new(q: f64, sigma0: f64, mu0: f64, mu: f64, sigma: f64) -> Self {
        Self {
            q,
            sigma0,
            mu0,
            mu,
            sigma,
            h_grid: HGrid::default(),
            format: OutputFormat::Csv,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.h_grid.validate()?;
        for (name, v) in [("sigma0", self.sigma0), ("sigma", self.sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("q", self.q), ("mu0", self.mu0), ("mu", self.mu)] {
            if !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be finite, got {v}")));
            }
        }
        self.quadrature.validate()?;
        Ok(())
    }
}
