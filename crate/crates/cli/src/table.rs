//! Experiment tables and their CSV / JSON encodings.
//!
//! CSV files start with `# key: value` metadata lines, followed by a header
//! row. No timestamps are written; the `inputs_sha256` line hashes the
//! canonical form of every input, so equal hashes mean equal runs.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::format::fmt_f64;

pub const CONVERGENCE_SCHEMA: &str = "qflow.convergence/1";
pub const JKO_SCHEMA: &str = "qflow.jko/1";

/// Hex SHA-256 of `canonical`.
pub fn inputs_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceMeta {
    pub statement: u8,
    pub q: f64,
    pub sigma0: f64,
    pub mu0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub h_grid: String,
    pub inputs_sha256: String,
}

impl ConvergenceMeta {
    pub fn new(statement: u8, q: f64, sigma0: f64, mu0: f64, mu: f64, sigma: f64, h_grid: String) -> Self {
        let canonical = format!(
            "{CONVERGENCE_SCHEMA}|statement={statement}|q={}|sigma0={}|mu0={}|mu={}|sigma={}|h_grid={h_grid}",
            fmt_f64(q),
            fmt_f64(sigma0),
            fmt_f64(mu0),
            fmt_f64(mu),
            fmt_f64(sigma),
        );
        Self {
            statement,
            q,
            sigma0,
            mu0,
            mu,
            sigma,
            h_grid,
            inputs_sha256: inputs_hash(&canonical),
        }
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("statement", self.statement.to_string()),
            ("q", fmt_f64(self.q)),
            ("sigma0", fmt_f64(self.sigma0)),
            ("mu0", fmt_f64(self.mu0)),
            ("mu", fmt_f64(self.mu)),
            ("sigma", fmt_f64(self.sigma)),
            ("h_grid", self.h_grid.clone()),
            ("inputs_sha256", self.inputs_sha256.clone()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub value: f64,
    pub limit: f64,
    pub abs_error: f64,
    /// Statement 3 only: `rescaled_third − rescaled_second`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

impl ConvergenceRow {
    pub fn new(h: f64, value: f64, limit: f64, gap: Option<f64>) -> Self {
        Self {
            h,
            value,
            limit,
            abs_error: (value - limit).abs(),
            gap,
        }
    }
}

/// Rows in descending `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub schema_version: &'static str,
    pub metadata: ConvergenceMeta,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(metadata: ConvergenceMeta, rows: Vec<ConvergenceRow>) -> Self {
        Self {
            schema_version: CONVERGENCE_SCHEMA,
            metadata,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let with_gap = self.rows.iter().any(|r| r.gap.is_some());
        let mut out = format!("# schema: {}\n", self.schema_version);
        for (k, v) in self.metadata.lines() {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("h,value,limit,abs_error");
        out.push_str(if with_gap { ",gap\n" } else { "\n" });
        for r in &self.rows {
            let mut cells = vec![fmt_f64(r.h), fmt_f64(r.value), fmt_f64(r.limit), fmt_f64(r.abs_error)];
            if with_gap {
                cells.push(r.gap.map(fmt_f64).unwrap_or_default());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JkoMeta {
    pub q: f64,
    pub sigma0: f64,
    pub mu0: f64,
    pub h: f64,
    pub steps: usize,
    pub inputs_sha256: String,
}

impl JkoMeta {
    pub fn new(q: f64, sigma0: f64, mu0: f64, h: f64, steps: usize) -> Self {
        let canonical = format!(
            "{JKO_SCHEMA}|q={}|sigma0={}|mu0={}|h={}|steps={steps}",
            fmt_f64(q),
            fmt_f64(sigma0),
            fmt_f64(mu0),
            fmt_f64(h)
        );
        Self {
            q,
            sigma0,
            mu0,
            h,
            steps,
            inputs_sha256: inputs_hash(&canonical),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JkoRow {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub sigma_exact: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JkoTable {
    pub schema_version: &'static str,
    pub metadata: JkoMeta,
    pub rows: Vec<JkoRow>,
}

impl JkoTable {
    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = format!("# schema: {}\n", self.schema_version);
        for (k, v) in [
            ("q", fmt_f64(m.q)),
            ("sigma0", fmt_f64(m.sigma0)),
            ("mu0", fmt_f64(m.mu0)),
            ("h", fmt_f64(m.h)),
            ("steps", m.steps.to_string()),
            ("inputs_sha256", m.inputs_sha256.clone()),
        ] {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("n,mu,sigma,sigma_exact,abs_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt_f64(r.mu),
                fmt_f64(r.sigma),
                fmt_f64(r.sigma_exact),
                fmt_f64(r.abs_error)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
