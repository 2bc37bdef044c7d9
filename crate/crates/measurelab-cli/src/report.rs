//! Run reports and deterministic artifact writing.
//!
//! Artifacts written to `--out` are byte-deterministic for a fixed config
//! (including the seed): rationals are printed exactly, irrational norms as
//! fixed-precision decimals, and row order follows input order. Wall-clock
//! time goes to stderr only, never into artifacts.

use anyhow::{Context, Result};
use measurelab::exact::{decimal_string, q_to_string, Q};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Decimal places used for irrational report columns.
pub const REPORT_DECIMALS: u32 = 30;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport<C: Serialize, R: Serialize> {
    pub command: String,
    pub config: C,
    pub summary: Summary,
    pub results: R,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub items: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest observed residual (decimal, truncated), when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Destination for the run artifact.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Writes the artifact bytes to the output path (or stdout).
    pub fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(path) => {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent)
                            .with_context(|| format!("cannot create {}", parent.display()))?;
                    }
                }
                std::fs::write(path, bytes)
                    .with_context(|| format!("cannot write {}", path.display()))
            }
            None => std::io::stdout()
                .write_all(bytes)
                .context("cannot write to stdout"),
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(&bytes)
    }
}

/// Rational formatted exactly; used for every exact CSV column.
pub fn fmt_q(x: &Q) -> String {
    q_to_string(x)
}

/// Truncated decimal with the declared report precision; used for columns
/// holding irrational approximations.
pub fn fmt_decimal(x: &Q) -> String {
    decimal_string(x, REPORT_DECIMALS)
}

/// Square root for display: exact string when rational, decimal otherwise.
pub fn fmt_sqrt(x_sq: &Q) -> String {
    match measurelab::exact::sqrt_exact(x_sq) {
        Some(r) => fmt_q(&r),
        None => fmt_decimal(&measurelab::exact::sqrt_floor(
            x_sq,
            measurelab::exact::SQRT_DIGITS,
        )),
    }
}

/// Simple CSV assembly with deterministic row order.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}
