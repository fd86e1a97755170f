//! Report rows and their atomic JSON output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Case being checked, e.g. `space_form:k=0 n=2 ball=1`.
    pub name: String,
    /// Identity or property the row verifies.
    pub identity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub h: Option<f64>,
    pub order_estimate: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

impl Row {
    /// `residual = |lhs − rhs|`, passing when it is at most `tol`.
    pub fn compare(name: &str, identity: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = (lhs - rhs).abs();
        Row {
            name: name.to_string(),
            identity: identity.to_string(),
            lhs,
            rhs,
            residual,
            h: None,
            order_estimate: None,
            pass: residual <= tol,
            note: None,
        }
    }

    /// `lhs ≥ rhs` with residual the shortfall.
    pub fn at_least(name: &str, identity: &str, lhs: f64, rhs: f64) -> Self {
        Row { residual: (rhs - lhs).max(0.0), pass: lhs >= rhs, ..Row::compare(name, identity, lhs, rhs, 0.0) }
    }

    pub fn at(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn summary(&self) -> String {
        let h = self.h.map_or(String::new(), |h| format!(" h={h:.3e}"));
        let p = self.order_estimate.map_or(String::new(), |p| format!(" order={p:.2}"));
        let note = self.note.as_ref().map_or(String::new(), |n| format!("  [{n}]"));
        format!(
            "{} {:<22} {}{h}{p} lhs={:.10e} rhs={:.10e} residual={:.3e}{note}",
            if self.pass { "PASS" } else { "FAIL" },
            self.identity,
            self.name,
            self.lhs,
            self.rhs,
            self.residual
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Buffers CSV output and writes it atomically.
pub fn write_csv_atomic(path: &Path, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    write_atomic(path, &buf)
}
