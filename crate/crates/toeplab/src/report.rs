//! Output artifacts. Every file carries the tool version, a hash of the configuration and
//! the seed, and nothing that changes between identical runs.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::VERSION;

/// Hex SHA-256 of the configuration text.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        Provenance { tool: "toeplab".into(), version: VERSION.into(), config_hash: config_hash(config_text), seed }
    }

    /// `# key=value` comment line heading CSV files.
    pub fn comment(&self) -> String {
        format!("# {} {} config_hash={} seed={}", self.tool, self.version, self.config_hash, self.seed)
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("write failed: {e}"))
}

/// A table with a provenance comment line, a header and string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, prov: &Provenance, out: impl Write) -> Result<()> {
        let mut out = out;
        writeln!(out, "{}", prov.comment()).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn to_string(&self, prov: &Provenance) -> String {
        let mut buf = Vec::new();
        self.write(prov, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

/// Pretty JSON `{"provenance": ..., "result": ...}`.
pub fn to_json<T: Serialize>(prov: &Provenance, result: &T) -> String {
    serde_json::to_string_pretty(&Wrapped { provenance: prov, result }).expect("results serialize")
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
