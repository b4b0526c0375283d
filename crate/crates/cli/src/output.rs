use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::manifest::{ExperimentManifest, Format};
use crate::CliError;

pub const TOOL_NAME: &str = "closurelab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A header and rows for RFC 4180 output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Keys sorted at every level (serde_json's default map is ordered).
pub fn canonical_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serialization: {e}")))
}

pub fn canonical_bytes(v: &Value) -> Vec<u8> {
    serde_json::to_vec(v).expect("a Value always serializes")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn manifest_hash(m: &ExperimentManifest) -> Result<String, CliError> {
    Ok(sha256_hex(&canonical_bytes(&canonical_value(m)?)))
}

/// The deterministic document written for a JSON run. Wall-clock data is
/// kept out of it so identical inputs give identical bytes.
pub fn envelope(m: &ExperimentManifest, status: &str, payload: &Value) -> Result<Value, CliError> {
    let manifest = canonical_value(m)?;
    let doc = serde_json::json!({
        "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
        "manifest_hash": sha256_hex(&canonical_bytes(&manifest)),
        "manifest": manifest,
        "status": status,
        "payload_hash": sha256_hex(&canonical_bytes(payload)),
        "payload": payload,
    });
    Ok(doc)
}

/// Run metadata outside every hash.
#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub manifest_hash: String,
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
    pub workers: usize,
    pub exit_code: i32,
}

pub fn render(doc: &Value, table: &Table, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(doc).map_err(|e| CliError::Internal(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => table.to_csv(),
    }
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `out.json` → `out.json.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_come_out_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let v = canonical_value(&S { zeta: 1, alpha: 2 }).unwrap();
        assert_eq!(String::from_utf8(canonical_bytes(&v)).unwrap(), r#"{"alpha":2,"zeta":1}"#);
    }

    #[test]
    fn csv_is_crlf_and_quoted() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\r\n1,\"x,y\"\r\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
