//! Deterministic CSV/JSON serialisation and all-or-nothing file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Scenario name and content hash stamped into every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub name: String,
    pub sha256: String,
}

impl Provenance {
    pub fn new(name: &str, source: &[u8]) -> Self {
        let digest = Sha256::digest(source);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            name: name.to_string(),
            sha256,
        }
    }
}

/// Fixed-width scientific notation; the same value always prints the same way.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, prov: &Provenance) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&format!("# scenario: {}\n", prov.name));
        out.push_str(&format!("# scenario_sha256: {}\n", prov.sha256));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Pretty JSON with the provenance fields merged in; keys are sorted.
pub fn render_json(prov: &Provenance, mut body: Value) -> Vec<u8> {
    if let Value::Object(map) = &mut body {
        map.insert("scenario".into(), Value::String(prov.name.clone()));
        map.insert("scenario_sha256".into(), Value::String(prov.sha256.clone()));
    }
    let mut s = serde_json::to_string_pretty(&body).expect("JSON values always serialise");
    s.push('\n');
    s.into_bytes()
}

/// Files written to hidden temporaries and renamed into place only by
/// [`Staging::commit`]. Dropping an uncommitted staging area removes the
/// temporaries, so a failed run leaves no outputs behind.
#[derive(Debug)]
pub struct Staging {
    dir: PathBuf,
    pending: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl Staging {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stage(&mut self, file_name: &str, bytes: &[u8]) -> CliResult<()> {
        let (tmp, dest) = write_temp(&self.dir, file_name, bytes)?;
        self.pending.push((tmp, dest));
        Ok(())
    }

    /// Registers a temporary written elsewhere (e.g. by a writer thread).
    pub fn adopt(&mut self, tmp: PathBuf, dest: PathBuf) {
        self.pending.push((tmp, dest));
    }

    pub fn commit(mut self) -> CliResult<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.pending.len());
        for (tmp, dest) in &self.pending {
            fs::rename(tmp, dest).map_err(|e| CliError::io(dest, e))?;
            done.push(dest.clone());
        }
        self.committed = true;
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.pending {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}

/// Writes `bytes` to a hidden temporary next to `dir/file_name` and returns
/// `(temporary, destination)`.
pub fn write_temp(dir: &Path, file_name: &str, bytes: &[u8]) -> CliResult<(PathBuf, PathBuf)> {
    let dest = dir.join(file_name);
    let tmp = dir.join(format!(".{file_name}.{}.partial", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    Ok((tmp, dest))
}
