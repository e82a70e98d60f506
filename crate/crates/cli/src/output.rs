use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};
use triperc::harness::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Floats in CSV carry 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// What a command produced, before rendering.
pub struct Outcome {
    pub json: serde_json::Value,
    pub table: Option<Table>,
    pub text: Option<String>,
    pub verdict: Option<Verdict>,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn new(json: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            json: serde_json::to_value(json)?,
            table: None,
            text: None,
            verdict: None,
            notes: Vec::new(),
        })
    }

    pub fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn text(mut self, t: String) -> Self {
        self.text = Some(t);
        self
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = Some(v);
        self.notes.push(format!("verdict: {v}"));
        self
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => anyhow::bail!("this command has no CSV form; use --format json or text"),
            },
            Format::Text => match (&self.text, &self.table) {
                (Some(t), _) => t.clone(),
                (None, Some(t)) => t.to_csv(),
                (None, None) => anyhow::bail!("this command has no text form; use --format json"),
            },
        })
    }
}

#[derive(Serialize)]
pub struct Manifest<'a, P: Serialize> {
    pub command: &'a str,
    pub params: &'a P,
    pub seed: u64,
    pub version: &'a str,
    pub duration_secs: f64,
    pub output_sha256: String,
    pub verdict: Option<Verdict>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    PathBuf::from(p)
}

pub fn emit<P: Serialize>(
    command: &str,
    params: &P,
    seed: u64,
    out: Option<&Path>,
    body: &str,
    verdict: Option<Verdict>,
    elapsed: Duration,
) -> Result<()> {
    let manifest = Manifest {
        command,
        params,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        duration_secs: elapsed.as_secs_f64(),
        output_sha256: sha256_hex(body.as_bytes()),
        verdict,
    };
    let manifest = serde_json::to_string_pretty(&manifest)? + "\n";
    match out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            write_atomic(&manifest_path(path), manifest.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprint!("{manifest}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_leaves_no_partial() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"x\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"x\n");
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
