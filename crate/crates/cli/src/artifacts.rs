//! Run directories: atomic artifact writes, digests and the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const FAILED: &str = "FAILED";

/// A CSV table held in memory until it is written in one piece.
pub struct Csv {
    body: String,
    width: usize,
}

impl Csv {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        let mut body = format!("#schema={schema}\n");
        body.push_str(&columns.join(","));
        body.push('\n');
        Self { body, width: columns.len() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.width, "row width");
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.body.push_str(&line.join(","));
        self.body.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.body.into_bytes()
    }
}

pub enum Cell<'a> {
    F(f64),
    U(u64),
    S(&'a str),
    B(bool),
}

impl Cell<'_> {
    /// Floats carry 17 significant digits so that they parse back exactly.
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.to_string(),
            Cell::B(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: &'a C,
    pub started: String,
    pub finished: String,
    pub files: Vec<FileRecord>,
    pub diagnostics: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

impl RunDir {
    /// Creates the directory. A directory that already holds a manifest or
    /// a failure marker is refused so that runs never mix.
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        for name in [MANIFEST, FAILED] {
            if root.join(name).exists() {
                bail!("{} already holds a run ({name} present)", root.display());
            }
        }
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes to a hidden temporary and renames it into place.
    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.root.join(format!(".{name}.tmp"));
        let dest = self.root.join(name);
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &dest).with_context(|| format!("renaming into {}", dest.display()))?;
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if self.files.iter().any(|f| f.name == name) {
            bail!("artifact {name} written twice");
        }
        self.write_atomic(name, bytes)?;
        self.files.push(FileRecord { name: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Re-reads every artifact and compares it with the recorded digest.
    pub fn verify(&self) -> Result<()> {
        for f in &self.files {
            let bytes = fs::read(self.root.join(&f.name))?;
            if sha256_hex(&bytes) != f.sha256 {
                bail!("digest mismatch for {}", f.name);
            }
        }
        Ok(())
    }

    pub fn finish<C: Serialize>(self, mut manifest: RunManifest<'_, C>) -> Result<PathBuf> {
        self.verify()?;
        manifest.files = self.files.clone();
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        self.write_atomic(MANIFEST, &text)?;
        Ok(self.root.join(MANIFEST))
    }

    /// Leaves a marker naming the error next to whatever was written.
    pub fn fail(&self, err: &anyhow::Error) {
        let listed: Vec<&str> = self.files.iter().map(|f| f.name.as_str()).collect();
        let text = format!("error: {err:#}\npartial artifacts: {}\n", listed.join(", "));
        let _ = fs::write(self.root.join(FAILED), text);
    }
}
