//! SHA-256 manifest verification for the dataset files.
//!
//! Manifests use the `sha256sum` text format: one `<hex>  <name>` line per
//! file, `#` comments ignored. `write_manifest` computes a manifest from
//! the files on disk (trust on first use); `verify_manifest` re-checks
//! them later.

use crate::data::idx::CANONICAL_NAMES;
use crate::error::{CoreError, Result};
use sha2::{Digest, Sha256};
use std::io::Read;
use std::path::Path;

pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub hex: String,
    pub name: String,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (hex, name) = line.split_once(char::is_whitespace).ok_or_else(|| {
            CoreError::parse("checksum manifest", format!("line {}: no name", lineno + 1))
        })?;
        if hex.len() != 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(CoreError::parse(
                "checksum manifest",
                format!("line {}: bad sha256 field", lineno + 1),
            ));
        }
        entries.push(ManifestEntry {
            hex: hex.to_ascii_lowercase(),
            name: name.trim().to_string(),
        });
    }
    if entries.is_empty() {
        return Err(CoreError::parse("checksum manifest", "no entries"));
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileCheck {
    pub name: String,
    pub ok: bool,
    pub expected: String,
    pub actual: String,
}

/// Verifies each manifest entry against `<dir>/<name>`. Missing files are
/// I/O errors; mismatches are reported per file.
pub fn verify_manifest(dir: &Path, manifest_text: &str) -> Result<Vec<FileCheck>> {
    let entries = parse_manifest(manifest_text)?;
    let mut checks = Vec::new();
    for e in entries {
        let actual = sha256_hex(&dir.join(&e.name))?;
        checks.push(FileCheck {
            ok: actual == e.hex,
            name: e.name,
            expected: e.hex,
            actual,
        });
    }
    Ok(checks)
}

/// Computes a manifest for the canonical dataset files present in `dir`
/// (either compression state), in canonical order.
pub fn write_manifest(dir: &Path) -> Result<String> {
    let mut out = String::from("# sha256 checksums of the dataset files\n");
    let mut found = 0;
    for name in CANONICAL_NAMES {
        for candidate in [name.to_string(), format!("{name}.gz")] {
            let p = dir.join(&candidate);
            if p.exists() {
                out.push_str(&format!("{}  {}\n", sha256_hex(&p)?, candidate));
                found += 1;
                break;
            }
        }
    }
    if found == 0 {
        return Err(CoreError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no canonical dataset files in {}", dir.display()),
        )));
    }
    Ok(out)
}
