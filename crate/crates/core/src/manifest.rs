//! Run manifests: a sorted `key value` record written next to every output.

use std::collections::BTreeMap;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 64-bit FNV-1a of `bytes`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub fn file_digest(path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(fnv1a64(&bytes))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        let mut m = Self::default();
        m.set("subcommand", subcommand);
        m.set("tool_version", TOOL_VERSION);
        m
    }

    /// Inserts or replaces a key. Whitespace in keys becomes `_`.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let key: String = key.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        self.entries.insert(key, value.to_string());
        self
    }

    pub fn param(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.set(&format!("param.{name}"), value)
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.set("seed", seed)
    }

    /// Records an input's path and the FNV-1a digest of its bytes.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<&mut Self> {
        let digest = file_digest(path)?;
        self.set(&format!("input.{role}.path"), path.display());
        self.set(&format!("input.{role}.fnv1a64"), format!("{digest:016x}"));
        Ok(self)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} {v}\n")).collect()
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.txt");
        PathBuf::from(name)
    }

    /// Writes `<output>.manifest.txt`.
    pub fn write_for(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn keys_are_sorted() {
        let mut m = RunManifest::new("kernel");
        m.param("grid", 1001).param("range", "0.25:2").seed(7);
        let text = m.to_text();
        let keys: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(text.contains("subcommand kernel\n"));
        assert!(text.contains("seed 7\n"));
    }

    #[test]
    fn manifest_path() {
        assert_eq!(RunManifest::path_for(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest.txt"));
    }
}
