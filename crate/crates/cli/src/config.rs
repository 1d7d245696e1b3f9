//! Run configuration: an optional TOML document overlaid with command-line
//! flags, then deserialized strictly into the command's config type.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";

/// Flag values layered over a config document, addressed by dotted keys.
#[derive(Debug, Default)]
pub struct Overlay {
    table: Table,
}

impl Overlay {
    pub fn load(file: Option<&Path>) -> CliResult<Self> {
        let Some(path) = file else { return Ok(Overlay::default()) };
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let table: Table = text.parse().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(Overlay { table })
    }

    /// Sets `key` (for example `trainer.lr`) when `value` is present.
    pub fn set<T: Serialize>(&mut self, key: &str, value: Option<T>) -> CliResult<()> {
        let Some(value) = value else { return Ok(()) };
        let value = Value::try_from(value).map_err(|e| CliError::Usage(format!("{key}: {e}")))?;
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().expect("non-empty key");
        let mut table = &mut self.table;
        for part in parts {
            let entry = table.entry(part).or_insert_with(|| Value::Table(Table::new()));
            table = match entry {
                Value::Table(t) => t,
                _ => return Err(CliError::Usage(format!("`{part}` is not a table"))),
            };
        }
        table.insert(last.to_string(), value);
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        let mut table = &self.table;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            match table.get(part) {
                Some(Value::Table(t)) if parts.peek().is_some() => table = t,
                Some(_) if parts.peek().is_none() => return true,
                _ => return false,
            }
        }
        false
    }

    pub fn resolve<T: DeserializeOwned>(self) -> CliResult<T> {
        Value::Table(self.table).try_into().map_err(|e: toml::de::Error| CliError::Usage(format!("config: {e}")))
    }
}

pub fn write_resolved<T: Serialize>(config: &T, dir: &Path) -> CliResult<()> {
    let text = toml::to_string(config).map_err(|e| CliError::Usage(format!("config does not serialize: {e}")))?;
    write_file(&dir.join(RESOLVED_CONFIG), text.as_bytes())
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn require_out(out: &Option<PathBuf>) -> CliResult<&Path> {
    out.as_deref().ok_or_else(|| CliError::Usage("an output directory is required (--out or `out`)".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        lr: f64,
        #[serde(default)]
        steps: usize,
    }

    #[derive(Debug, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Outer {
        name: String,
        inner: Inner,
    }

    #[test]
    fn flags_override_document_keys() {
        let mut o = Overlay { table: "name = \"a\"\n[inner]\nlr = 0.5\nsteps = 3\n".parse().unwrap() };
        o.set("inner.lr", Some(0.25)).unwrap();
        o.set::<usize>("inner.steps", None).unwrap();
        assert!(o.contains("inner.lr") && o.contains("name") && !o.contains("inner.other"));
        let got: Outer = o.resolve().unwrap();
        assert_eq!(got, Outer { name: "a".into(), inner: Inner { lr: 0.25, steps: 3 } });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut o = Overlay::default();
        o.set("name", Some("a")).unwrap();
        o.set("inner.lr", Some(1.0)).unwrap();
        o.set("inner.momentum", Some(0.9)).unwrap();
        let err = o.resolve::<Outer>().unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("momentum")), "{err}");
    }
}
