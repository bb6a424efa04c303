use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use nmlkit_core::limits::Limits;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// The JSON document printed by `--json`: the command's result fields
/// followed by enough context to reproduce them.
#[derive(Debug, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub result: Map<String, Value>,
    pub command: String,
    /// SHA-256 over every input the command read, in reading order.
    pub fingerprint: String,
    pub timings_ms: BTreeMap<String, f64>,
    pub limits: Limits,
    pub limits_hit: Vec<String>,
}

/// Per-invocation state: inputs hashed as they are read, phase timings.
pub struct Context {
    argv: Vec<String>,
    hasher: Sha256,
    timings: BTreeMap<String, f64>,
    pub limits: Limits,
}

impl Context {
    pub fn new(argv: Vec<String>, limits: Limits) -> Context {
        Context {
            argv,
            hasher: Sha256::new(),
            timings: BTreeMap::new(),
            limits,
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        self.absorb(text.as_bytes());
        Ok(text)
    }

    /// Hash generated (not read) input, e.g. the parameters of a family.
    pub fn absorb(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += millis(start);
        out
    }

    pub fn command(&self) -> String {
        command_line(&self.argv)
    }

    pub fn fingerprint(&self) -> String {
        format!("sha256:{:x}", self.hasher.clone().finalize())
    }

    pub fn report(self, result: Value, limits_hit: Vec<String>) -> RunReport {
        let result = match result {
            Value::Object(map) => map,
            other => Map::from_iter([("result".to_string(), other)]),
        };
        RunReport {
            result,
            command: self.command(),
            fingerprint: self.fingerprint(),
            timings_ms: self.timings,
            limits: self.limits,
            limits_hit,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

pub fn millis(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn command_line(argv: &[String]) -> String {
    argv.iter()
        .map(|a| {
            if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=,:+".contains(c)) {
                a.clone()
            } else {
                format!("'{}'", a.replace('\'', r"'\''"))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        let argv = ["nmlkit", "mso", "eval", "E x. var(x)", "it's"].map(String::from);
        assert_eq!(command_line(&argv), r"nmlkit mso eval 'E x. var(x)' 'it'\''s'");
    }

    #[test]
    fn fingerprint_depends_on_input_order() {
        let mut a = Context::new(Vec::new(), Limits::default());
        a.absorb(b"ab");
        a.absorb(b"c");
        let mut b = Context::new(Vec::new(), Limits::default());
        b.absorb(b"a");
        b.absorb(b"bc");
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert!(a.fingerprint().starts_with("sha256:"));
    }
}
