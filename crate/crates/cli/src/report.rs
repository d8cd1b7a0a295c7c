use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
}

/// What a command produced, before rendering.
pub struct Report {
    pub command: String,
    pub bounds: BTreeMap<&'static str, Value>,
    pub inputs: BTreeMap<String, String>,
    pub result: Value,
    pub human: String,
    pub status: Status,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    bounds: &'a BTreeMap<&'static str, Value>,
    inputs: &'a BTreeMap<String, String>,
    status: &'static str,
    result: &'a Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            bounds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            result: Value::Null,
            human: String::new(),
            status: Status::Ok,
        }
    }

    pub fn bound(&mut self, name: &'static str, value: impl Serialize) {
        self.bounds.insert(name, serde_json::to_value(value).expect("serializable"));
    }

    /// Records the SHA-256 of an input.
    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.to_string(), digest(bytes));
    }

    pub fn result(&mut self, value: impl Serialize) {
        self.result = serde_json::to_value(value).expect("serializable");
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.human.push_str(text.as_ref());
        self.human.push('\n');
    }

    pub fn violation(&mut self) {
        self.status = Status::Violation;
    }

    pub fn render(&self, format: Format, seed: u64) -> String {
        match format {
            Format::Human => self.human.clone(),
            Format::Json => {
                let env = Envelope {
                    schema: SCHEMA,
                    tool: "wplab",
                    version: env!("CARGO_PKG_VERSION"),
                    command: &self.command,
                    seed,
                    bounds: &self.bounds,
                    inputs: &self.inputs,
                    status: match self.status {
                        Status::Ok => "ok",
                        Status::Violation => "violation",
                    },
                    result: &self.result,
                };
                let mut s = serde_json::to_string_pretty(&env).expect("serializable");
                s.push('\n');
                s
            }
        }
    }

    pub fn emit(&self, format: Format, seed: u64, out: Option<&Path>) -> Result<()> {
        let text = self.render(format, seed);
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a file and records its digest under `name`.
pub fn read_input(report: &mut Report, name: &str, path: &PathBuf) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    report.input(name, text.as_bytes());
    Ok(text)
}
