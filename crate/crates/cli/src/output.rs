use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Format;

/// Exit status plus message for anything that stops a command.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

/// Domain findings: invalid records, failed training, fetch misses.
pub const FINDINGS: u8 = 1;
/// Bad usage or I/O.
pub const USAGE_OR_IO: u8 = 2;

impl Failure {
    pub fn findings(message: impl Into<String>) -> Self {
        Failure {
            code: FINDINGS,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE_OR_IO,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Failure {
            code: USAGE_OR_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

pub type CmdResult = Result<u8, Failure>;

/// What was asked for, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: &'static str, format: Format) -> Self {
        RunConfig {
            command,
            dataset: None,
            algorithm: None,
            k: None,
            seed: None,
            output: None,
            format,
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    /// SHA-256 of the input file's bytes.
    pub input_sha256: &'a str,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, input_sha256: &'a str, result: T) -> Self {
        Envelope {
            tool: "vulnchar",
            version: env!("CARGO_PKG_VERSION"),
            config,
            input_sha256,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Reads a whole input file and returns it with its hash.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, String), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    let hex = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok((bytes, hex))
}

pub fn markdown_header(config: &RunConfig, input_sha256: &str) -> String {
    let mut s = format!(
        "<!-- vulnchar {} {}",
        env!("CARGO_PKG_VERSION"),
        config.command
    );
    if let Some(d) = &config.dataset {
        s.push_str(&format!(" input={d}"));
    }
    if let Some(a) = &config.algorithm {
        s.push_str(&format!(" algo={a}"));
    }
    if let Some(k) = config.k {
        s.push_str(&format!(" k={k}"));
    }
    if let Some(seed) = config.seed {
        s.push_str(&format!(" seed={seed}"));
    }
    s.push_str(&format!(" sha256={input_sha256} -->\n\n"));
    s
}

/// Collects named report files and either writes them under `out` or
/// prints them.
pub struct Sink {
    out: Option<PathBuf>,
    format: Format,
    stdout_json: Vec<String>,
    stdout_markdown: Vec<String>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, format: Format) -> Result<Self, Failure> {
        if let Some(dir) = &out {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        Ok(Sink {
            out,
            format,
            stdout_json: Vec::new(),
            stdout_markdown: Vec::new(),
        })
    }

    fn wants_json(&self) -> bool {
        matches!(self.format, Format::Json | Format::Both)
    }

    fn wants_markdown(&self) -> bool {
        matches!(self.format, Format::Markdown | Format::Both)
    }

    /// One report as `<stem>.json` and/or `<stem>.md`.
    pub fn report(
        &mut self,
        stem: &str,
        json: impl FnOnce() -> String,
        markdown: impl FnOnce() -> String,
    ) -> Result<(), Failure> {
        if self.wants_json() {
            let text = json();
            match &self.out {
                Some(dir) => write(&dir.join(format!("{stem}.json")), &text)?,
                None => self.stdout_json.push(text),
            }
        }
        if self.wants_markdown() {
            let text = markdown();
            match &self.out {
                Some(dir) => write(&dir.join(format!("{stem}.md")), &text)?,
                None => self.stdout_markdown.push(text),
            }
        }
        Ok(())
    }

    /// A file written regardless of format; skipped on stdout.
    pub fn file(&mut self, name: &str, content: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.out {
            write(&dir.join(name), content)?;
        }
        Ok(())
    }

    pub fn finish(self) {
        for s in self.stdout_json.iter().chain(&self.stdout_markdown) {
            print!("{s}");
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
