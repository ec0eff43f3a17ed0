//! JSON experiment files:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "command": "estimate",
//!   "parameters": { "n": 1000000, "m": 100, "b": 64, "theta": "spike:1" },
//!   "output": { "path": "out.csv", "format": "csv" }
//! }
//! ```
//!
//! Parameters are the subcommand's flags without dashes (`c_tilde` and
//! `c-tilde` are both accepted); `true` turns on a switch. They go through
//! the same parser as the command line, so unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::{Cli, Command};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub format_version: u32,
    pub command: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

const COMMANDS: [&str; 5] = ["estimate", "sweep", "regime", "bounds", "quantizer-check"];

impl ExperimentFile {
    /// Equivalent command-line arguments, program name first.
    pub fn to_argv(&self) -> Result<Vec<String>> {
        if self.format_version != 1 {
            bail!(
                "unsupported format_version {} (expected 1)",
                self.format_version
            );
        }
        if !COMMANDS.contains(&self.command.as_str()) {
            bail!(
                "unknown command {:?}; expected one of {}",
                self.command,
                COMMANDS.join(", ")
            );
        }
        let mut argv = vec!["dnpr".to_string(), self.command.clone()];
        for (key, value) in &self.parameters {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) => {}
                Value::Number(n) => argv.extend([flag, n.to_string()]),
                Value::String(s) => argv.extend([flag, s.clone()]),
                other => {
                    bail!("parameter {key:?} must be a number, string or boolean, got {other}")
                }
            }
        }
        if let Some(out) = &self.output {
            if self.command == "quantizer-check" {
                bail!("quantizer-check has no output file");
            }
            if let Some(path) = &out.path {
                argv.extend(["--out".to_string(), path.display().to_string()]);
            }
            if let Some(format) = &out.format {
                argv.extend(["--format".to_string(), format.clone()]);
            }
        }
        Ok(argv)
    }
}

pub fn parse(text: &str) -> Result<Command> {
    let file: ExperimentFile = serde_json::from_str(text).context("invalid experiment file")?;
    let argv = file.to_argv()?;
    let cli = Cli::try_parse_from(&argv).map_err(|e| anyhow::anyhow!("{}", e.render()))?;
    Ok(cli.command)
}

pub fn load(path: &Path) -> Result<Command> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}
